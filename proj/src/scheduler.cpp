#include "homectx/scheduler.hpp"

#include <algorithm>

#include "homectx/error.hpp"

namespace homectx {

std::string_view to_string(InstanceState s) {
    switch (s) {
        case InstanceState::Pending: return "pending";
        case InstanceState::Running: return "running";
        case InstanceState::Suspended: return "suspended";
        case InstanceState::Completed: return "completed";
        case InstanceState::Aborted: return "aborted";
    }
    return "?";
}

namespace {

bool is_live_state(InstanceState s) {
    return s == InstanceState::Pending || s == InstanceState::Running || s == InstanceState::Suspended;
}

}  // namespace

Scheduler::Scheduler(const TaskLibrary& library, VirtualClock& clock, TraceLog* trace, int parallel)
    : library_(library), clock_(clock), trace_(trace), parallel_(parallel) {
    if (parallel < 1) throw Error(ErrorCode::InvalidArgument, "parallel must be at least 1");
}

void Scheduler::transition(TaskInstance& inst, InstanceState to) {
    const auto from = inst.state;
    inst.state = to;
    if (to == InstanceState::Pending || to == InstanceState::Suspended) inst.seq = next_seq_++;
    if (trace_)
        trace_->append(format_stamp(clock_.now()) + " SCHED #" + std::to_string(inst.id) + ":" + inst.name + " " +
                       std::string(to_string(from)) + "→" + std::string(to_string(to)));
    changes_.push_back(Change{inst, from});
}

std::size_t Scheduler::running_count() const {
    std::size_t n = 0;
    for (const auto& [id, inst] : instances_) n += inst.state == InstanceState::Running;
    return n;
}

std::uint64_t Scheduler::submit(const TaskId& task) {
    std::uint64_t id = 0;
    {
        std::lock_guard lock(mutex_);
        const Task* t = library_.find(task);
        if (!t) throw Error(ErrorCode::UnknownTask, "unknown task " + task.str());
        id = next_id_++;
        TaskInstance inst{id, task, t->name, InstanceState::Pending, t->priority, next_seq_++};
        auto& ref = instances_.emplace(id, std::move(inst)).first->second;
        ++submitted_;
        if (trace_)
            trace_->append(format_stamp(clock_.now()) + " SCHED #" + std::to_string(id) + ":" + ref.name +
                           " submitted Pr=" + std::to_string(ref.priority));

        if (running_count() < static_cast<std::size_t>(parallel_)) {
            transition(ref, InstanceState::Running);
        } else {
            TaskInstance* victim = nullptr;
            for (auto& [rid, r] : instances_) {
                if (r.state != InstanceState::Running) continue;
                if (!victim || library_.compare_urgency(r.task, victim->task) < 0 ||
                    (library_.compare_urgency(r.task, victim->task) == 0 && r.id > victim->id))
                    victim = &r;
            }
            if (victim && library_.compare_urgency(task, victim->task) > 0) {
                transition(*victim, InstanceState::Suspended);
                transition(ref, InstanceState::Running);
            }
        }
    }
    flush();
    return id;
}

void Scheduler::fill_slots() {
    while (running_count() < static_cast<std::size_t>(parallel_)) {
        TaskInstance* best = nullptr;
        for (auto& [id, inst] : instances_) {
            if (inst.state != InstanceState::Pending && inst.state != InstanceState::Suspended) continue;
            if (!best) {
                best = &inst;
                continue;
            }
            const auto c = library_.compare_urgency(inst.task, best->task);
            if (c > 0) {
                best = &inst;
            } else if (c == 0) {
                const bool a_susp = inst.state == InstanceState::Suspended;
                const bool b_susp = best->state == InstanceState::Suspended;
                if (a_susp != b_susp ? a_susp : inst.seq < best->seq) best = &inst;
            }
        }
        if (!best) return;
        transition(*best, InstanceState::Running);
    }
}

std::optional<std::uint64_t> Scheduler::complete(std::uint64_t instance) {
    std::optional<std::uint64_t> next;
    {
        std::lock_guard lock(mutex_);
        auto it = instances_.find(instance);
        if (it == instances_.end() || it->second.state != InstanceState::Running)
            throw Error(ErrorCode::NotRunning, "instance " + std::to_string(instance) + " is not running");
        transition(it->second, InstanceState::Completed);
        ++completed_;
        const auto before = changes_.size();
        fill_slots();
        if (changes_.size() > before) next = changes_.back().after.id;
    }
    flush();
    return next;
}

void Scheduler::abort(std::uint64_t instance) {
    {
        std::lock_guard lock(mutex_);
        auto it = instances_.find(instance);
        if (it == instances_.end() || !is_live_state(it->second.state))
            throw Error(ErrorCode::NotRunning, "instance " + std::to_string(instance) + " is not live");
        const bool was_running = it->second.state == InstanceState::Running;
        transition(it->second, InstanceState::Aborted);
        ++aborted_;
        if (was_running) fill_slots();
    }
    flush();
}

void Scheduler::flush() {
    std::unique_lock lock(mutex_);
    if (flushing_) return;
    flushing_ = true;
    while (!changes_.empty()) {
        Change c = std::move(changes_.front());
        changes_.pop_front();
        if (!listener_) continue;
        lock.unlock();
        try {
            listener_(c.after, c.from, c.after.state);
        } catch (...) {
            lock.lock();
            flushing_ = false;
            throw;
        }
        lock.lock();
    }
    flushing_ = false;
}

std::vector<TaskInstance> Scheduler::snapshot() const {
    std::lock_guard lock(mutex_);
    std::vector<TaskInstance> out;
    for (const auto& [id, inst] : instances_)
        if (is_live_state(inst.state)) out.push_back(inst);
    std::sort(out.begin(), out.end(), [this](const TaskInstance& a, const TaskInstance& b) {
        if (a.task != b.task) return library_.compare_priority(a.task, b.task) > 0;
        return a.id < b.id;
    });
    return out;
}

std::vector<TaskInstance> Scheduler::history() const {
    std::lock_guard lock(mutex_);
    std::vector<TaskInstance> out;
    for (const auto& [id, inst] : instances_) out.push_back(inst);
    return out;
}

std::optional<TaskInstance> Scheduler::instance(std::uint64_t id) const {
    std::lock_guard lock(mutex_);
    auto it = instances_.find(id);
    if (it == instances_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::uint64_t> Scheduler::running() const {
    std::lock_guard lock(mutex_);
    std::vector<std::uint64_t> out;
    for (const auto& [id, inst] : instances_)
        if (inst.state == InstanceState::Running) out.push_back(id);
    return out;
}

bool Scheduler::is_live(const TaskId& task) const {
    std::lock_guard lock(mutex_);
    for (const auto& [id, inst] : instances_)
        if (inst.task == task && is_live_state(inst.state)) return true;
    return false;
}

std::size_t Scheduler::live() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [id, inst] : instances_) n += is_live_state(inst.state);
    return n;
}

}  // namespace homectx

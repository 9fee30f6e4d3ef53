#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "homectx/clock.hpp"
#include "homectx/task_model.hpp"
#include "homectx/trace.hpp"

namespace homectx {

enum class InstanceState { Pending, Running, Suspended, Completed, Aborted };

std::string_view to_string(InstanceState s);

struct TaskInstance {
    std::uint64_t id = 0;
    TaskId task;
    std::string name;
    InstanceState state = InstanceState::Pending;
    int priority = 0;
    std::uint64_t seq = 0;  // order of entering the waiting queues

    friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

/// Preemptive priority scheduler for task instances.
///
/// A submission preempts the least urgent running instance only when it is
/// strictly more urgent (compare_urgency). Freed slots go to the most urgent
/// waiting instance; at equal urgency suspended instances come before
/// pending ones, then first come first served.
class Scheduler {
public:
    using Listener = std::function<void(const TaskInstance&, InstanceState from, InstanceState to)>;

    Scheduler(const TaskLibrary& library, VirtualClock& clock, TraceLog* trace = nullptr, int parallel = 1);

    /// Called after each transition, outside any scheduler call that caused
    /// it, in transition order. May call back into the scheduler.
    void set_listener(Listener listener) { listener_ = std::move(listener); }

    /// Throws UnknownTask.
    std::uint64_t submit(const TaskId& task);

    /// Throws NotRunning. Returns the instance that took the freed slot.
    std::optional<std::uint64_t> complete(std::uint64_t instance);

    /// Aborts a pending, running or suspended instance.
    void abort(std::uint64_t instance);

    /// Live instances, most urgent first (then by instance id).
    std::vector<TaskInstance> snapshot() const;
    /// Every instance ever submitted, by instance id.
    std::vector<TaskInstance> history() const;
    std::optional<TaskInstance> instance(std::uint64_t id) const;
    std::vector<std::uint64_t> running() const;
    bool is_live(const TaskId& task) const;

    std::uint64_t submitted() const { return submitted_; }
    std::uint64_t completed() const { return completed_; }
    std::uint64_t aborted() const { return aborted_; }
    std::size_t live() const;
    int parallel() const { return parallel_; }

private:
    struct Change {
        TaskInstance after;
        InstanceState from;
    };

    void transition(TaskInstance& inst, InstanceState to);
    void fill_slots();
    void flush();
    std::size_t running_count() const;

    const TaskLibrary& library_;
    VirtualClock& clock_;
    TraceLog* trace_;
    int parallel_;
    Listener listener_;

    mutable std::recursive_mutex mutex_;
    std::map<std::uint64_t, TaskInstance> instances_;
    std::uint64_t next_id_ = 1;
    std::uint64_t next_seq_ = 1;
    std::uint64_t submitted_ = 0, completed_ = 0, aborted_ = 0;
    std::deque<Change> changes_;
    bool flushing_ = false;
};

}  // namespace homectx

#include "homectx/clock.hpp"

#include <charconv>
#include <cstdio>

namespace homectx {

std::string format_stamp(VirtualTime t) {
    const auto ms = t % 1000;
    const auto s = (t / 1000) % 60;
    const auto m = (t / 60'000) % 60;
    const auto h = t / 3'600'000;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%03lld", static_cast<long long>(h),
                  static_cast<long long>(m), static_cast<long long>(s), static_cast<long long>(ms));
    return buf;
}

std::optional<VirtualTime> parse_stamp(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto read = [](std::string_view part) -> std::optional<long long> {
        if (part.empty()) return std::nullopt;
        long long v = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || p != part.data() + part.size() || v < 0) return std::nullopt;
        return v;
    };
    std::string_view sv(s);
    if (sv.find(':') == std::string_view::npos) return read(sv);

    long long ms = 0;
    if (auto dot = sv.find('.'); dot != std::string_view::npos) {
        auto frac = sv.substr(dot + 1);
        if (frac.size() != 3) return std::nullopt;
        auto f = read(frac);
        if (!f) return std::nullopt;
        ms = *f;
        sv = sv.substr(0, dot);
    }
    std::vector<long long> parts;
    while (true) {
        auto colon = sv.find(':');
        auto v = read(sv.substr(0, colon));
        if (!v) return std::nullopt;
        parts.push_back(*v);
        if (colon == std::string_view::npos) break;
        sv = sv.substr(colon + 1);
    }
    if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
    if (parts[1] > 59 || (parts.size() == 3 && parts[2] > 59)) return std::nullopt;
    long long total = parts[0] * 3'600'000 + parts[1] * 60'000 + ms;
    if (parts.size() == 3) total += parts[2] * 1000;
    return total;
}

VirtualTime VirtualClock::now() const {
    std::lock_guard lock(mutex_);
    return now_;
}

VirtualClock::TimerId VirtualClock::schedule_at(VirtualTime t, std::function<void()> fn) {
    std::lock_guard lock(mutex_);
    if (t < now_) t = now_;
    const auto id = next_seq_++;
    Key key{t, id};
    timers_.emplace(key, std::move(fn));
    index_.emplace(id, key);
    return id;
}

VirtualClock::TimerId VirtualClock::schedule_after(VirtualTime delay, std::function<void()> fn) {
    return schedule_at(now() + (delay < 0 ? 0 : delay), std::move(fn));
}

bool VirtualClock::cancel(TimerId id) {
    std::lock_guard lock(mutex_);
    auto it = index_.find(id);
    if (it == index_.end()) return false;
    timers_.erase(it->second);
    index_.erase(it);
    return true;
}

std::optional<VirtualTime> VirtualClock::next_due() const {
    std::lock_guard lock(mutex_);
    if (timers_.empty()) return std::nullopt;
    return timers_.begin()->first.first;
}

std::size_t VirtualClock::pending() const {
    std::lock_guard lock(mutex_);
    return timers_.size();
}

bool VirtualClock::run_next() {
    std::function<void()> fn;
    {
        std::lock_guard lock(mutex_);
        if (timers_.empty()) return false;
        auto it = timers_.begin();
        now_ = it->first.first;
        fn = std::move(it->second);
        index_.erase(it->first.second);
        timers_.erase(it);
    }
    fn();
    return true;
}

void VirtualClock::advance_to(VirtualTime t) {
    while (true) {
        auto due = next_due();
        if (!due || *due > t) break;
        run_next();
    }
    std::lock_guard lock(mutex_);
    if (t > now_) now_ = t;
}

bool VirtualClock::run_until(const std::function<bool()>& done, VirtualTime deadline) {
    while (!done()) {
        auto due = next_due();
        if (!due || *due > deadline) return false;
        run_next();
    }
    return true;
}

}  // namespace homectx

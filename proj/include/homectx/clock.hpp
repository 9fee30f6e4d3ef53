#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace homectx {

/// Virtual milliseconds. Midnight of the simulated day is 0.
using VirtualTime = std::int64_t;

constexpr VirtualTime kMsPerMinute = 60'000;

std::string format_stamp(VirtualTime t);

/// "07:00", "07:00:30", "07:00:30.250" or a bare millisecond count.
std::optional<VirtualTime> parse_stamp(const std::string& s);

/// Deterministic discrete-event clock. Time only moves forward, and only
/// when the owner drives it; timers due at the same instant fire in
/// scheduling order.
class VirtualClock {
public:
    using TimerId = std::uint64_t;

    explicit VirtualClock(VirtualTime start = 0) : now_(start) {}

    VirtualTime now() const;

    /// Schedules `fn` at `t` (clamped to now). Returns an id usable with cancel.
    TimerId schedule_at(VirtualTime t, std::function<void()> fn);
    TimerId schedule_after(VirtualTime delay, std::function<void()> fn);
    bool cancel(TimerId id);

    std::optional<VirtualTime> next_due() const;
    std::size_t pending() const;

    /// Pops and runs the earliest timer, moving time to its deadline.
    bool run_next();

    /// Runs every timer due at or before `t`, then sets now to `t`.
    void advance_to(VirtualTime t);

    /// Runs timers until `done()` holds or the next timer lies past
    /// `deadline`. Returns done(). Time never exceeds `deadline`.
    bool run_until(const std::function<bool()>& done, VirtualTime deadline);

private:
    using Key = std::pair<VirtualTime, std::uint64_t>;

    mutable std::mutex mutex_;
    VirtualTime now_;
    std::uint64_t next_seq_ = 1;
    std::map<Key, std::function<void()>> timers_;
    std::map<TimerId, Key> index_;
};

}  // namespace homectx

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <unordered_set>
#include <vector>

#include "coexsim/time.hpp"

namespace coexsim {

/// Single-threaded discrete-event engine. One engine per simulation run;
/// independent runs may execute on separate threads with no shared state.
class Engine {
public:
    using EventFn = std::function<void()>;
    using Handle = std::uint64_t;

    SimTime now() const { return now_; }

    /// Queues `fn` for delivery at `at`. Events with equal fire time are
    /// delivered in schedule order. Throws PastTimeError if at < now().
    Handle schedule_at(SimTime at, EventFn fn);
    Handle schedule_in(SimTime delay, EventFn fn) { return schedule_at(now_ + delay, std::move(fn)); }

    /// Drops a pending event; no effect if it already fired.
    void cancel(Handle handle);

    /// Repeats `fn(now)` every `period` starting at `first` while it returns true.
    void repeat(SimTime first, SimTime period, std::function<bool(SimTime)> fn);

    /// Delivers every event with fire_at <= t_end; leaves the clock at t_end.
    SimTime run_until(SimTime t_end);

    std::size_t pending() const { return queue_.size() - cancelled_.size(); }

private:
    struct Queued {
        SimTime fire_at;
        Handle handle;
        // shared_ptr keeps the comparator-driven priority_queue copies cheap
        std::shared_ptr<EventFn> fn;
    };
    struct Later {
        bool operator()(const Queued& a, const Queued& b) const {
            if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
            return a.handle > b.handle;
        }
    };

    SimTime now_;
    Handle next_handle_ = 1;
    std::priority_queue<Queued, std::vector<Queued>, Later> queue_;
    std::unordered_set<Handle> cancelled_;
};

}  // namespace coexsim

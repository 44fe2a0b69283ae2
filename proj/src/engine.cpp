#include "coexsim/engine.hpp"

#include "coexsim/errors.hpp"

namespace coexsim {

Engine::Handle Engine::schedule_at(SimTime at, EventFn fn) {
    if (at < now_) {
        throw PastTimeError("schedule: fire_at " + format_duration(at) + " is before now " +
                            format_duration(now_));
    }
    const Handle handle = next_handle_++;
    queue_.push(Queued{at, handle, std::make_shared<EventFn>(std::move(fn))});
    return handle;
}

void Engine::cancel(Handle handle) {
    if (handle != 0 && handle < next_handle_) cancelled_.insert(handle);
}

void Engine::repeat(SimTime first, SimTime period, std::function<bool(SimTime)> fn) {
    auto shared = std::make_shared<std::function<bool(SimTime)>>(std::move(fn));
    // Self-rescheduling tick; stops when the callback returns false.
    struct Tick {
        Engine* engine;
        SimTime period;
        std::shared_ptr<std::function<bool(SimTime)>> fn;
        void operator()() const {
            if ((*fn)(engine->now())) {
                engine->schedule_at(engine->now() + period, Tick{engine, period, fn});
            }
        }
    };
    schedule_at(first, Tick{this, period, shared});
}

SimTime Engine::run_until(SimTime t_end) {
    if (t_end < now_) {
        throw PastTimeError("run_until: t_end is before now");
    }
    while (!queue_.empty() && queue_.top().fire_at <= t_end) {
        Queued ev = queue_.top();
        queue_.pop();
        if (auto it = cancelled_.find(ev.handle); it != cancelled_.end()) {
            cancelled_.erase(it);
            continue;
        }
        now_ = ev.fire_at;
        (*ev.fn)();
    }
    now_ = t_end;
    return now_;
}

}  // namespace coexsim

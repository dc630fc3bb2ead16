#include "isokern/engine.hpp"

#include <string>
#include <utility>

#include "isokern/errors.hpp"

namespace isokern {

Engine::Engine(SimConfig config) : config_(std::move(config)) {
    config_.validate();
}

EventHandle Engine::schedule(SimTime fire_at, Action action) {
    if (fire_at < clock_)
        throw CausalityError("schedule: fire time " + std::to_string(fire_at.ns) +
                             " precedes clock " + std::to_string(clock_.ns));
    std::uint64_t seq = next_seq_++;
    queue_.push(Entry{fire_at, seq, std::move(action)});
    live_.insert(seq);
    return seq;
}

bool Engine::cancel(EventHandle h) {
    if (live_.erase(h) == 0) return false;  // unknown or already fired
    cancelled_.insert(h);
    return true;
}

std::size_t Engine::run_until(SimTime t) {
    if (t < clock_)
        throw CausalityError("run_until: target " + std::to_string(t.ns) +
                             " precedes clock " + std::to_string(clock_.ns));
    std::size_t dispatched = 0;
    while (!queue_.empty() && queue_.top().at <= t) {
        Entry e = queue_.top();
        queue_.pop();
        if (cancelled_.erase(e.seq) > 0) continue;
        live_.erase(e.seq);
        clock_ = e.at;
        log_.push_back(DispatchRecord{e.at, e.seq});
        ++dispatched;
        e.action();
    }
    clock_ = t;
    return dispatched;
}

}  // namespace isokern

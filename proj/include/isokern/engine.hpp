#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "isokern/config.hpp"
#include "isokern/rng.hpp"
#include "isokern/time.hpp"

namespace isokern {

using EventHandle = std::uint64_t;

struct DispatchRecord {
    SimTime at;
    std::uint64_t seq;

    bool operator==(const DispatchRecord&) const = default;
};

// Discrete-event core. Events fire in (time, insertion order); an action may
// schedule further events at or after the current clock. Single-threaded by
// design: determinism comes from the total dispatch order, and all model
// randomness is drawn from labeled streams derived from one seed.
class Engine {
  public:
    using Action = std::function<void()>;

    explicit Engine(SimConfig config);

    SimTime now() const { return clock_; }
    const SimConfig& config() const { return config_; }

    // Schedules an action; fire_at must not precede the current clock.
    // The handle can cancel the event any time before it fires.
    EventHandle schedule(SimTime fire_at, Action action);

    // True if the event existed and had not fired yet.
    bool cancel(EventHandle h);

    // Dispatches every event with fire_at <= t, advances the clock to t, and
    // returns the number of events dispatched. t must not precede the clock.
    std::size_t run_until(SimTime t);

    RngStream stream(std::string_view label) const {
        return derive_stream(config_.seed, label);
    }

    std::size_t pending() const { return live_.size(); }
    const std::vector<DispatchRecord>& dispatch_log() const { return log_; }

  private:
    struct Entry {
        SimTime at;
        std::uint64_t seq;
        Action action;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.at != b.at) return b.at < a.at;
            return b.seq < a.seq;
        }
    };

    SimConfig config_;
    SimTime clock_;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    std::unordered_set<std::uint64_t> live_;
    std::unordered_set<std::uint64_t> cancelled_;
    std::vector<DispatchRecord> log_;
};

}  // namespace isokern

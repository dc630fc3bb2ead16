#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

enum class InterferenceKind : std::uint8_t {
    IpiHandle,
    KernelTaskExec,
    ContextSwitch,
    TlbFlush,
    TlbMissBurst,
    LockBlock,
    SeqlockRetry,
    CrossFlushWarning,
};

inline constexpr std::size_t kInterferenceKindCount = 8;

std::string_view to_string(InterferenceKind k);
std::optional<InterferenceKind> interference_kind_from_string(std::string_view s);

struct InterferenceEvent {
    SimTime at;
    InterferenceKind kind;
    CoreId victim;
    CoreId origin;
    SimTime duration;

    bool operator==(const InterferenceEvent&) const = default;
};

// Append-only record of every modeled disturbance. Aggregates are maintained
// incrementally but always recomputable from the raw log; tests rely on that.
//
// The ledger also tracks per-core occupancy: each recorded event with a
// nonzero duration occupies its victim for [max(at, prev_busy), ... + duration).
// Probe latency is defined purely in terms of these busy intervals.
class Ledger {
  public:
    explicit Ledger(std::uint32_t num_cores);

    void record(const InterferenceEvent& ev);

    std::span<const InterferenceEvent> log() const { return log_; }
    std::uint64_t total_count() const { return log_.size(); }
    std::uint64_t count(InterferenceKind k) const {
        return kind_counts_[static_cast<std::size_t>(k)];
    }

    // Total duration charged to a core, i.e. time stolen from whatever it
    // would otherwise run.
    SimTime stolen_time(CoreId victim) const { return stolen_[victim.value]; }

    // End of the occupancy chain on a core so far.
    SimTime busy_until(CoreId c) const { return busy_until_[c.value]; }

    std::uint64_t cross_partition_count(const Partition& p,
                                        std::optional<InterferenceKind> kind = {}) const;

    void write_csv(std::ostream& out) const;

  private:
    std::vector<InterferenceEvent> log_;
    std::array<std::uint64_t, kInterferenceKindCount> kind_counts_{};
    std::vector<SimTime> stolen_;
    std::vector<SimTime> busy_until_;
};

struct LatencyHistogram {
    SimTime bucket_width;
    std::map<std::uint64_t, std::uint64_t> counts;  // bucket index -> samples
    std::optional<SimTime> max_observed;

    std::uint64_t total() const;
};

LatencyHistogram make_histogram(std::span<const SimTime> samples,
                                SimTime bucket_width = microseconds(1));

}  // namespace isokern

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isokern/asid.hpp"
#include "isokern/config.hpp"
#include "isokern/ledger.hpp"
#include "isokern/netdev.hpp"
#include "isokern/timekeep.hpp"
#include "isokern/workqueue.hpp"

namespace isokern {

enum class WorkloadKind : std::uint8_t {
    KWorkqueue,
    UThread,
    UFork,
    NicChurn,
    TimerStorm,
    VmStress,
};

std::string_view to_string(WorkloadKind k);
std::optional<WorkloadKind> workload_kind_from_string(std::string_view s);

struct WorkloadSpec {
    WorkloadKind kind;
    CoreId core;            // must be non-isolated
    double rate_per_sec = 1000.0;
};

struct ProbeConfig {
    std::vector<CoreId> cores;  // must all be isolated
    SimTime period = microseconds(50);
    std::uint32_t threads_per_core = 1;
};

struct MechanismConfig {
    AsidMode asid_mode = AsidMode::Shared;
    std::uint32_t asid_capacity = 256;
    std::uint32_t asid_isolated_quota = 128;
    ActivationPolicy workqueue_policy = ActivationPolicy::Baseline;
    SeqlockVariant seqlock_variant = SeqlockVariant::Baseline;
    FlushPolicy flush_policy = FlushPolicy::Baseline;
    bool vmstat_scoped = false;
    SimTime tick_period = milliseconds(1);
    SimTime seqlock_baseline_section = nanoseconds(800);
    SimTime seqlock_compressed_section = nanoseconds(200);

    // Same knobs, all buggy / all repaired variants.
    MechanismConfig with_fixes(bool on) const;
};

struct Scenario {
    std::string name;
    std::vector<WorkloadSpec> workloads;
    ProbeConfig probe;
    MechanismConfig mechanisms;
};

// One wake-latency series per probe thread. `scheduled` are the nominal wake
// instants; `samples` the measured delays, index-aligned.
struct ProbeSeries {
    CoreId core;
    std::uint32_t thread = 0;
    std::vector<SimTime> scheduled;
    std::vector<SimTime> samples;
};

struct RunResult {
    Ledger ledger;
    std::vector<ProbeSeries> probes;
    std::vector<WakeRecord> wake_log;
    std::uint64_t warnings = 0;
    std::uint64_t rejected_work = 0;

    std::vector<SimTime> all_samples() const;
    SimTime max_latency() const;
};

// Drives the configured workloads and probe threads through one simulation.
// Workload arrival times depend only on (seed, workload index), never on the
// mechanism variants, so baseline and fixed runs of the same scenario are
// directly comparable sample by sample.
RunResult run_scenario(const Scenario& sc, const SimConfig& config);

struct ProbeStats {
    SimTime min;
    SimTime max;
    double avg_ns = 0.0;
    LatencyHistogram hist;
};

// Errors on an empty sample set.
ProbeStats probe_stats(std::span<const SimTime> samples,
                       SimTime bucket_width = microseconds(1));

// Busy intervals on one core, rebuilt from ledger events in record order with
// the same chaining rule the ledger uses. The wake latency of a probe
// scheduled at T is the distance from T to the first instant the chain leaves
// the core idle.
std::vector<std::pair<SimTime, SimTime>> busy_intervals(
    std::span<const InterferenceEvent> log, CoreId core);
SimTime wake_latency(const std::vector<std::pair<SimTime, SimTime>>& intervals, SimTime at);

// Canned setups used by the command-line tool and the test suite.
SimConfig canned_config(std::uint64_t seed, SimTime horizon = seconds(1));
Scenario canned_ufork_stress();
Scenario canned_kworkqueue();
Scenario canned_full_stress();
Scenario canned_idle();

}  // namespace isokern

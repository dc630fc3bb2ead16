#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "isokern/rng.hpp"

namespace isokern::sched {

// All task parameters are integer microseconds; analyses run in exact
// integer arithmetic. Utilization appears as double only at the interface.

enum class ResourceRole : std::uint8_t { Mutex, Reader, Writer };

struct ResourceUse {
    ResourceRole role = ResourceRole::Mutex;
    std::uint32_t requests_per_period = 1;
    std::int64_t cs_length_us = 100;
};

struct Task {
    std::int64_t wcet_us = 0;
    std::int64_t period_us = 0;
    std::int64_t deadline_us = 0;
    std::int64_t jitter_us = 0;
    int priority = 0;  // lower value = higher priority
    std::optional<ResourceUse> resource;

    double utilization() const {
        return static_cast<double>(wcet_us) / static_cast<double>(period_us);
    }
};

struct TaskSet {
    std::vector<Task> tasks;
    std::uint32_t num_cores = 1;
    std::vector<int> assignment;  // task -> core, -1 while unassigned

    double total_utilization() const;
};

// Utilization vector uniform on the simplex {u_i >= 0, sum = total} clipped
// to u_i <= 1, via the fixed-sum decomposition (Stafford's construction).
// Plain rejection is hopeless here: for large n and total the chance that no
// coordinate exceeds 1 is nearly zero.
std::vector<double> rand_fixed_sum(std::uint32_t n, double total, RngStream& rng);

// n tasks with the given total utilization; log-uniform periods from
// [period_lo_us, period_hi_us] snapped to a 10 us grid, implicit deadlines,
// wcet = round(u * T) floored at 1 us. total must not exceed n.
TaskSet generate_taskset(std::uint32_t n, double total_util, std::int64_t period_lo_us,
                         std::int64_t period_hi_us, RngStream& rng);

// Worst-fit decreasing by utilization onto ts.num_cores cores. Returns false
// if some task cannot fit under per-core utilization <= 1; assignment is
// filled either way (-1 for the tasks that did not fit).
bool partition_tasks(TaskSet& ts);

// Assigns rate-monotonic priorities within each core (ties by index).
void assign_rm_priorities(TaskSet& ts);

struct RtaResult {
    bool schedulable = false;
    std::vector<std::int64_t> response_us;  // -1 where the recurrence diverged
};

// Response-time analysis for preemptive fixed-priority scheduling on one
// core, with release jitter and an optional per-task blocking term:
//   w = C_i + B_i + sum_{j in hp(i)} ceil((w + J_j) / T_j) * C_j
//   R_i = J_i + w, schedulable iff w <= D_i - J_i for every task.
RtaResult rta_fixed_priority(std::span<const Task> tasks,
                             std::span<const std::int64_t> blocking_us = {});

// Processor-demand criterion for preemptive EDF on one core, jitter folded in
// as a deadline reduction: demand(t) = sum max(0, floor((t-(D_i-J_i))/T_i)+1)*C_i.
bool edf_test(std::span<const Task> tasks);

struct BlockingTerm {
    std::int64_t spin_inflation_us = 0;    // added to the task's wcet
    std::int64_t arrival_blocking_us = 0;  // B term in the response recurrence
};

// FIFO spin lock (queue-based) blocking for one global resource: each request
// spins behind at most one critical section per other contending core, and a
// task with lower-priority local contenders eats one extra section of arrival
// blocking.
std::vector<BlockingTerm> mcs_blocking(const TaskSet& ts);

// Phase-fair reader-writer lock: a reader waits at most one writer phase plus
// one reader phase (one reader phase if no writer contends at all); a writer
// waits at most one section per other contending core.
std::vector<BlockingTerm> rw_blocking(const TaskSet& ts);

enum class ExperimentKind : std::uint8_t { FixedPriority, Edf, McsLock, RwLock };

std::string_view to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_kind_from_string(std::string_view s);

struct CurvePoint {
    double util = 0.0;  // normalized (per-core) utilization
    double fraction = 0.0;
};

struct SchedCurve {
    std::vector<CurvePoint> points;
    double sua = 0.0;
};

// Area under a schedulability curve, trapezoidal over the utilization axis.
double curve_area(std::span<const CurvePoint> points);

struct ExperimentParams {
    ExperimentKind kind = ExperimentKind::FixedPriority;
    std::vector<std::int64_t> jitters_us{104, 48, 12};
    std::uint32_t cores = 20;
    std::uint32_t tasks = 40;
    std::vector<double> utils;  // normalized per-core utilization levels
    std::uint32_t sets_per_point = 500;
    std::uint64_t seed = 1;
    std::int64_t period_lo_us = 10000;
    std::int64_t period_hi_us = 100000;
};

struct ExperimentResult {
    std::map<std::int64_t, SchedCurve> curves;  // keyed by jitter
    // verdicts[jitter][util_index][set] — kept so callers can check per-set
    // relations between jitter levels.
    std::map<std::int64_t, std::vector<std::vector<bool>>> verdicts;
};

// Generates sets_per_point task sets per utilization level (same sets for
// every jitter level), partitions them, applies lock blocking when the kind
// asks for it, and runs the per-core test.
ExperimentResult schedulability_experiment(const ExperimentParams& params);

std::vector<double> util_grid(double lo, double hi, double step);

// Default grids: broad high-load sweep for the scheduler experiments,
// moderate loads for the lock experiments where blocking dominates.
std::vector<double> default_utils(ExperimentKind kind);

}  // namespace isokern::sched

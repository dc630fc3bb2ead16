#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "isokern/config.hpp"
#include "isokern/ledger.hpp"
#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

enum class ActivationPolicy : std::uint8_t { Baseline, Restricted };
enum class SpreadPolicy : std::uint8_t { Baseline, IsolationAware };

struct WorkItem {
    SimTime cost;
    CoreId target;
};

struct WorkQueue {
    std::uint64_t id = 0;
    int max_active = 1;
    std::vector<std::deque<WorkItem>> pending;  // by core id
};

enum class QueueResult : std::uint8_t {
    Executed,
    // Restricted policy refused a cross-partition submission. Nothing was
    // enqueued and no IPI was sent; callers decide whether that is fatal.
    RejectedCrossPartition,
};

struct WakeRecord {
    CoreId core;
    std::size_t pending_at_wake;
};

// Kernel work execution model. Waking a worker costs its core an IPI; if the
// wake finds queued items the worker switches in, runs them, and switches
// back out, each step ledgered against the target core.
class WorkQueueManager {
  public:
    WorkQueueManager(const Partition& part, const CostModel& costs, Ledger& ledger);

    // Baseline kicks an (empty) worker on every core on creation; Restricted
    // wakes nobody.
    WorkQueue alloc_workqueue(ActivationPolicy policy, CoreId caller, SimTime at);

    QueueResult queue_work(WorkQueue& wq, const WorkItem& item, ActivationPolicy policy,
                           CoreId caller, SimTime at);

    // Propagates a max_active change. Baseline wakes a worker on every core
    // whether or not it has anything to do; Restricted wakes only cores that
    // hold pending items and sit in the caller's partition. Returns the woken
    // cores.
    std::vector<CoreId> adjust_max_active(WorkQueue& wq, int new_max, ActivationPolicy policy,
                                          CoreId caller, SimTime at);

    const std::vector<WakeRecord>& wake_log() const { return wake_log_; }

  private:
    void wake(WorkQueue& wq, CoreId core, CoreId caller, SimTime at);

    const Partition& part_;
    const CostModel& costs_;
    Ledger& ledger_;
    std::uint64_t next_id_ = 1;
    std::vector<WakeRecord> wake_log_;
};

// Spread-able core selection for per-CPU resources. Baseline indexes the
// online list directly; the isolation-aware variant only falls back to
// isolated cores when no non-isolated core is online.
CoreId select_spread_core(std::uint64_t hint, const std::vector<CoreId>& online,
                          const Partition& part, SpreadPolicy policy);

// IRQ affinity target list. An explicit user list wins verbatim (empty is an
// error); with no user list, isolated cores are excluded.
std::vector<CoreId> irq_balance_targets(const std::optional<std::vector<CoreId>>& user_list,
                                        const Partition& part);

}  // namespace isokern

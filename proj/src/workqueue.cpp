#include "isokern/workqueue.hpp"

#include <algorithm>

#include "isokern/errors.hpp"

namespace isokern {

WorkQueueManager::WorkQueueManager(const Partition& part, const CostModel& costs, Ledger& ledger)
    : part_(part), costs_(costs), ledger_(ledger) {}

void WorkQueueManager::wake(WorkQueue& wq, CoreId core, CoreId caller, SimTime at) {
    auto& pending = wq.pending[core.value];
    wake_log_.push_back(WakeRecord{core, pending.size()});
    ledger_.record({at, InterferenceKind::IpiHandle, core, caller, costs_.ipi_handle()});
    if (pending.empty()) return;  // spurious: worker checks its queue and goes back to sleep
    ledger_.record({at, InterferenceKind::ContextSwitch, core, caller, costs_.ctx_switch()});
    while (!pending.empty()) {
        WorkItem item = pending.front();
        pending.pop_front();
        ledger_.record({at, InterferenceKind::KernelTaskExec, core, caller, item.cost});
    }
    ledger_.record({at, InterferenceKind::ContextSwitch, core, caller, costs_.ctx_switch()});
}

WorkQueue WorkQueueManager::alloc_workqueue(ActivationPolicy policy, CoreId caller, SimTime at) {
    WorkQueue wq;
    wq.id = next_id_++;
    wq.pending.resize(part_.num_cores());
    if (policy == ActivationPolicy::Baseline) {
        for (CoreId c : part_.all()) wake(wq, c, caller, at);
    }
    return wq;
}

QueueResult WorkQueueManager::queue_work(WorkQueue& wq, const WorkItem& item,
                                         ActivationPolicy policy, CoreId caller, SimTime at) {
    if (item.target.value >= part_.num_cores())
        throw ConfigError("workqueue: target core out of range");
    if (policy == ActivationPolicy::Restricted &&
        part_.is_isolated(item.target) != part_.is_isolated(caller))
        return QueueResult::RejectedCrossPartition;
    wq.pending[item.target.value].push_back(item);
    wake(wq, item.target, caller, at);
    return QueueResult::Executed;
}

std::vector<CoreId> WorkQueueManager::adjust_max_active(WorkQueue& wq, int new_max,
                                                        ActivationPolicy policy, CoreId caller,
                                                        SimTime at) {
    wq.max_active = new_max;
    std::vector<CoreId> woken;
    for (CoreId c : part_.all()) {
        bool wake_it;
        if (policy == ActivationPolicy::Baseline) {
            wake_it = true;
        } else {
            wake_it = !wq.pending[c.value].empty() &&
                      part_.is_isolated(c) == part_.is_isolated(caller);
        }
        if (wake_it) {
            wake(wq, c, caller, at);
            woken.push_back(c);
        }
    }
    return woken;
}

CoreId select_spread_core(std::uint64_t hint, const std::vector<CoreId>& online,
                          const Partition& part, SpreadPolicy policy) {
    if (online.empty()) throw ConfigError("spread: no core online");
    std::vector<CoreId> sorted = online;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (policy == SpreadPolicy::Baseline)
        return sorted[hint % sorted.size()];
    std::vector<CoreId> preferred;
    for (CoreId c : sorted)
        if (!part.is_isolated(c)) preferred.push_back(c);
    if (preferred.empty()) return sorted[hint % sorted.size()];  // only isolated cores left
    return preferred[hint % preferred.size()];
}

std::vector<CoreId> irq_balance_targets(const std::optional<std::vector<CoreId>>& user_list,
                                        const Partition& part) {
    if (user_list) {
        if (user_list->empty()) throw ConfigError("irq balance: user target list is empty");
        std::vector<CoreId> sorted = *user_list;
        for (CoreId c : sorted)
            if (c.value >= part.num_cores())
                throw ConfigError("irq balance: core out of range");
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        return sorted;
    }
    return part.non_isolated();
}

}  // namespace isokern

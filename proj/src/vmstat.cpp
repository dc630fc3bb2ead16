#include "isokern/vmstat.hpp"

#include <algorithm>

#include "isokern/errors.hpp"

namespace isokern {

StatCounters::StatCounters(std::uint32_t num_cores) : per_core_(num_cores) {}

void StatCounters::add_delta(CoreId core, const std::string& name, std::int64_t v) {
    if (core.value >= per_core_.size()) throw ConfigError("vmstat: delta core out of range");
    per_core_[core.value][name] += v;
}

void StatCounters::fold_core(CoreId core) {
    auto& deltas = per_core_[core.value];
    for (const auto& [name, v] : deltas) global_[name] += v;
    deltas.clear();
}

std::int64_t StatCounters::global(const std::string& name) const {
    auto it = global_.find(name);
    return it == global_.end() ? 0 : it->second;
}

const std::map<std::string, std::int64_t>& StatCounters::core_deltas(CoreId core) const {
    return per_core_[core.value];
}

std::int64_t StatCounters::logical_total(const std::string& name) const {
    std::int64_t total = global(name);
    for (const auto& deltas : per_core_) {
        auto it = deltas.find(name);
        if (it != deltas.end()) total += it->second;
    }
    return total;
}

VmstatShepherd::VmstatShepherd(const Partition& part, const CostModel& costs, Ledger& ledger)
    : part_(part), costs_(costs), ledger_(ledger) {}

void VmstatShepherd::fold_one(StatCounters& stats, CoreId core, CoreId caller, SimTime at) {
    // The fold runs as a kernel task on the target core regardless of whether
    // any delta is outstanding there.
    ledger_.record({at, InterferenceKind::KernelTaskExec, core, caller, costs_.ctx_switch()});
    stats.fold_core(core);
}

std::vector<CoreId> VmstatShepherd::shepherd_baseline(StatCounters& stats, CoreId caller,
                                                      SimTime at) {
    std::vector<CoreId> touched = part_.all();
    for (CoreId c : touched) fold_one(stats, c, caller, at);
    return touched;
}

std::vector<CoreId> VmstatShepherd::shepherd_scoped(StatCounters& stats, CoreId caller,
                                                    const std::vector<CoreId>& subset,
                                                    SimTime at) {
    if (std::find(subset.begin(), subset.end(), caller) == subset.end())
        throw ConfigError("vmstat: shepherd caller " + std::to_string(caller.value) +
                          " is not a member of its own scope");
    for (CoreId c : subset)
        if (c.value >= part_.num_cores()) throw ConfigError("vmstat: scope core out of range");
    for (CoreId c : subset) fold_one(stats, c, caller, at);
    return subset;
}

}  // namespace isokern

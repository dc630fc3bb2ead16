#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "isokern/config.hpp"
#include "isokern/ledger.hpp"
#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

// Per-core statistics deltas folded into global counters by a periodic
// shepherd. Only the folding policy differs between variants; the arithmetic
// is identical, so the sum of global and outstanding per-core values is
// conserved either way.
class StatCounters {
  public:
    explicit StatCounters(std::uint32_t num_cores);

    void add_delta(CoreId core, const std::string& name, std::int64_t v);
    void fold_core(CoreId core);

    std::int64_t global(const std::string& name) const;
    const std::map<std::string, std::int64_t>& core_deltas(CoreId core) const;

    // Global value plus all outstanding per-core deltas, i.e. the true count.
    std::int64_t logical_total(const std::string& name) const;

    std::uint32_t num_cores() const { return static_cast<std::uint32_t>(per_core_.size()); }

  private:
    std::vector<std::map<std::string, std::int64_t>> per_core_;
    std::map<std::string, std::int64_t> global_;
};

class VmstatShepherd {
  public:
    VmstatShepherd(const Partition& part, const CostModel& costs, Ledger& ledger);

    // Folds every core, isolated or not; each fold runs as a kernel task on
    // the target core. Returns the touched cores.
    std::vector<CoreId> shepherd_baseline(StatCounters& stats, CoreId caller, SimTime at);

    // Folds only the given subset. The caller must be a member of the subset;
    // anything else is a configuration error.
    std::vector<CoreId> shepherd_scoped(StatCounters& stats, CoreId caller,
                                        const std::vector<CoreId>& subset, SimTime at);

  private:
    void fold_one(StatCounters& stats, CoreId core, CoreId caller, SimTime at);

    const Partition& part_;
    const CostModel& costs_;
    Ledger& ledger_;
};

}  // namespace isokern

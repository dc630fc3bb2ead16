#include "isokern/config.hpp"

#include "isokern/errors.hpp"

namespace isokern {

void CostModel::validate() const {
    if (ipi_handle_ns == 0 || ctx_switch_ns == 0 || tlb_flush_ns == 0 ||
        tlb_refill_per_entry_ns == 0 || working_set_entries == 0 || lock_spin_quantum_ns == 0)
        throw ConfigError("cost model: every cost must be positive");
}

void SimConfig::validate() const {
    costs.validate();
    if (num_cores() < 2) throw ConfigError("config: need at least two cores");
    if (partition.isolated().empty() || partition.non_isolated().empty())
        throw ConfigError("config: both partitions must be non-empty");
    if (horizon.ns > (1ull << 63)) throw ConfigError("config: horizon exceeds 2^63 ns");
    if (horizon.ns == 0) throw ConfigError("config: horizon must be positive");
}

}  // namespace isokern

#pragma once

#include <cstdint>

#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

// Per-event costs charged by the mechanism models. These are tunable inputs,
// not measurements; every figure derived from them is relative to this table.
struct CostModel {
    std::uint64_t ipi_handle_ns = 2000;
    std::uint64_t ctx_switch_ns = 3000;
    std::uint64_t tlb_flush_ns = 5000;
    std::uint64_t tlb_refill_per_entry_ns = 50;
    std::uint64_t working_set_entries = 64;
    std::uint64_t lock_spin_quantum_ns = 100;

    void validate() const;

    SimTime ipi_handle() const { return SimTime{ipi_handle_ns}; }
    SimTime ctx_switch() const { return SimTime{ctx_switch_ns}; }
    SimTime tlb_flush() const { return SimTime{tlb_flush_ns}; }
    SimTime tlb_refill_burst() const {
        return SimTime{tlb_refill_per_entry_ns * working_set_entries};
    }
    SimTime lock_spin_quantum() const { return SimTime{lock_spin_quantum_ns}; }
};

struct SimConfig {
    Partition partition;
    std::uint64_t seed = 1;
    SimTime horizon;
    CostModel costs;

    std::uint32_t num_cores() const { return partition.num_cores(); }
    void validate() const;
};

}  // namespace isokern

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "isokern/config.hpp"
#include "isokern/ledger.hpp"
#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

enum class AsidMode : std::uint8_t { Shared, Partitioned };

enum class HomePartition : std::uint8_t { NonIsolated, Isolated };

struct AsidConfig {
    std::uint32_t capacity = 256;
    AsidMode mode = AsidMode::Shared;
    // Partitioned mode: ids [0, isolated_quota) serve isolated cores,
    // [isolated_quota, capacity) serve the rest. Ignored in Shared mode.
    std::uint32_t isolated_quota = 128;

    void validate() const;
};

struct AsidOutcome {
    std::uint32_t asid = 0;
    bool reused = false;
    bool rolled_over = false;
    bool tlb_flushed = false;
    SimTime lock_wait;
};

// Lazy address-space-id allocator with generation rollover, modeled after the
// arm64 scheme: a process keeps its id until the generation it was allocated
// in expires. Allocation takes a FIFO spin lock; a rollover bumps the
// generation, re-reserves the ids of processes currently on a core, and marks
// every served core for a TLB flush that is paid at its next context switch.
//
// In Partitioned mode isolated and non-isolated cores draw from disjoint id
// ranges with independent generations and locks, so nothing a non-isolated
// core does can mark or block an isolated one.
class AsidManager {
  public:
    AsidManager(AsidConfig cfg, const Partition& part, const CostModel& costs, Ledger& ledger);

    std::uint64_t create_process(HomePartition home);
    void exit_process(std::uint64_t pid);

    // Switches `pid` in on `core` at time `at`. Fast path when the process
    // generation is current; otherwise takes the space lock and allocates
    // (rolling the generation over if the range is full). Any pending flush
    // tag on the core is consumed here and its cost ledgered.
    AsidOutcome context_switch(std::uint64_t pid, CoreId core, SimTime at);

    // Marks the core as running nothing (process slept or yielded). Rollovers
    // only re-reserve ids of processes on a core at that moment.
    void deschedule(CoreId core);

    // Full observable state, for equivalence checks against a reference model.
    struct SpaceState {
        std::uint64_t generation;
        std::vector<bool> allocated;             // index 0 = first id of the range
        std::vector<bool> flush_pending;         // by core id
        std::vector<std::uint32_t> flush_origin; // by core id, valid where pending
        bool operator==(const SpaceState&) const = default;
    };
    struct ProcessState {
        std::optional<std::uint32_t> asid;
        std::uint64_t generation;
        HomePartition home;
        bool operator==(const ProcessState&) const = default;
    };
    struct Snapshot {
        std::vector<SpaceState> spaces;  // one entry in Shared mode, two in Partitioned
        std::map<std::uint64_t, ProcessState> processes;
        std::vector<std::optional<std::uint64_t>> running;  // by core id
        bool operator==(const Snapshot&) const = default;
    };
    Snapshot snapshot() const;

  private:
    struct Hold {
        SimTime start;
        SimTime end;
        CoreId core;
    };
    struct Space {
        std::uint32_t lo = 0;
        std::uint32_t hi = 0;
        std::uint64_t generation = 1;
        std::vector<bool> allocated;
        std::vector<bool> flush_pending;          // by core id; only served cores used
        std::vector<std::uint32_t> flush_origin;  // by core id
        std::vector<CoreId> serving;
        SimTime lock_busy_until;
        std::deque<Hold> holds;
    };

    struct Proc {
        std::optional<std::uint32_t> asid;
        std::uint64_t generation = 0;  // 0 = never allocated
        HomePartition home;
    };

    Space& space_for(HomePartition home);
    SimTime lock_acquire(Space& sp, CoreId core, SimTime at);
    void rollover(Space& sp, CoreId origin, SimTime at);
    void consume_flush(Space& sp, CoreId core, SimTime at, AsidOutcome& out);

    AsidConfig cfg_;
    const Partition& part_;
    const CostModel& costs_;
    Ledger& ledger_;
    std::vector<Space> spaces_;
    std::map<std::uint64_t, Proc> procs_;
    std::vector<std::optional<std::uint64_t>> running_;
    std::uint64_t next_pid_ = 1;
};

}  // namespace isokern

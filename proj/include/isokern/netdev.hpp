#pragma once

#include <cstdint>
#include <vector>

#include "isokern/config.hpp"
#include "isokern/ledger.hpp"
#include "isokern/time.hpp"
#include "isokern/topology.hpp"

namespace isokern {

enum class FlushPolicy : std::uint8_t { Baseline, OnDemand };

struct Nic {
    std::uint64_t id = 0;
    bool installed = false;
    std::vector<std::uint64_t> backlog;  // queued packets by core id
};

struct UninstallResult {
    std::vector<CoreId> flushed;
    std::uint32_t warnings = 0;
    std::uint64_t packets_flushed = 0;
};

// Device teardown model. Removing a NIC must drain per-core receive backlogs.
// Baseline flushes every core unconditionally; each remote flush lands as an
// IPI plus a kernel task on the victim. OnDemand skips cores with nothing
// queued, and when a non-isolated caller finds packets stranded on an
// isolated core it records a warning instead of disturbing that core.
class NicManager {
  public:
    NicManager(const Partition& part, const CostModel& costs, Ledger& ledger);

    Nic install_nic();
    void enqueue_packet(Nic& nic, CoreId core, std::uint64_t n);
    UninstallResult uninstall(Nic& nic, CoreId caller, FlushPolicy policy, SimTime at);

  private:
    void remote_flush(CoreId victim, CoreId caller, SimTime at);

    const Partition& part_;
    const CostModel& costs_;
    Ledger& ledger_;
    std::uint64_t next_id_ = 1;
};

}  // namespace isokern

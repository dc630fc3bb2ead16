#include "isokern/netdev.hpp"

#include "isokern/errors.hpp"

namespace isokern {

NicManager::NicManager(const Partition& part, const CostModel& costs, Ledger& ledger)
    : part_(part), costs_(costs), ledger_(ledger) {}

Nic NicManager::install_nic() {
    Nic nic;
    nic.id = next_id_++;
    nic.installed = true;
    nic.backlog.assign(part_.num_cores(), 0);
    return nic;
}

void NicManager::enqueue_packet(Nic& nic, CoreId core, std::uint64_t n) {
    if (!nic.installed) throw ConfigError("netdev: enqueue on uninstalled nic");
    if (core.value >= part_.num_cores()) throw ConfigError("netdev: enqueue core out of range");
    if (n == 0) throw ConfigError("netdev: enqueue of zero packets");
    nic.backlog[core.value] += n;
}

void NicManager::remote_flush(CoreId victim, CoreId caller, SimTime at) {
    ledger_.record({at, InterferenceKind::IpiHandle, victim, caller, costs_.ipi_handle()});
    ledger_.record({at, InterferenceKind::KernelTaskExec, victim, caller, costs_.ctx_switch()});
}

UninstallResult NicManager::uninstall(Nic& nic, CoreId caller, FlushPolicy policy, SimTime at) {
    if (!nic.installed) throw ConfigError("netdev: uninstall of non-installed nic");
    UninstallResult res;
    bool caller_isolated = part_.is_isolated(caller);
    for (CoreId c : part_.all()) {
        std::uint64_t pending = nic.backlog[c.value];
        if (policy == FlushPolicy::Baseline) {
            if (c != caller) remote_flush(c, caller, at);
            res.packets_flushed += pending;
            nic.backlog[c.value] = 0;
            res.flushed.push_back(c);
            continue;
        }
        if (pending == 0) continue;
        if (c == caller) {
            res.packets_flushed += pending;
            nic.backlog[c.value] = 0;
            res.flushed.push_back(c);
            continue;
        }
        if (part_.is_isolated(c) && !caller_isolated) {
            // Packets stranded on an isolated core, teardown driven from the
            // other side: record the anomaly, leave the core alone.
            ledger_.record({at, InterferenceKind::CrossFlushWarning, c, caller, SimTime{0}});
            res.warnings += 1;
            continue;
        }
        remote_flush(c, caller, at);
        res.packets_flushed += pending;
        nic.backlog[c.value] = 0;
        res.flushed.push_back(c);
    }
    nic.installed = false;
    return res;
}

}  // namespace isokern

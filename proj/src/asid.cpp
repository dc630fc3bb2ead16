#include "isokern/asid.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "isokern/errors.hpp"

namespace isokern {

void AsidConfig::validate() const {
    if (capacity < 2) throw ConfigError("asid: capacity must be at least 2");
    if (mode == AsidMode::Partitioned) {
        if (isolated_quota == 0 || isolated_quota >= capacity)
            throw ConfigError("asid: isolated quota must leave both ranges non-empty");
    }
}

AsidManager::AsidManager(AsidConfig cfg, const Partition& part, const CostModel& costs,
                         Ledger& ledger)
    : cfg_(cfg), part_(part), costs_(costs), ledger_(ledger), running_(part.num_cores()) {
    cfg_.validate();
    auto make_space = [&](std::uint32_t lo, std::uint32_t hi, std::vector<CoreId> serving) {
        Space sp;
        sp.lo = lo;
        sp.hi = hi;
        sp.allocated.assign(hi - lo, false);
        sp.flush_pending.assign(part.num_cores(), false);
        sp.flush_origin.assign(part.num_cores(), 0);
        sp.serving = std::move(serving);
        return sp;
    };
    if (cfg_.mode == AsidMode::Shared) {
        spaces_.push_back(make_space(0, cfg_.capacity, part.all()));
    } else {
        spaces_.push_back(make_space(0, cfg_.isolated_quota, part.isolated()));
        spaces_.push_back(make_space(cfg_.isolated_quota, cfg_.capacity, part.non_isolated()));
    }
}

std::uint64_t AsidManager::create_process(HomePartition home) {
    std::uint64_t pid = next_pid_++;
    procs_[pid] = Proc{std::nullopt, 0, home};
    return pid;
}

void AsidManager::exit_process(std::uint64_t pid) {
    auto it = procs_.find(pid);
    if (it == procs_.end()) throw ConfigError("asid: exit of unknown pid " + std::to_string(pid));
    for (auto& r : running_)
        if (r && *r == pid) r.reset();
    // The id itself stays marked in its space: release is lazy, reclaimed
    // only by a generation rollover.
    procs_.erase(it);
}

void AsidManager::deschedule(CoreId core) {
    if (core.value >= running_.size())
        throw ConfigError("asid: deschedule on unknown core " + std::to_string(core.value));
    running_[core.value].reset();
}

AsidManager::Space& AsidManager::space_for(HomePartition home) {
    if (cfg_.mode == AsidMode::Shared) return spaces_[0];
    return home == HomePartition::Isolated ? spaces_[0] : spaces_[1];
}

SimTime AsidManager::lock_acquire(Space& sp, CoreId core, SimTime at) {
    while (!sp.holds.empty() && sp.holds.front().end <= at) sp.holds.pop_front();
    SimTime start = max(at, sp.lock_busy_until);
    SimTime wait = start - at;
    if (wait.ns > 0 && part_.is_isolated(core)) {
        // Blocked behind the current holder and any queued waiters; report it
        // when the other side of the partition is involved.
        for (const Hold& h : sp.holds) {
            if (!part_.is_isolated(h.core)) {
                ledger_.record({at, InterferenceKind::LockBlock, core, h.core, wait});
                break;
            }
        }
    }
    SimTime end = start + costs_.lock_spin_quantum();
    sp.lock_busy_until = end;
    sp.holds.push_back(Hold{start, end, core});
    return start;
}

void AsidManager::rollover(Space& sp, CoreId origin, SimTime at) {
    (void)at;
    std::set<std::uint64_t> live;
    for (CoreId c : sp.serving)
        if (running_[c.value]) live.insert(*running_[c.value]);
    if (live.size() >= sp.allocated.size())
        throw ExhaustionError("asid: " + std::to_string(live.size()) +
                              " running processes exceed capacity " +
                              std::to_string(sp.allocated.size()));
    sp.generation += 1;
    std::fill(sp.allocated.begin(), sp.allocated.end(), false);
    for (std::uint64_t pid : live) {
        Proc& p = procs_.at(pid);
        if (p.asid) {
            sp.allocated[*p.asid - sp.lo] = true;
            p.generation = sp.generation;
        }
    }
    for (CoreId c : sp.serving) {
        if (!sp.flush_pending[c.value]) {
            sp.flush_pending[c.value] = true;
            // Keep the original origin if a flush was already owed: the first
            // cause is the one cross-partition accounting should see.
            sp.flush_origin[c.value] = origin.value;
        }
    }
}

void AsidManager::consume_flush(Space& sp, CoreId core, SimTime at, AsidOutcome& out) {
    if (!sp.flush_pending[core.value]) return;
    sp.flush_pending[core.value] = false;
    CoreId origin{sp.flush_origin[core.value]};
    sp.flush_origin[core.value] = 0;
    out.tlb_flushed = true;
    ledger_.record({at, InterferenceKind::TlbFlush, core, origin, costs_.tlb_flush()});
    ledger_.record({at, InterferenceKind::TlbMissBurst, core, origin, costs_.tlb_refill_burst()});
}

AsidOutcome AsidManager::context_switch(std::uint64_t pid, CoreId core, SimTime at) {
    if (core.value >= part_.num_cores())
        throw ConfigError("asid: switch on unknown core " + std::to_string(core.value));
    auto it = procs_.find(pid);
    if (it == procs_.end())
        throw ConfigError("asid: switch of unknown pid " + std::to_string(pid));
    Proc& proc = it->second;
    if (cfg_.mode == AsidMode::Partitioned) {
        bool core_isolated = part_.is_isolated(core);
        bool home_isolated = proc.home == HomePartition::Isolated;
        if (core_isolated != home_isolated)
            throw ConfigError("asid: pid " + std::to_string(pid) +
                              " scheduled outside its home partition on core " +
                              std::to_string(core.value));
    }
    Space& sp = space_for(proc.home);

    AsidOutcome out;
    if (proc.asid && proc.generation == sp.generation) {
        out.asid = *proc.asid;
        out.reused = true;
        consume_flush(sp, core, at, out);
        running_[core.value] = pid;
        return out;
    }

    SimTime start = lock_acquire(sp, core, at);
    out.lock_wait = start - at;

    auto lowest_free = [&]() -> std::optional<std::uint32_t> {
        for (std::uint32_t i = 0; i < sp.allocated.size(); ++i)
            if (!sp.allocated[i]) return sp.lo + i;
        return std::nullopt;
    };

    std::optional<std::uint32_t> id = lowest_free();
    if (!id) {
        rollover(sp, core, start);
        out.rolled_over = true;
        id = lowest_free();
    }
    sp.allocated[*id - sp.lo] = true;
    proc.asid = *id;
    proc.generation = sp.generation;
    out.asid = *id;

    consume_flush(sp, core, start, out);
    running_[core.value] = pid;
    return out;
}

AsidManager::Snapshot AsidManager::snapshot() const {
    Snapshot snap;
    for (const Space& sp : spaces_) {
        SpaceState st;
        st.generation = sp.generation;
        st.allocated = sp.allocated;
        st.flush_pending = sp.flush_pending;
        st.flush_origin = sp.flush_origin;
        snap.spaces.push_back(std::move(st));
    }
    for (const auto& [pid, p] : procs_)
        snap.processes[pid] = ProcessState{p.asid, p.generation, p.home};
    snap.running = running_;
    return snap;
}

}  // namespace isokern

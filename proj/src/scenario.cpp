#include "isokern/scenario.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "isokern/engine.hpp"
#include "isokern/errors.hpp"
#include "isokern/vmstat.hpp"

namespace isokern {

namespace {
constexpr std::string_view kWorkloadNames[] = {
    "k_workqueue", "u_thread", "u_fork", "nic_churn", "timer_storm", "vm_stress",
};
}

std::string_view to_string(WorkloadKind k) {
    return kWorkloadNames[static_cast<std::size_t>(k)];
}

std::optional<WorkloadKind> workload_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kWorkloadNames); ++i)
        if (kWorkloadNames[i] == s) return static_cast<WorkloadKind>(i);
    return std::nullopt;
}

MechanismConfig MechanismConfig::with_fixes(bool on) const {
    MechanismConfig m = *this;
    m.asid_mode = on ? AsidMode::Partitioned : AsidMode::Shared;
    m.workqueue_policy = on ? ActivationPolicy::Restricted : ActivationPolicy::Baseline;
    m.seqlock_variant = on ? SeqlockVariant::Compressed : SeqlockVariant::Baseline;
    m.flush_policy = on ? FlushPolicy::OnDemand : FlushPolicy::Baseline;
    m.vmstat_scoped = on;
    return m;
}

std::vector<SimTime> RunResult::all_samples() const {
    std::vector<SimTime> out;
    for (const ProbeSeries& s : probes)
        out.insert(out.end(), s.samples.begin(), s.samples.end());
    return out;
}

SimTime RunResult::max_latency() const {
    SimTime m{0};
    for (const ProbeSeries& s : probes)
        for (SimTime v : s.samples) m = max(m, v);
    return m;
}

std::vector<std::pair<SimTime, SimTime>> busy_intervals(std::span<const InterferenceEvent> log,
                                                        CoreId core) {
    std::vector<std::pair<SimTime, SimTime>> out;
    SimTime busy{0};
    for (const auto& ev : log) {
        if (ev.victim != core || ev.duration.ns == 0) continue;
        SimTime s = max(busy, ev.at);
        SimTime e = s + ev.duration;
        out.emplace_back(s, e);
        busy = e;
    }
    return out;
}

SimTime wake_latency(const std::vector<std::pair<SimTime, SimTime>>& intervals, SimTime at) {
    // First idle instant at or after `at`. An interval starting exactly when
    // the previous one ends (or exactly at the wake) keeps the core busy.
    auto it = std::upper_bound(intervals.begin(), intervals.end(), at,
                               [](SimTime t, const auto& iv) { return t < iv.second; });
    SimTime w = at;
    for (; it != intervals.end() && it->first <= w; ++it) w = max(w, it->second);
    return w - at;
}

namespace {

void validate_scenario(const Scenario& sc, const SimConfig& config) {
    const Partition& part = config.partition;
    for (std::size_t i = 0; i < sc.workloads.size(); ++i) {
        const WorkloadSpec& w = sc.workloads[i];
        std::string where = "workloads[" + std::to_string(i) + "]";
        if (w.core.value >= part.num_cores())
            throw ConfigError(where + ": core " + std::to_string(w.core.value) + " out of range");
        if (part.is_isolated(w.core))
            throw ConfigError(where + ": core " + std::to_string(w.core.value) +
                              " is isolated; workloads run on non-isolated cores");
        if (!(w.rate_per_sec > 0.0))
            throw ConfigError(where + ": rate must be positive");
    }
    for (CoreId c : sc.probe.cores) {
        if (c.value >= part.num_cores())
            throw ConfigError("probe: core " + std::to_string(c.value) + " out of range");
        if (!part.is_isolated(c))
            throw ConfigError("probe: core " + std::to_string(c.value) + " is not isolated");
    }
    if (!sc.probe.cores.empty()) {
        if (sc.probe.period.ns == 0) throw ConfigError("probe: period must be positive");
        if (sc.probe.threads_per_core == 0)
            throw ConfigError("probe: threads_per_core must be positive");
    }
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const SimConfig& config) {
    config.validate();
    validate_scenario(sc, config);

    Engine engine(config);
    const Partition& part = engine.config().partition;
    const CostModel& costs = engine.config().costs;
    SimTime horizon = engine.config().horizon;

    Ledger ledger(part.num_cores());
    AsidConfig asid_cfg{sc.mechanisms.asid_capacity, sc.mechanisms.asid_mode,
                        sc.mechanisms.asid_isolated_quota};
    AsidManager asid(asid_cfg, part, costs, ledger);
    WorkQueueManager wqm(part, costs, ledger);
    TimekeepConfig tk_cfg;
    tk_cfg.variant = sc.mechanisms.seqlock_variant;
    tk_cfg.tick_period = sc.mechanisms.tick_period;
    tk_cfg.baseline_section = sc.mechanisms.seqlock_baseline_section;
    tk_cfg.compressed_section = sc.mechanisms.seqlock_compressed_section;
    JiffiesClock jiffies(tk_cfg, part, ledger);
    NicManager nics(part, costs, ledger);
    VmstatShepherd shepherd(part, costs, ledger);
    StatCounters stats(part.num_cores());

    ActivationPolicy wq_policy = sc.mechanisms.workqueue_policy;
    FlushPolicy flush_policy = sc.mechanisms.flush_policy;
    std::uint64_t rejected = 0;

    std::vector<CoreId> isolated = part.isolated();
    std::vector<CoreId> non_isolated = part.non_isolated();

    struct Driver {
        RngStream rng;
        WorkloadSpec spec;
        WorkQueue wq;            // UThread submissions land here
        std::uint64_t count = 0;
    };
    std::vector<Driver> drivers;
    drivers.reserve(sc.workloads.size());
    for (std::size_t i = 0; i < sc.workloads.size(); ++i) {
        const WorkloadSpec& w = sc.workloads[i];
        std::string label = "workload/" + std::to_string(i) + "/" + std::string(to_string(w.kind));
        drivers.push_back(Driver{engine.stream(label), w, {}, 0});
        if (w.kind == WorkloadKind::UThread)
            drivers.back().wq = wqm.alloc_workqueue(wq_policy, w.core, engine.now());
    }

    auto perform = [&](Driver& d) {
        SimTime now = engine.now();
        CoreId here = d.spec.core;
        switch (d.spec.kind) {
            case WorkloadKind::KWorkqueue: {
                WorkQueue wq = wqm.alloc_workqueue(wq_policy, here, now);
                wqm.adjust_max_active(wq, 1 + static_cast<int>(d.rng.next_below(8)), wq_policy,
                                      here, now);
                break;
            }
            case WorkloadKind::UThread: {
                CoreId target{static_cast<std::uint32_t>(d.rng.next_below(part.num_cores()))};
                SimTime cost{500 + d.rng.next_below(1500)};
                if (wqm.queue_work(d.wq, WorkItem{cost, target}, wq_policy, here, now) ==
                    QueueResult::RejectedCrossPartition)
                    ++rejected;
                break;
            }
            case WorkloadKind::UFork: {
                std::uint64_t pid = asid.create_process(HomePartition::NonIsolated);
                asid.context_switch(pid, here, now);
                asid.exit_process(pid);
                break;
            }
            case WorkloadKind::NicChurn: {
                Nic nic = nics.install_nic();
                std::uint64_t enqueues = 1 + d.rng.next_below(3);
                for (std::uint64_t k = 0; k < enqueues; ++k) {
                    bool to_isolated = d.rng.next_below(4) == 0;
                    const auto& pool = to_isolated ? isolated : non_isolated;
                    CoreId target = pool[d.rng.next_below(pool.size())];
                    nics.enqueue_packet(nic, target, 1 + d.rng.next_below(16));
                }
                nics.uninstall(nic, here, flush_policy, now);
                break;
            }
            case WorkloadKind::TimerStorm: {
                jiffies.tick_update(here, now);
                break;
            }
            case WorkloadKind::VmStress: {
                stats.add_delta(here, "nr_dirtied",
                                static_cast<std::int64_t>(d.rng.next_below(100)));
                d.count += 1;
                if (d.count % 8 == 0) {
                    if (sc.mechanisms.vmstat_scoped)
                        shepherd.shepherd_scoped(stats, here, non_isolated, now);
                    else
                        shepherd.shepherd_baseline(stats, here, now);
                }
                break;
            }
        }
    };

    // Chained arrivals: each event draws the gap to the next from its own
    // stream, so the arrival sequence is a function of (seed, workload index)
    // alone and survives any mechanism toggle unchanged.
    std::vector<std::function<void()>> chains(drivers.size());
    for (std::size_t i = 0; i < drivers.size(); ++i) {
        chains[i] = [&engine, &drivers, &chains, &perform, horizon, i]() {
            perform(drivers[i]);
            SimTime next =
                engine.now() + SimTime{drivers[i].rng.next_exponential_ns(drivers[i].spec.rate_per_sec)};
            if (next <= horizon) engine.schedule(next, [&chains, i] { chains[i](); });
        };
        SimTime first{drivers[i].rng.next_exponential_ns(drivers[i].spec.rate_per_sec)};
        if (first <= horizon) engine.schedule(first, [&chains, i] { chains[i](); });
    }

    // Probe threads: periodic wakes on isolated cores. Each wake switches the
    // probe process in (address-space bookkeeping included), reads the tick
    // counter once, and sleeps again. The latency sample itself is derived
    // from the final ledger after the run.
    struct Probe {
        std::uint64_t pid;
        CoreId core;
        std::uint32_t thread;
        std::vector<SimTime> scheduled;
    };
    std::vector<Probe> probes;
    for (CoreId c : sc.probe.cores)
        for (std::uint32_t t = 0; t < sc.probe.threads_per_core; ++t)
            probes.push_back(Probe{asid.create_process(HomePartition::Isolated), c, t, {}});

    std::vector<std::function<void()>> probe_chains(probes.size());
    SimTime period = sc.probe.period;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        probe_chains[i] = [&engine, &ledger, &asid, &jiffies, &probes, &probe_chains, period,
                           horizon, i]() {
            Probe& p = probes[i];
            SimTime t = engine.now();
            p.scheduled.push_back(t);
            SimTime t0 = max(t, ledger.busy_until(p.core));
            asid.context_switch(p.pid, p.core, t0);
            SimTime t1 = max(t0, ledger.busy_until(p.core));
            jiffies.read_jiffies(p.core, t1);
            asid.deschedule(p.core);
            SimTime next = t + period;
            if (next <= horizon) engine.schedule(next, [&probe_chains, i] { probe_chains[i](); });
        };
        if (period <= horizon) engine.schedule(period, [&probe_chains, i] { probe_chains[i](); });
    }

    engine.run_until(horizon);

    RunResult result{std::move(ledger), {}, wqm.wake_log(), 0, rejected};
    result.warnings = result.ledger.count(InterferenceKind::CrossFlushWarning);
    for (const Probe& p : probes) {
        ProbeSeries series{p.core, p.thread, p.scheduled, {}};
        auto intervals = busy_intervals(result.ledger.log(), p.core);
        series.samples.reserve(p.scheduled.size());
        for (SimTime t : p.scheduled) series.samples.push_back(wake_latency(intervals, t));
        result.probes.push_back(std::move(series));
    }
    return result;
}

ProbeStats probe_stats(std::span<const SimTime> samples, SimTime bucket_width) {
    if (samples.empty()) throw Error("probe stats: no samples");
    ProbeStats st{samples[0], samples[0], 0.0, {}};
    long double sum = 0;
    for (SimTime s : samples) {
        st.min = s < st.min ? s : st.min;
        st.max = max(st.max, s);
        sum += s.ns;
    }
    st.avg_ns = static_cast<double>(sum / samples.size());
    st.hist = make_histogram(samples, bucket_width);
    return st;
}

SimConfig canned_config(std::uint64_t seed, SimTime horizon) {
    SimConfig cfg{Partition(6, {CoreId{4}, CoreId{5}}), seed, horizon, CostModel{}};
    return cfg;
}

namespace {
MechanismConfig stress_mechanisms() {
    MechanismConfig m;  // all-baseline variants by default
    m.asid_capacity = 64;
    m.asid_isolated_quota = 16;
    return m;
}
}  // namespace

Scenario canned_ufork_stress() {
    Scenario sc;
    sc.name = "ufork_stress";
    sc.workloads = {
        {WorkloadKind::UFork, CoreId{0}, 2000.0},
        {WorkloadKind::UFork, CoreId{1}, 2000.0},
        {WorkloadKind::UFork, CoreId{2}, 2000.0},
    };
    sc.probe = ProbeConfig{{CoreId{4}, CoreId{5}}, microseconds(50), 1};
    sc.mechanisms = stress_mechanisms();
    return sc;
}

Scenario canned_kworkqueue() {
    Scenario sc;
    sc.name = "kworkqueue";
    sc.workloads = {
        {WorkloadKind::KWorkqueue, CoreId{0}, 500.0},
        {WorkloadKind::KWorkqueue, CoreId{1}, 500.0},
        {WorkloadKind::UThread, CoreId{2}, 1000.0},
    };
    sc.probe = ProbeConfig{{CoreId{4}, CoreId{5}}, microseconds(50), 1};
    sc.mechanisms = stress_mechanisms();
    return sc;
}

Scenario canned_full_stress() {
    Scenario sc;
    sc.name = "full_stress";
    sc.workloads = {
        {WorkloadKind::UFork, CoreId{0}, 2000.0},
        {WorkloadKind::KWorkqueue, CoreId{1}, 500.0},
        {WorkloadKind::UThread, CoreId{1}, 1000.0},
        {WorkloadKind::NicChurn, CoreId{2}, 200.0},
        {WorkloadKind::TimerStorm, CoreId{3}, 4000.0},
        {WorkloadKind::VmStress, CoreId{2}, 500.0},
    };
    sc.probe = ProbeConfig{{CoreId{4}, CoreId{5}}, microseconds(50), 1};
    sc.mechanisms = stress_mechanisms();
    return sc;
}

Scenario canned_idle() {
    Scenario sc;
    sc.name = "idle";
    sc.probe = ProbeConfig{{CoreId{4}, CoreId{5}}, microseconds(50), 1};
    sc.mechanisms = stress_mechanisms();
    return sc;
}

}  // namespace isokern

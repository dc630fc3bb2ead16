#include "isokern/scenario_io.hpp"

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string_view>

#include "isokern/errors.hpp"
#include "json.hpp"

namespace isokern {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (std::string_view k : allowed)
            if (k == item.key()) known = true;
        if (!known) fail(where, "unknown key \"" + item.key() + "\"");
    }
}

const json& req_key(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
    return *it;
}

const json* opt_key(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& as_object(const json& v, const std::string& where) {
    if (!v.is_object()) fail(where, "expected an object");
    return v;
}

std::uint64_t as_uint(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(where, "expected a non-negative integer");
}

double as_positive_double(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    double d = v.get<double>();
    if (!(d > 0.0)) fail(where, "must be positive");
    return d;
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

std::vector<CoreId> as_core_list(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of core ids");
    std::vector<CoreId> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t c = as_uint(v[i], where + "[" + std::to_string(i) + "]");
        out.push_back(CoreId{static_cast<std::uint32_t>(c)});
    }
    return out;
}

template <typename Enum>
Enum as_choice(const json& v, const std::string& where,
               std::initializer_list<std::pair<std::string_view, Enum>> choices) {
    std::string s = as_string(v, where);
    for (const auto& [name, value] : choices)
        if (name == s) return value;
    std::string valid;
    for (const auto& [name, value] : choices) {
        if (!valid.empty()) valid += ", ";
        valid += "\"" + std::string(name) + "\"";
    }
    fail(where, "unknown value \"" + s + "\" (expected one of " + valid + ")");
}

CostModel parse_costs(const json& v, const std::string& where) {
    as_object(v, where);
    check_keys(v, where,
               {"ipi_handle_ns", "ctx_switch_ns", "tlb_flush_ns", "tlb_refill_per_entry_ns",
                "working_set_entries", "lock_spin_quantum_ns"});
    CostModel costs;
    if (const json* p = opt_key(v, "ipi_handle_ns"))
        costs.ipi_handle_ns = as_uint(*p, where + ".ipi_handle_ns");
    if (const json* p = opt_key(v, "ctx_switch_ns"))
        costs.ctx_switch_ns = as_uint(*p, where + ".ctx_switch_ns");
    if (const json* p = opt_key(v, "tlb_flush_ns"))
        costs.tlb_flush_ns = as_uint(*p, where + ".tlb_flush_ns");
    if (const json* p = opt_key(v, "tlb_refill_per_entry_ns"))
        costs.tlb_refill_per_entry_ns = as_uint(*p, where + ".tlb_refill_per_entry_ns");
    if (const json* p = opt_key(v, "working_set_entries"))
        costs.working_set_entries = as_uint(*p, where + ".working_set_entries");
    if (const json* p = opt_key(v, "lock_spin_quantum_ns"))
        costs.lock_spin_quantum_ns = as_uint(*p, where + ".lock_spin_quantum_ns");
    return costs;
}

MechanismConfig parse_mechanisms(const json& v, const std::string& where) {
    as_object(v, where);
    check_keys(v, where, {"asid", "workqueue", "seqlock", "netdev", "vmstat"});
    MechanismConfig m;
    if (const json* p = opt_key(v, "asid")) {
        std::string w = where + ".asid";
        as_object(*p, w);
        check_keys(*p, w, {"mode", "capacity", "isolated_quota"});
        if (const json* q = opt_key(*p, "mode"))
            m.asid_mode = as_choice<AsidMode>(*q, w + ".mode",
                                              {{"shared", AsidMode::Shared},
                                               {"partitioned", AsidMode::Partitioned}});
        if (const json* q = opt_key(*p, "capacity"))
            m.asid_capacity = static_cast<std::uint32_t>(as_uint(*q, w + ".capacity"));
        if (const json* q = opt_key(*p, "isolated_quota"))
            m.asid_isolated_quota = static_cast<std::uint32_t>(as_uint(*q, w + ".isolated_quota"));
    }
    if (const json* p = opt_key(v, "workqueue"))
        m.workqueue_policy = as_choice<ActivationPolicy>(
            *p, where + ".workqueue",
            {{"baseline", ActivationPolicy::Baseline}, {"restricted", ActivationPolicy::Restricted}});
    if (const json* p = opt_key(v, "seqlock")) {
        std::string w = where + ".seqlock";
        as_object(*p, w);
        check_keys(*p, w,
                   {"variant", "baseline_section_ns", "compressed_section_ns", "tick_period_us"});
        if (const json* q = opt_key(*p, "variant"))
            m.seqlock_variant = as_choice<SeqlockVariant>(*q, w + ".variant",
                                                          {{"baseline", SeqlockVariant::Baseline},
                                                           {"compressed", SeqlockVariant::Compressed}});
        if (const json* q = opt_key(*p, "baseline_section_ns"))
            m.seqlock_baseline_section = SimTime{as_uint(*q, w + ".baseline_section_ns")};
        if (const json* q = opt_key(*p, "compressed_section_ns"))
            m.seqlock_compressed_section = SimTime{as_uint(*q, w + ".compressed_section_ns")};
        if (const json* q = opt_key(*p, "tick_period_us"))
            m.tick_period = microseconds(as_uint(*q, w + ".tick_period_us"));
    }
    if (const json* p = opt_key(v, "netdev"))
        m.flush_policy = as_choice<FlushPolicy>(
            *p, where + ".netdev",
            {{"baseline", FlushPolicy::Baseline}, {"on_demand", FlushPolicy::OnDemand}});
    if (const json* p = opt_key(v, "vmstat")) {
        std::string s = as_string(*p, where + ".vmstat");
        if (s == "baseline")
            m.vmstat_scoped = false;
        else if (s == "scoped")
            m.vmstat_scoped = true;
        else
            fail(where + ".vmstat",
                 "unknown value \"" + s + "\" (expected one of \"baseline\", \"scoped\")");
    }
    return m;
}

}  // namespace

LoadedScenario parse_scenario_json(const std::string& text, std::uint64_t seed) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("top level", "expected an object");
    check_keys(root, "top level",
               {"name", "cores", "isolated", "horizon_ms", "costs", "mechanisms", "workloads",
                "probe"});

    std::uint64_t cores = as_uint(req_key(root, "top level", "cores"), "cores");
    std::vector<CoreId> isolated =
        as_core_list(req_key(root, "top level", "isolated"), "isolated");
    std::uint64_t horizon_ms = as_uint(req_key(root, "top level", "horizon_ms"), "horizon_ms");
    if (horizon_ms == 0) fail("horizon_ms", "must be positive");

    CostModel costs;
    if (const json* p = opt_key(root, "costs")) costs = parse_costs(*p, "costs");
    LoadedScenario out{
        SimConfig{Partition(static_cast<std::uint32_t>(cores), isolated), seed,
                  milliseconds(horizon_ms), costs},
        Scenario{}};

    out.scenario.name = "scenario";
    if (const json* p = opt_key(root, "name")) out.scenario.name = as_string(*p, "name");
    if (const json* p = opt_key(root, "mechanisms"))
        out.scenario.mechanisms = parse_mechanisms(*p, "mechanisms");

    const json& wl = req_key(root, "top level", "workloads");
    if (!wl.is_array()) fail("workloads", "expected an array");
    for (std::size_t i = 0; i < wl.size(); ++i) {
        std::string w = "workloads[" + std::to_string(i) + "]";
        as_object(wl[i], w);
        check_keys(wl[i], w, {"kind", "core", "rate_per_sec"});
        WorkloadSpec spec;
        std::string kind_name = as_string(req_key(wl[i], w, "kind"), w + ".kind");
        auto kind = workload_kind_from_string(kind_name);
        if (!kind) fail(w + ".kind", "unknown workload kind \"" + kind_name + "\"");
        spec.kind = *kind;
        spec.core =
            CoreId{static_cast<std::uint32_t>(as_uint(req_key(wl[i], w, "core"), w + ".core"))};
        spec.rate_per_sec =
            as_positive_double(req_key(wl[i], w, "rate_per_sec"), w + ".rate_per_sec");
        out.scenario.workloads.push_back(spec);
    }

    const json& probe = req_key(root, "top level", "probe");
    as_object(probe, "probe");
    check_keys(probe, "probe", {"cores", "period_us", "threads_per_core"});
    out.scenario.probe.cores = as_core_list(req_key(probe, "probe", "cores"), "probe.cores");
    if (const json* p = opt_key(probe, "period_us")) {
        std::uint64_t us = as_uint(*p, "probe.period_us");
        if (us == 0) fail("probe.period_us", "must be positive");
        out.scenario.probe.period = microseconds(us);
    }
    if (const json* p = opt_key(probe, "threads_per_core")) {
        std::uint64_t t = as_uint(*p, "probe.threads_per_core");
        if (t == 0) fail("probe.threads_per_core", "must be positive");
        out.scenario.probe.threads_per_core = static_cast<std::uint32_t>(t);
    }

    out.config.validate();
    return out;
}

LoadedScenario load_scenario_file(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_json(buf.str(), seed);
}

namespace {

json core_list_json(std::span<const CoreId> cores) {
    json arr = json::array();
    for (CoreId c : cores) arr.push_back(c.value);
    return arr;
}

}  // namespace

std::string scenario_to_json(const Scenario& sc, const SimConfig& config) {
    json j;
    j["name"] = sc.name;
    j["cores"] = config.num_cores();
    j["isolated"] = core_list_json(config.partition.isolated());
    j["horizon_ms"] = config.horizon.ns / 1'000'000;
    j["costs"] = {{"ipi_handle_ns", config.costs.ipi_handle_ns},
                  {"ctx_switch_ns", config.costs.ctx_switch_ns},
                  {"tlb_flush_ns", config.costs.tlb_flush_ns},
                  {"tlb_refill_per_entry_ns", config.costs.tlb_refill_per_entry_ns},
                  {"working_set_entries", config.costs.working_set_entries},
                  {"lock_spin_quantum_ns", config.costs.lock_spin_quantum_ns}};
    const MechanismConfig& m = sc.mechanisms;
    j["mechanisms"] = {
        {"asid",
         {{"mode", m.asid_mode == AsidMode::Shared ? "shared" : "partitioned"},
          {"capacity", m.asid_capacity},
          {"isolated_quota", m.asid_isolated_quota}}},
        {"workqueue", m.workqueue_policy == ActivationPolicy::Baseline ? "baseline" : "restricted"},
        {"seqlock",
         {{"variant", m.seqlock_variant == SeqlockVariant::Baseline ? "baseline" : "compressed"},
          {"baseline_section_ns", m.seqlock_baseline_section.ns},
          {"compressed_section_ns", m.seqlock_compressed_section.ns},
          {"tick_period_us", m.tick_period.ns / 1'000}}},
        {"netdev", m.flush_policy == FlushPolicy::Baseline ? "baseline" : "on_demand"},
        {"vmstat", m.vmstat_scoped ? "scoped" : "baseline"}};
    json wl = json::array();
    for (const WorkloadSpec& w : sc.workloads)
        wl.push_back({{"kind", std::string(to_string(w.kind))},
                      {"core", w.core.value},
                      {"rate_per_sec", w.rate_per_sec}});
    j["workloads"] = wl;
    j["probe"] = {{"cores", core_list_json(sc.probe.cores)},
                  {"period_us", sc.probe.period.ns / 1'000},
                  {"threads_per_core", sc.probe.threads_per_core}};
    return j.dump(2) + "\n";
}

std::string summary_json(const Scenario& sc, const SimConfig& config, const RunResult& result) {
    const Partition& part = config.partition;
    json j;
    j["scenario"] = sc.name;
    j["seed"] = config.seed;
    j["cores"] = config.num_cores();
    j["isolated"] = core_list_json(part.isolated());
    j["horizon_ns"] = config.horizon.ns;
    j["events_total"] = result.ledger.total_count();

    json by_kind;
    for (std::size_t k = 0; k < kInterferenceKindCount; ++k) {
        InterferenceKind kind = static_cast<InterferenceKind>(k);
        by_kind[std::string(to_string(kind))] = result.ledger.count(kind);
    }
    j["events_by_kind"] = by_kind;

    json cross;
    std::uint64_t cross_total = result.ledger.cross_partition_count(part);
    cross["total"] = cross_total;
    json cross_by_kind;
    std::uint64_t advisory = 0;
    for (std::size_t k = 0; k < kInterferenceKindCount; ++k) {
        InterferenceKind kind = static_cast<InterferenceKind>(k);
        std::uint64_t n = result.ledger.cross_partition_count(part, kind);
        cross_by_kind[std::string(to_string(kind))] = n;
        if (kind == InterferenceKind::SeqlockRetry || kind == InterferenceKind::CrossFlushWarning)
            advisory += n;
    }
    cross["by_kind"] = cross_by_kind;
    // Events that steal isolated-core time outright; retries and warnings are
    // symptoms of sharing, not direct theft, so they are split out.
    cross["disruptive"] = cross_total - advisory;
    j["cross_partition"] = cross;

    json stolen;
    for (CoreId c : part.isolated()) stolen[std::to_string(c.value)] = result.ledger.stolen_time(c).ns;
    j["stolen_ns_isolated"] = stolen;

    j["probe_config"] = {{"cores", core_list_json(sc.probe.cores)},
                         {"period_ns", sc.probe.period.ns},
                         {"threads_per_core", sc.probe.threads_per_core}};
    std::vector<SimTime> samples = result.all_samples();
    if (samples.empty()) {
        j["probe"] = nullptr;
    } else {
        ProbeStats stats = probe_stats(samples);
        j["probe"] = {{"samples", samples.size()},
                      {"min_ns", stats.min.ns},
                      {"avg_ns", stats.avg_ns},
                      {"max_ns", stats.max.ns}};
    }
    j["warnings"] = result.warnings;
    j["rejected_work"] = result.rejected_work;
    return j.dump(2) + "\n";
}

void write_latency_hist_csv(std::ostream& out, const LatencyHistogram& hist) {
    out << "bucket_us,count\n";
    for (const auto& [bucket, count] : hist.counts) out << bucket << "," << count << "\n";
}

}  // namespace isokern

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isokern/errors.hpp"
#include "isokern/scenario.hpp"
#include "isokern/scenario_io.hpp"
#include "isokern/schedcheck.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace isokern;

namespace {

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("ISOKERN_SEED")) {
        char* end = nullptr;
        std::uint64_t v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw ConfigError(std::string("ISOKERN_SEED is not an integer: \"") + env + "\"");
        return v;
    }
    return 1;
}

void write_run_outputs(const fs::path& dir, const Scenario& sc, const SimConfig& config,
                       const RunResult& result) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "events.csv");
        if (!out) throw Error("cannot write " + (dir / "events.csv").string());
        result.ledger.write_csv(out);
    }
    {
        std::ofstream out(dir / "latency_hist.csv");
        if (!out) throw Error("cannot write " + (dir / "latency_hist.csv").string());
        write_latency_hist_csv(out, make_histogram(result.all_samples()));
    }
    {
        std::ofstream out(dir / "summary.json");
        if (!out) throw Error("cannot write " + (dir / "summary.json").string());
        out << summary_json(sc, config, result);
    }
}

void print_run_line(const std::string& tag, const RunResult& result) {
    std::vector<SimTime> samples = result.all_samples();
    std::cout << tag << ": events=" << result.ledger.total_count()
              << " samples=" << samples.size() << " max_latency_ns=" << result.max_latency().ns
              << " warnings=" << result.warnings << " rejected_work=" << result.rejected_work
              << "\n";
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const fs::path& out_dir) {
    LoadedScenario loaded = load_scenario_file(config_path, seed);
    RunResult result = run_scenario(loaded.scenario, loaded.config);
    write_run_outputs(out_dir, loaded.scenario, loaded.config, result);
    print_run_line(loaded.scenario.name, result);
    return 0;
}

int cmd_compare(const std::string& config_path, std::uint64_t seed, const fs::path& out_dir) {
    LoadedScenario loaded = load_scenario_file(config_path, seed);

    Scenario baseline = loaded.scenario;
    baseline.mechanisms = loaded.scenario.mechanisms.with_fixes(false);
    Scenario fixed = loaded.scenario;
    fixed.mechanisms = loaded.scenario.mechanisms.with_fixes(true);

    RunResult base_run = run_scenario(baseline, loaded.config);
    RunResult fixed_run = run_scenario(fixed, loaded.config);
    write_run_outputs(out_dir / "baseline", baseline, loaded.config, base_run);
    write_run_outputs(out_dir / "fixed", fixed, loaded.config, fixed_run);

    auto describe = [&](const RunResult& r) {
        nlohmann::json j;
        j["events_total"] = r.ledger.total_count();
        j["max_latency_ns"] = r.max_latency().ns;
        j["cross_partition_total"] = r.ledger.cross_partition_count(loaded.config.partition);
        j["warnings"] = r.warnings;
        j["rejected_work"] = r.rejected_work;
        return j;
    };
    nlohmann::json delta;
    delta["scenario"] = loaded.scenario.name;
    delta["seed"] = loaded.config.seed;
    delta["baseline"] = describe(base_run);
    delta["fixed"] = describe(fixed_run);
    std::uint64_t base_max = base_run.max_latency().ns;
    std::uint64_t fixed_max = fixed_run.max_latency().ns;
    if (fixed_max > 0)
        delta["max_latency_ratio"] = static_cast<double>(base_max) / static_cast<double>(fixed_max);
    else if (base_max > 0)
        delta["max_latency_ratio"] = "inf";
    else
        delta["max_latency_ratio"] = "n/a";
    {
        std::ofstream out(out_dir / "delta.json");
        if (!out) throw Error("cannot write " + (out_dir / "delta.json").string());
        out << delta.dump(2) << "\n";
    }

    print_run_line("baseline", base_run);
    print_run_line("fixed", fixed_run);
    return 0;
}

int cmd_analyze(const std::string& kind_name, std::vector<std::int64_t> jitters,
                std::uint32_t cores, std::uint32_t tasks, std::uint32_t sets, std::uint64_t seed,
                std::optional<double> util_lo, std::optional<double> util_hi,
                std::optional<double> util_step, const std::string& out_path) {
    auto kind = sched::experiment_kind_from_string(kind_name);
    if (!kind) throw ConfigError("unknown experiment kind \"" + kind_name + "\"");

    sched::ExperimentParams params;
    params.kind = *kind;
    if (!jitters.empty()) params.jitters_us = std::move(jitters);
    params.cores = cores;
    params.tasks = tasks;
    params.sets_per_point = sets;
    params.seed = seed;
    if (util_lo || util_hi || util_step) {
        bool wide = *kind == sched::ExperimentKind::FixedPriority ||
                    *kind == sched::ExperimentKind::Edf;
        double lo = util_lo.value_or(wide ? 0.80 : 0.60);
        double hi = util_hi.value_or(wide ? 0.99 : 0.90);
        double step = util_step.value_or(wide ? 0.01 : 0.05);
        params.utils = sched::util_grid(lo, hi, step);
    }

    sched::ExperimentResult result = sched::schedulability_experiment(params);

    std::ostringstream csv;
    csv << "kind,jitter_us,util,frac_schedulable\n";
    for (const auto& [jitter, curve] : result.curves)
        for (const sched::CurvePoint& p : curve.points)
            csv << sched::to_string(params.kind) << "," << jitter << "," << p.util << ","
                << p.fraction << "\n";
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error("cannot write " + out_path);
        out << csv.str();
    }
    for (const auto& [jitter, curve] : result.curves)
        std::cout << "sua kind=" << sched::to_string(params.kind) << " jitter_us=" << jitter << " "
                  << curve.sua << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic cross-core interference simulator and schedulability analyzer"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 1;
    std::string out_dir;

    CLI::App* sim = app.add_subcommand("simulate", "run one scenario and write its outputs");
    sim->add_option("--config", config_path, "scenario JSON file")->required();
    CLI::Option* sim_seed = sim->add_option("--seed", seed_flag, "master seed");
    sim->add_option("--out", out_dir, "output directory")->default_val("out");

    CLI::App* cmp = app.add_subcommand(
        "compare", "run a scenario with all mechanisms buggy, then all repaired, same seed");
    cmp->add_option("--config", config_path, "scenario JSON file")->required();
    CLI::Option* cmp_seed = cmp->add_option("--seed", seed_flag, "master seed");
    cmp->add_option("--out", out_dir, "output directory")->default_val("out");

    std::string kind_name;
    std::vector<std::int64_t> jitters;
    std::uint32_t cores = 20, tasks = 40, sets = 500;
    std::optional<double> util_lo, util_hi, util_step;
    std::string curve_out;

    CLI::App* ana = app.add_subcommand("analyze", "schedulability curves under release jitter");
    ana->add_option("--kind", kind_name, "fp | edf | mcs | rw")->required();
    ana->add_option("--jitter-us", jitters, "jitter levels in microseconds")->delimiter(',');
    ana->add_option("--cores", cores, "number of cores");
    ana->add_option("--tasks", tasks, "tasks per set");
    ana->add_option("--sets", sets, "task sets per utilization level");
    CLI::Option* ana_seed = ana->add_option("--seed", seed_flag, "master seed");
    ana->add_option("--util-lo", util_lo, "lowest per-core utilization");
    ana->add_option("--util-hi", util_hi, "highest per-core utilization");
    ana->add_option("--util-step", util_step, "utilization grid step");
    ana->add_option("--out", curve_out, "curve CSV path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, resolve_seed(sim_seed->count() > 0, seed_flag),
                                out_dir);
        if (cmp->parsed())
            return cmd_compare(config_path, resolve_seed(cmp_seed->count() > 0, seed_flag),
                               out_dir);
        if (ana->parsed())
            return cmd_analyze(kind_name, jitters, cores, tasks, sets,
                               resolve_seed(ana_seed->count() > 0, seed_flag), util_lo, util_hi,
                               util_step, curve_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "isokern/config.hpp"
#include "isokern/scenario.hpp"

namespace isokern {

struct LoadedScenario {
    SimConfig config;
    Scenario scenario;
};

// Parses a scenario description (strict JSON: unknown keys are errors at
// every level, so typos surface instead of silently reverting to defaults).
LoadedScenario parse_scenario_json(const std::string& text, std::uint64_t seed);
LoadedScenario load_scenario_file(const std::string& path, std::uint64_t seed);

std::string scenario_to_json(const Scenario& sc, const SimConfig& config);

// summary.json payload. Every figure is recomputable from the event log plus
// the run parameters echoed here.
std::string summary_json(const Scenario& sc, const SimConfig& config, const RunResult& result);

void write_latency_hist_csv(std::ostream& out, const LatencyHistogram& hist);

}  // namespace isokern

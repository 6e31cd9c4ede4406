#pragma once

#include <vector>

#include "elot/localization.hpp"
#include "elot/scenario.hpp"
#include "elot/sim.hpp"

namespace elot {

// Batch localization. The serial version is the reference; the parallel
// version splits the query list across OpenMP threads and must produce
// bit-identical results (each query is a pure function of the map).
std::vector<MatchResult> locate_many_serial(
    const RadioMap& map, const std::vector<Measurement>& queries,
    const LocalizationConfig& config);

std::vector<MatchResult> locate_many_parallel(
    const RadioMap& map, const std::vector<Measurement>& queries,
    const LocalizationConfig& config);

// Independent scenario runs (seed sweeps). Each run is single-threaded for
// determinism; the sweep parallelizes across runs.
std::vector<SimReport> run_scenarios_serial(const std::vector<Scenario>& scenarios);
std::vector<SimReport> run_scenarios_parallel(const std::vector<Scenario>& scenarios);

}  // namespace elot

#include "elot/batch.hpp"

#include <cstddef>

namespace elot {

namespace {

MatchResult locate_one(const RadioMap& map, const Measurement& query,
                       const LocalizationConfig& config) {
  const int k = std::min(config.k, map.size());
  if (config.algorithm == "knn") return knn_estimate(map, query, k);
  if (config.algorithm == "wknn") return wknn_estimate(map, query, k);
  return awknn_estimate(map, query, config.awknn);
}

}  // namespace

std::vector<MatchResult> locate_many_serial(
    const RadioMap& map, const std::vector<Measurement>& queries,
    const LocalizationConfig& config) {
  std::vector<MatchResult> results(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    results[i] = locate_one(map, queries[i], config);
  }
  return results;
}

std::vector<MatchResult> locate_many_parallel(
    const RadioMap& map, const std::vector<Measurement>& queries,
    const LocalizationConfig& config) {
  std::vector<MatchResult> results(queries.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    results[i] = locate_one(map, queries[i], config);
  }
  return results;
}

std::vector<SimReport> run_scenarios_serial(
    const std::vector<Scenario>& scenarios) {
  std::vector<SimReport> reports(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    reports[i] = run_scenario(scenarios[i]);
  }
  return reports;
}

std::vector<SimReport> run_scenarios_parallel(
    const std::vector<Scenario>& scenarios) {
  std::vector<SimReport> reports(scenarios.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    reports[i] = run_scenario(scenarios[i]);
  }
  return reports;
}

}  // namespace elot

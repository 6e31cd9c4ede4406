// Times the serial reference against the OpenMP batch matcher on a synthetic
// map, and checks that both produce identical estimates.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "elot/batch.hpp"
#include "elot/propagation.hpp"
#include "elot/rng.hpp"
#include "elot/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int grid_side = argc > 1 ? std::atoi(argv[1]) : 40;
  const int query_count = argc > 2 ? std::atoi(argv[2]) : 20000;

  elot::PropagationModel model;
  model.shadowing_sigma_db = 3.0;

  const double extent = (grid_side - 1) * 1.2;
  elot::Scenario sc;
  sc.seed = 7;
  sc.radio_map.bounds = {0.0, 0.0, extent, extent};
  sc.radio_map.spacing_m = 1.2;
  sc.propagation = model;
  sc.anchors = {{1, {0.0, 0.0}},      {2, {extent, 0.0}},
                {3, {0.0, extent}},   {4, {extent, extent}},
                {5, {extent / 2, 0}}, {6, {extent / 2, extent}},
                {7, {0, extent / 2}}, {8, {extent, extent / 2}}};

  const elot::RadioMap map = elot::synthesize_radio_map(sc);
  std::cout << "map: " << map.size() << " references, " << map.anchor_count()
            << " anchors\n";

  std::vector<elot::Measurement> queries(query_count);
  elot::RngStream pos_rng(sc.seed, "bench-queries");
  for (int i = 0; i < query_count; ++i) {
    const elot::Position p{pos_rng.uniform(0.0, extent),
                           pos_rng.uniform(0.0, extent)};
    elot::Measurement m;
    m.mn_id = i;
    m.rss.reserve(map.anchors.size());
    elot::RngStream noise(sc.seed, "bench-noise", static_cast<std::uint64_t>(i));
    for (const auto& a : map.anchors) {
      m.rss.push_back(elot::sample_rss(model, p, a.location, noise));
    }
    queries[i] = std::move(m);
  }

#ifdef _OPENMP
  std::cout << "openmp threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "openmp: disabled (serial fallback)\n";
#endif

  for (const char* algo : {"knn", "wknn", "awknn"}) {
    elot::LocalizationConfig config;
    config.algorithm = algo;
    config.k = 4;

    auto t0 = Clock::now();
    const auto serial = elot::locate_many_serial(map, queries, config);
    const double serial_ms = ms_since(t0);

    t0 = Clock::now();
    const auto parallel = elot::locate_many_parallel(map, queries, config);
    const double parallel_ms = ms_since(t0);

    for (std::size_t i = 0; i < serial.size(); ++i) {
      if (!(serial[i].estimate == parallel[i].estimate) ||
          serial[i].k_used != parallel[i].k_used) {
        std::cerr << "mismatch between serial and parallel results at query "
                  << i << "\n";
        return 1;
      }
    }

    std::cout << algo << ": serial " << serial_ms << " ms, parallel "
              << parallel_ms << " ms, speedup "
              << (parallel_ms > 0 ? serial_ms / parallel_ms : 0.0) << "x\n";
  }
  return 0;
}

// Command-line front end: map-build, locate, simulate, report.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "elot/batch.hpp"
#include "elot/io.hpp"
#include "elot/sim.hpp"

namespace {

struct Options {
  std::string scenario_path;
  std::string map_dir;
  std::string query_path;
  std::string out_path;
  std::string in_dir;
  std::string algorithm;
  int k = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void apply_overrides(elot::Scenario& scenario, const Options& opt) {
  if (opt.seed_set) scenario.seed = opt.seed;
  if (!opt.algorithm.empty()) scenario.localization.algorithm = opt.algorithm;
  if (opt.k > 0) scenario.localization.k = opt.k;
  elot::validate_scenario(scenario);
}

int run_map_build(const Options& opt) {
  elot::Scenario scenario = elot::load_scenario(opt.scenario_path);
  if (!scenario.radio_map.synthesize) {
    throw elot::ConfigError("map-build needs a scenario with a synthesized map");
  }
  const elot::RadioMap map = elot::synthesize_radio_map(scenario);
  elot::write_radio_map(map, opt.out_path);
  std::cout << "wrote map with " << map.size() << " reference points and "
            << map.anchor_count() << " anchors to " << opt.out_path << "\n";
  return 0;
}

int run_locate(const Options& opt) {
  const elot::RadioMap map = elot::read_radio_map(opt.map_dir);
  const auto queries = elot::read_query_csv(opt.query_path, map.anchors);
  elot::LocalizationConfig config;
  config.algorithm = opt.algorithm.empty() ? "awknn" : opt.algorithm;
  if (opt.k > 0) config.k = opt.k;
  const auto results = elot::locate_many_parallel(map, queries, config);
  if (opt.out_path.empty()) {
    elot::write_locate_csv(queries, results, std::cout);
  } else {
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw elot::IoError(opt.out_path + ": cannot write");
    elot::write_locate_csv(queries, results, out);
  }
  return 0;
}

int run_simulate(const Options& opt) {
  elot::Scenario scenario = elot::load_scenario(opt.scenario_path);
  apply_overrides(scenario, opt);
  elot::SimReport report;
  if (scenario.radio_map.synthesize) {
    report = elot::run_scenario(scenario);
  } else {
    const elot::RadioMap map = elot::read_radio_map(scenario.radio_map.dir);
    report = elot::run_scenario(scenario, map);
  }
  elot::write_report(report, opt.out_path);
  std::cout << "simulated " << elot::format_double(scenario.duration_s)
            << " s; " << report.track.size() << " track rows written to "
            << opt.out_path << "\n";
  for (const auto& [variant, st] : report.variants) {
    std::cout << "plr[" << variant << "] = " << elot::format_double(st.plr())
              << "\n";
  }
  return 0;
}

int run_report(const Options& opt) {
  std::cout << elot::render_report(opt.in_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eLOT fingerprint localization and tracking simulator"};
  app.require_subcommand(1);
  Options opt;

  auto* map_build = app.add_subcommand("map-build", "synthesize and write a radio map");
  map_build->add_option("--scenario", opt.scenario_path, "scenario JSON")->required();
  map_build->add_option("--out", opt.out_path, "output map directory")->required();

  auto* locate = app.add_subcommand("locate", "match query RSS vectors against a map");
  locate->add_option("--map", opt.map_dir, "map directory")->required();
  locate->add_option("--query", opt.query_path, "query CSV")->required();
  locate->add_option("--algo", opt.algorithm, "knn | wknn | awknn")
      ->check(CLI::IsMember({"knn", "wknn", "awknn"}));
  locate->add_option("--k", opt.k, "neighbour count for knn/wknn");
  locate->add_option("--out", opt.out_path, "result CSV (stdout when omitted)");

  auto* simulate = app.add_subcommand("simulate", "run a scenario end to end");
  simulate->add_option("--scenario", opt.scenario_path, "scenario JSON")->required();
  simulate->add_option("--out", opt.out_path, "report directory")->required();
  simulate->add_option("--seed", opt.seed, "seed override")
      ->each([&](const std::string&) { opt.seed_set = true; });
  simulate->add_option("--algo", opt.algorithm, "algorithm override")
      ->check(CLI::IsMember({"knn", "wknn", "awknn"}));
  simulate->add_option("--k", opt.k, "neighbour count override");

  auto* report = app.add_subcommand("report", "verify and print a report directory");
  report->add_option("--in", opt.in_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (map_build->parsed()) return run_map_build(opt);
    if (locate->parsed()) return run_locate(opt);
    if (simulate->parsed()) return run_simulate(opt);
    if (report->parsed()) return run_report(opt);
  } catch (const elot::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

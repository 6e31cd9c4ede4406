#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "elot/io.hpp"
#include "elot/rng.hpp"
#include "elot/sim.hpp"

#include "json.hpp"

using namespace elot;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("elot_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kMinimalScenario = R"({
  "seed": 1,
  "duration_s": 5.0,
  "zones": [{"id": 1, "rect": [0, 0, 10, 10], "anchors": [1], "head_anchor": 1}],
  "anchors": [{"id": 1, "x_m": 5.0, "y_m": 5.0}],
  "mobiles": [{"id": 7, "route": {"start": [5.0, 5.0]}}]
})";

RadioMap sample_map() {
  ReferenceGrid grid = make_reference_grid({0, 0, 2.4, 1.2}, 1.2);
  std::vector<Fingerprint> fps;
  RngStream rng(3, "io-map");
  for (const auto& gp : grid.points) {
    std::vector<Rssi> rss;
    rss.push_back(static_cast<int>(rng.uniform(-70.0, -10.0)));
    // Second anchor unheard on even grid indices.
    if (gp.index % 2 == 0) {
      rss.push_back(std::nullopt);
    } else {
      rss.push_back(static_cast<int>(rng.uniform(-70.0, -10.0)));
    }
    fps.push_back({gp.index, gp.location, std::move(rss)});
  }
  return assemble_radio_map(grid, fps,
                            {{4, {0.25, -1.0}}, {9, {2.0, 3.5}}});
}

}  // namespace

TEST_CASE("doubles survive the text round trip") {
  RngStream rng(8, "fmt");
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-6.0, 6.0));
    const double back = parse_double(format_double(v), "test");
    CHECK(back == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.5) == "-0.5");
}

TEST_CASE("radio map round trip is exact") {
  const RadioMap map = sample_map();
  const fs::path dir = temp_dir("map_roundtrip");
  write_radio_map(map, dir);
  const RadioMap back = read_radio_map(dir);

  REQUIRE(back.size() == map.size());
  REQUIRE(back.anchor_count() == map.anchor_count());
  CHECK(back.grid.spacing == map.grid.spacing);
  for (int i = 0; i < map.size(); ++i) {
    CHECK(back.fingerprints[i].grid_index == map.fingerprints[i].grid_index);
    CHECK(back.fingerprints[i].location == map.fingerprints[i].location);
    CHECK(back.fingerprints[i].rss == map.fingerprints[i].rss);
    CHECK(back.grid.points[i].location == map.grid.points[i].location);
  }
  for (int j = 0; j < map.anchor_count(); ++j) {
    CHECK(back.anchors[j].id == map.anchors[j].id);
    CHECK(back.anchors[j].location == map.anchors[j].location);
  }

  // Unheard entries exist and were restored by omission.
  bool any_unheard = false;
  for (const auto& fp : back.fingerprints) {
    if (!fp.rss[1]) any_unheard = true;
  }
  CHECK(any_unheard);
}

TEST_CASE("malformed map rows carry a line number") {
  const RadioMap map = sample_map();
  const fs::path dir = temp_dir("map_badrow");
  write_radio_map(map, dir);
  std::ofstream(dir / "rss.csv", std::ios::app) << "zzz,1\n";
  try {
    read_radio_map(dir);
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("minimal scenario parses with defaults") {
  const Scenario s = parse_scenario(kMinimalScenario);
  CHECK(s.seed == 1);
  CHECK(s.localization.algorithm == "awknn");
  CHECK(s.localization.k == 4);
  CHECK(s.tracking.required_consecutive == 3);
  CHECK(s.channel.rss_threshold_dbm == -65);
  CHECK(s.propagation.exponent == doctest::Approx(2.2));
  CHECK(s.energy.model.current_tx_a == doctest::Approx(0.110));
  CHECK(s.radio_map.synthesize);
  CHECK(s.radio_map.bounds.xmax == 10.0);
}

TEST_CASE("missing seed is named in the error") {
  nlohmann::json j = nlohmann::json::parse(kMinimalScenario);
  j.erase("seed");
  try {
    parse_scenario(j.dump());
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected with their path") {
  nlohmann::json j = nlohmann::json::parse(kMinimalScenario);
  j["tracking"]["sounding_mode"] = "fast";
  try {
    parse_scenario(j.dump());
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("tracking.sounding_mode") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry a line number") {
  try {
    parse_scenario("{\n  \"seed\": 1,\n  broken\n}");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("report files are internally consistent and re-parseable") {
  SimReport report;
  Zone z;
  z.id = 1;
  z.polygon = {0, 0, 50, 50};
  z.anchor_ids = {1};
  z.head_anchor_id = 1;
  report.zones = {z};
  RngStream rng(12, "report-errors");
  for (int i = 0; i < 137; ++i) {
    TrackRow row;
    row.timestamp_s = i * 0.5;
    row.mn_id = 7;
    row.true_position = {rng.uniform(0, 50), rng.uniform(0, 50)};
    row.estimate = {row.true_position.x + rng.normal(0, 1),
                    row.true_position.y + rng.normal(0, 1)};
    row.error_m = distance(row.true_position, row.estimate);
    report.track.push_back(row);
  }
  VariantStats st;
  st.beacons_sent = 137;
  st.beacons_delivered = 130;
  report.variants["elot"] = st;
  EnergyLedger ledger;
  ledger.transmit_j = 0.04;
  ledger.sleep_j = 0.0003;
  report.node_energy[7] = ledger;
  report.efficiency = make_efficiency_report(1.25, 0.04);
  report.has_efficiency = true;

  const fs::path dir = temp_dir("report");
  write_report(report, dir);

  const auto rows = read_track_csv(dir / "track.csv");
  REQUIRE(rows.size() == report.track.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].timestamp_s == report.track[i].timestamp_s);
    CHECK(rows[i].estimate == report.track[i].estimate);
    CHECK(rows[i].error_m == report.track[i].error_m);
  }

  // p90 against an independent percentile oracle.
  std::vector<double> errors;
  for (const auto& r : rows) errors.push_back(r.error_m);
  std::sort(errors.begin(), errors.end());
  const double p90 = errors[static_cast<std::size_t>(std::ceil(0.9 * errors.size())) - 1];
  std::ifstream sin(dir / "summary.json");
  const auto summary = nlohmann::json::parse(sin);
  CHECK(summary["errors"]["overall"]["p90_m"].get<double>() ==
        doctest::Approx(p90).epsilon(1e-12));

  // The render path re-checks consistency and prints the highlights.
  const std::string rendered = render_report(dir);
  CHECK(rendered.find("track rows: 137") != std::string::npos);
  CHECK(rendered.find("plr[elot]") != std::string::npos);
}

TEST_CASE("tampered summaries are rejected") {
  SimReport report;
  report.track.push_back({0.0, 1, {0, 0}, {1, 0}, 1.0});
  const fs::path dir = temp_dir("report_tamper");
  write_report(report, dir);
  std::ifstream sin(dir / "summary.json");
  auto summary = nlohmann::json::parse(sin);
  summary["errors"]["overall"]["mean_m"] = 0.123;
  std::ofstream(dir / "summary.json") << summary.dump(2);
  CHECK_THROWS_AS(render_report(dir), InvariantViolationError);
}

TEST_CASE("empty track writes a header-only file") {
  SimReport report;
  const fs::path dir = temp_dir("report_empty");
  write_report(report, dir);
  std::ifstream in(dir / "track.csv");
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "timestamp_s,mn_id,true_x_m,true_y_m,est_x_m,est_y_m,error_m");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("query csv grouping and validation") {
  const fs::path dir = temp_dir("query");
  const fs::path q = dir / "q.csv";
  std::ofstream(q) << "query_id,anchor_id,rssi_dbm\n"
                      "2,4,-41\n"
                      "1,9,-55\n"
                      "2,9,-61\n";
  const std::vector<AnchorSite> anchors = {{4, {0, 0}}, {9, {1, 0}}};
  const auto queries = read_query_csv(q, anchors);
  REQUIRE(queries.size() == 2);
  CHECK(queries[0].mn_id == 1);
  CHECK_FALSE(queries[0].rss[0].has_value());
  CHECK(queries[0].rss[1] == -55);
  CHECK(queries[1].rss[0] == -41);
  CHECK(queries[1].rss[1] == -61);

  std::ofstream(q) << "query_id,anchor_id,rssi_dbm\n1,3,-41\n";
  CHECK_THROWS_AS(read_query_csv(q, anchors), ConfigError);
  std::ofstream(q) << "query_id,anchor_id,rssi_dbm\n1,4,-5\n";
  CHECK_THROWS_AS(read_query_csv(q, anchors), ConfigError);
}

TEST_CASE("percentile oracle edge cases") {
  const ErrorStats one = error_stats({2.5});
  CHECK(one.median_m == 2.5);
  CHECK(one.p90_m == 2.5);
  const ErrorStats none = error_stats({});
  CHECK(none.count == 0);
  const ErrorStats ten = error_stats({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(ten.median_m == 5.0);
  CHECK(ten.p90_m == 9.0);
  CHECK(ten.mean_m == doctest::Approx(5.5));
}

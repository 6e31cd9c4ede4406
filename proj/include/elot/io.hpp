#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "elot/scenario.hpp"
#include "elot/sim.hpp"

namespace elot {

// Shortest locale-independent decimal form that parses back to the same
// double. Used for every numeric field written to disk.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);

// Strict scenario parsing: UTF-8 JSON, unknown keys rejected, defaults
// applied for every tunable the format leaves out. Throws ConfigError with
// the offending key path (and line number for syntax errors).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

// Radio-map persistence: refs.csv (grid_id,x_m,y_m), rss.csv
// (grid_id,anchor_id,rssi_dbm; unheard rows omitted), anchors.csv and a small
// meta file so that read(write(m)) == m exactly.
void write_radio_map(const RadioMap& map, const std::filesystem::path& dir);
RadioMap read_radio_map(const std::filesystem::path& dir);

// Simulation outputs: track.csv, frames.csv and summary.json.
void write_report(const SimReport& report, const std::filesystem::path& dir);

std::vector<TrackRow> read_track_csv(const std::filesystem::path& file);

// Nearest-rank percentiles over a sample of errors.
struct ErrorStats {
  std::size_t count = 0;
  double mean_m = 0.0;
  double median_m = 0.0;
  double p90_m = 0.0;
};

ErrorStats error_stats(std::vector<double> errors);

// Query file for the locate subcommand: query_id,anchor_id,rssi_dbm rows,
// grouped into one measurement per query id (ascending).
std::vector<Measurement> read_query_csv(const std::filesystem::path& file,
                                        const std::vector<AnchorSite>& anchors);

void write_locate_csv(const std::vector<Measurement>& queries,
                      const std::vector<MatchResult>& results,
                      std::ostream& out);

// Consistency check used by the report subcommand: recompute the statistics
// from track.csv and compare them with summary.json. Returns a human-readable
// rendering; throws InvariantViolationError on mismatch.
std::string render_report(const std::filesystem::path& dir);

}  // namespace elot

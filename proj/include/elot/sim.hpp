#pragma once

#include <map>
#include <string>
#include <vector>

#include "elot/scenario.hpp"

namespace elot {

enum class EventKind {
  beacon_tx,
  frame_rx,
  forward_tx,
  server_eval,
  command_rx,
  mobility_tick,
};

struct TrackRow {
  double timestamp_s = 0.0;
  int mn_id = 0;
  Position true_position;
  Position estimate;
  double error_m = 0.0;
};

struct VariantStats {
  long beacons_sent = 0;  // beacons inside the accounting horizon
  long beacons_delivered = 0;
  long frames_sent = 0;
  long receptions_delivered = 0;
  long receptions_lost = 0;

  double plr() const {
    return beacons_sent == 0
               ? 0.0
               : 1.0 - static_cast<double>(beacons_delivered) / beacons_sent;
  }
};

struct ModeDurations {
  double transmit_s = 0.0;
  double receive_s = 0.0;
  double sleep_s = 0.0;
};

struct FrameLogRow {
  int channel = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
  std::string kind;  // beacon | forward | aggregate
  int tx_node = 0;
  int delivered = 0;
  int lost = 0;
};

struct SimReport {
  std::vector<TrackRow> track;
  std::map<std::string, VariantStats> variants;  // "elot" and/or "baseline"
  std::map<int, EnergyLedger> node_energy;
  std::map<int, ModeDurations> node_durations;
  EfficiencyReport efficiency;
  bool has_efficiency = false;
  std::map<std::string, long> event_counts;
  std::map<std::string, std::vector<FrameLogRow>> frame_log;
  std::vector<Zone> zones;  // copied from the scenario for report assembly
  ChannelPlan plan;
};

// Offline phase: synthesize the fingerprint database from the scenario's
// propagation model, one scan series per grid point and anchor.
RadioMap synthesize_radio_map(const Scenario& scenario);

// One deterministic discrete-event run. The report is a pure function of the
// scenario (and map). With compare_baseline set, a second run on a single
// shared channel without coordinated backoff fills the "baseline" variant.
SimReport run_scenario(const Scenario& scenario);
SimReport run_scenario(const Scenario& scenario, const RadioMap& map);

}  // namespace elot

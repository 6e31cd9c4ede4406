#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "elot/geometry.hpp"

namespace elot {

// Number of recent estimates used for speed estimation.
inline constexpr int kSpeedWindow = 5;

// Server-side view of one tracked mobile node.
struct TrackState {
  int mn_id = 0;
  std::vector<std::pair<double, Position>> history;  // (timestamp, estimate)
  double speed_estimate_mps = 0.0;
  double transmit_period_s = 1.0;  // sounding cycle T_s
  double receive_period_s = 3.0;
  int consecutive_band_hits = 0;  // evaluations in a row outside the current band
};

// Path length across the last `window` estimates over their elapsed time.
std::optional<double> estimate_speed(
    const std::vector<std::pair<double, Position>>& history,
    int window = kSpeedWindow);

// Speed-band to sounding-period policy. Bands are half-open [lo, hi); the
// slowest band maps to 3 s.
double duty_cycle_for_speed(double speed_mps);

struct SoundingAdjust {
  TrackState state;
  std::optional<double> command_period_s;
};

// Debounced sounding-cycle adjustment: a downlink command is emitted only
// after required_consecutive evaluations in a row land outside the band of
// the current period.
SoundingAdjust maybe_adjust_sounding(TrackState track, int required_consecutive = 3);

// 1 s listening period near the zone border, 3 s in the interior.
// nullopt when the position is outside the zone.
std::optional<double> receive_period_for_position(const Position& position,
                                                  const Zone& zone,
                                                  double edge_band_m);

inline constexpr double kEdgeReceivePeriodS = 1.0;
inline constexpr double kCenterReceivePeriodS = 3.0;

struct EnergyModel {
  double voltage_v = 3.3;
  double current_tx_a = 0.110;
  double current_rx_a = 0.030;
  double current_sleep_a = 1e-6;
  double tx_duration_s = 1e-3;  // beacon airtime T_x
};

void validate_model(const EnergyModel& model);

// Energy of one sounding cycle: transmit for T_x, sleep for the rest.
double sounding_energy(const EnergyModel& model, double sounding_period_s);

// Localization energy efficiency: inverse squared error per joule.
double localization_efficiency(double mean_error_m, double energy_j);

enum class RadioMode { transmit, receive, sleep };

struct EnergyLedger {
  double transmit_j = 0.0;
  double receive_j = 0.0;
  double sleep_j = 0.0;

  double total() const { return transmit_j + receive_j + sleep_j; }
};

void ledger_accrue(EnergyLedger& ledger, RadioMode mode, double duration_s,
                   const EnergyModel& model);

struct EfficiencyReport {
  double mean_error_m = 0.0;
  double energy_j = 0.0;
  double eta = 0.0;
};

EfficiencyReport make_efficiency_report(double mean_error_m, double energy_j);

}  // namespace elot

#include "elot/tracking.hpp"

#include <cmath>
#include <string>

namespace elot {

std::optional<double> estimate_speed(
    const std::vector<std::pair<double, Position>>& history, int window) {
  if (history.size() < 2 || window < 2) return std::nullopt;
  const std::size_t n = history.size();
  const std::size_t first =
      n > static_cast<std::size_t>(window) ? n - window : 0;
  double path = 0.0;
  for (std::size_t i = first + 1; i < n; ++i) {
    path += distance(history[i - 1].second, history[i].second);
  }
  const double elapsed = history[n - 1].first - history[first].first;
  if (!(elapsed > 0.0)) return std::nullopt;
  return path / elapsed;
}

double duty_cycle_for_speed(double speed_mps) {
  if (speed_mps < 0.0) {
    throw InvalidParameterError("speed must be non-negative");
  }
  if (speed_mps < 0.1) return 3.0;
  if (speed_mps < 0.5) return 2.0;
  if (speed_mps < 1.0) return 1.0;
  if (speed_mps < 1.5) return 0.5;
  return 0.2;
}

SoundingAdjust maybe_adjust_sounding(TrackState track,
                                     int required_consecutive) {
  const double target = duty_cycle_for_speed(track.speed_estimate_mps);
  if (target == track.transmit_period_s) {
    track.consecutive_band_hits = 0;
    return {std::move(track), std::nullopt};
  }
  if (++track.consecutive_band_hits >= required_consecutive) {
    track.consecutive_band_hits = 0;
    track.transmit_period_s = target;
    return {std::move(track), target};
  }
  return {std::move(track), std::nullopt};
}

std::optional<double> receive_period_for_position(const Position& position,
                                                  const Zone& zone,
                                                  double edge_band_m) {
  if (!zone.polygon.contains(position)) return std::nullopt;
  return zone.polygon.border_distance(position) < edge_band_m
             ? kEdgeReceivePeriodS
             : kCenterReceivePeriodS;
}

void validate_model(const EnergyModel& model) {
  if (!(model.voltage_v > 0.0) || !(model.current_tx_a > 0.0) ||
      !(model.current_rx_a > 0.0) || !(model.current_sleep_a > 0.0) ||
      !(model.tx_duration_s > 0.0)) {
    throw InvalidParameterError("energy model fields must be positive");
  }
  if (!(model.current_sleep_a < model.current_rx_a &&
        model.current_rx_a < model.current_tx_a)) {
    throw InvalidParameterError(
        "energy model requires sleep < receive < transmit current");
  }
}

double sounding_energy(const EnergyModel& model, double sounding_period_s) {
  if (sounding_period_s < model.tx_duration_s) {
    throw InvalidParameterError("sounding period " +
                                std::to_string(sounding_period_s) +
                                " s shorter than the transmit burst");
  }
  const double p_tx = model.voltage_v * model.current_tx_a;
  const double p_sleep = model.voltage_v * model.current_sleep_a;
  return p_tx * model.tx_duration_s +
         p_sleep * (sounding_period_s - model.tx_duration_s);
}

double localization_efficiency(double mean_error_m, double energy_j) {
  if (!(mean_error_m > 0.0) || !(energy_j > 0.0)) {
    throw InvalidParameterError(
        "efficiency undefined for non-positive error or energy");
  }
  return (1.0 / (mean_error_m * mean_error_m)) / energy_j;
}

void ledger_accrue(EnergyLedger& ledger, RadioMode mode, double duration_s,
                   const EnergyModel& model) {
  if (duration_s < 0.0) {
    throw InvalidParameterError("accrual duration must be non-negative");
  }
  double current = 0.0;
  double* bucket = nullptr;
  switch (mode) {
    case RadioMode::transmit:
      current = model.current_tx_a;
      bucket = &ledger.transmit_j;
      break;
    case RadioMode::receive:
      current = model.current_rx_a;
      bucket = &ledger.receive_j;
      break;
    case RadioMode::sleep:
      current = model.current_sleep_a;
      bucket = &ledger.sleep_j;
      break;
  }
  *bucket += model.voltage_v * current * duration_s;
}

EfficiencyReport make_efficiency_report(double mean_error_m, double energy_j) {
  return {mean_error_m, energy_j,
          localization_efficiency(mean_error_m, energy_j)};
}

}  // namespace elot

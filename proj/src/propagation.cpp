#include "elot/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace elot {

void validate_model(const PropagationModel& model) {
  if (!(model.d0_m > 0.0)) {
    throw InvalidParameterError("propagation: d0 must be positive");
  }
  if (!(model.exponent > 0.0)) {
    throw InvalidParameterError("propagation: exponent must be positive");
  }
  if (model.shadowing_sigma_db < 0.0) {
    throw InvalidParameterError("propagation: shadowing sigma must be >= 0");
  }
  if (model.noise_floor_dbm > kRssiFloorDbm) {
    throw InvalidParameterError(
        "propagation: noise floor must not exceed the RSSI floor");
  }
  if (model.decorrelation_distance_m < 0.0) {
    throw InvalidParameterError(
        "propagation: decorrelation distance must be >= 0");
  }
}

std::optional<double> predict_rss(const PropagationModel& model,
                                  const Position& tx, const Position& rx,
                                  double noise_db) {
  const double d = std::max(distance(tx, rx), model.d0_m);
  const double rss = model.tx_power_dbm - model.pl_d0_db -
                     10.0 * model.exponent * std::log10(d / model.d0_m) +
                     noise_db;
  if (rss < model.noise_floor_dbm) return std::nullopt;
  return rss;
}

int quantize_rssi(double rss_dbm) {
  return std::clamp(round_half_down(rss_dbm), kRssiFloorDbm, kRssiCeilDbm);
}

Rssi sample_rss(const PropagationModel& model, const Position& tx,
                const Position& rx, RngStream& rng) {
  const double noise = rng.normal(0.0, model.shadowing_sigma_db);
  const auto rss = predict_rss(model, tx, rx, noise);
  if (!rss) return std::nullopt;
  return quantize_rssi(*rss);
}

double hearing_range_m(const PropagationModel& model) {
  const double margin_db =
      model.tx_power_dbm - model.pl_d0_db - model.noise_floor_dbm;
  if (margin_db <= 0.0) return 0.0;
  return model.d0_m * std::pow(10.0, margin_db / (10.0 * model.exponent));
}

}  // namespace elot

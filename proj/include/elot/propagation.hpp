#pragma once

#include <cmath>
#include <optional>

#include "elot/radio_map.hpp"
#include "elot/rng.hpp"

namespace elot {

// Log-distance path loss with Gaussian shadowing. Synthesizes every RSS value
// in the simulator; receivers below noise_floor_dbm do not hear the frame.
struct PropagationModel {
  double tx_power_dbm = 20.0;
  double pl_d0_db = 61.0;  // sized so the switch threshold falls near a zone border
  double d0_m = 1.0;
  double exponent = 2.2;
  double shadowing_sigma_db = 3.0;
  double noise_floor_dbm = -75.0;
  // Shadowing decorrelation distance for a moving transmitter. Successive
  // beacons from nearby positions see correlated shadowing; 0 disables the
  // correlation (every draw independent).
  double decorrelation_distance_m = 15.0;
};

// Correlated shadowing along a walk: exponential decay of the correlation
// with the distance moved since the previous draw.
class ShadowingProcess {
 public:
  ShadowingProcess() = default;

  double next(const PropagationModel& model, double moved_m, double unit_normal) {
    double rho = 0.0;
    if (model.decorrelation_distance_m > 0.0 && initialized_) {
      rho = std::exp(-moved_m / model.decorrelation_distance_m);
    }
    const double innovation = std::sqrt(1.0 - rho * rho) *
                              model.shadowing_sigma_db * unit_normal;
    value_ = rho * value_ + innovation;
    initialized_ = true;
    return value_;
  }

 private:
  double value_ = 0.0;
  bool initialized_ = false;
};

void validate_model(const PropagationModel& model);

// Mean received power plus a caller-supplied noise term, in dBm. Distances
// below d0 are clamped to d0. nullopt when below the hearing threshold.
std::optional<double> predict_rss(const PropagationModel& model,
                                  const Position& tx, const Position& rx,
                                  double noise_db);

// Round ties toward -inf, then clamp to the 8-bit indicator range.
int quantize_rssi(double rss_dbm);

// One shadowed, quantized measurement.
Rssi sample_rss(const PropagationModel& model, const Position& tx,
                const Position& rx, RngStream& rng);

// Distance at which the noiseless prediction meets the hearing threshold.
double hearing_range_m(const PropagationModel& model);

}  // namespace elot

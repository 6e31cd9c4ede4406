#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "elot/rng.hpp"
#include "elot/tracking.hpp"

using namespace elot;

TEST_CASE("speed of a stationary node is zero") {
  std::vector<std::pair<double, Position>> h;
  for (int i = 0; i < 6; ++i) h.emplace_back(i, Position{3, 4});
  CHECK(*estimate_speed(h) == 0.0);
}

TEST_CASE("uniform motion yields its speed") {
  std::vector<std::pair<double, Position>> h;
  for (int i = 0; i < 8; ++i) h.emplace_back(i, Position{1.0 * i, 0});
  CHECK(*estimate_speed(h) == doctest::Approx(1.0));
}

TEST_CASE("too little history yields no estimate") {
  CHECK_FALSE(estimate_speed({}).has_value());
  CHECK_FALSE(estimate_speed({{0.0, Position{0, 0}}}).has_value());
}

TEST_CASE("noisy walk speed lands near the truth") {
  // 0.9 m/s walk sampled at 1 Hz with 0.25 m estimate noise per coordinate.
  RngStream rng(17, "speed-mc");
  double worst = 0.0;
  int windows = 0;
  double bias_sum = 0.0;
  std::vector<std::pair<double, Position>> h;
  for (int i = 0; i < 200; ++i) {
    h.emplace_back(i, Position{0.9 * i + rng.normal(0.0, 0.25),
                               rng.normal(0.0, 0.25)});
    if (h.size() >= 5) {
      const double est = *estimate_speed(h);
      worst = std::max(worst, std::abs(est - 0.9));
      bias_sum += est - 0.9;
      ++windows;
    }
  }
  CHECK(bias_sum / windows < 0.3);   // the path-length bias is upward
  CHECK(bias_sum / windows > 0.0);
  CHECK(worst < 0.75);
}

TEST_CASE("duty cycle bands") {
  CHECK(duty_cycle_for_speed(0.0) == 3.0);
  CHECK(duty_cycle_for_speed(0.05) == 3.0);
  CHECK(duty_cycle_for_speed(0.1) == 2.0);
  CHECK(duty_cycle_for_speed(0.3) == 2.0);
  CHECK(duty_cycle_for_speed(0.5) == 1.0);
  CHECK(duty_cycle_for_speed(0.9) == 1.0);
  CHECK(duty_cycle_for_speed(1.0) == 0.5);
  CHECK(duty_cycle_for_speed(1.49) == 0.5);
  CHECK(duty_cycle_for_speed(1.5) == 0.2);
  CHECK(duty_cycle_for_speed(2.0) == 0.2);
  CHECK_THROWS_AS(duty_cycle_for_speed(-0.1), InvalidParameterError);
}

TEST_CASE("duty cycle never grows with speed") {
  double prev = 1e9;
  for (double v = 0.0; v < 3.0; v += 0.01) {
    const double p = duty_cycle_for_speed(v);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("sounding adjustment is debounced") {
  TrackState t;
  t.transmit_period_s = 1.0;

  SUBCASE("stable speed never commands") {
    t.speed_estimate_mps = 0.9;
    for (int i = 0; i < 10; ++i) {
      const auto r = maybe_adjust_sounding(t, 3);
      t = r.state;
      CHECK_FALSE(r.command_period_s.has_value());
      CHECK(t.consecutive_band_hits == 0);
    }
  }

  SUBCASE("three consecutive out-of-band evaluations command once") {
    t.speed_estimate_mps = 0.3;  // wants 2 s
    auto r1 = maybe_adjust_sounding(t, 3);
    CHECK_FALSE(r1.command_period_s.has_value());
    auto r2 = maybe_adjust_sounding(r1.state, 3);
    CHECK_FALSE(r2.command_period_s.has_value());
    auto r3 = maybe_adjust_sounding(r2.state, 3);
    REQUIRE(r3.command_period_s.has_value());
    CHECK(*r3.command_period_s == 2.0);
    CHECK(r3.state.transmit_period_s == 2.0);
    CHECK(r3.state.consecutive_band_hits == 0);
  }

  SUBCASE("oscillation across a band edge never commands") {
    // Trace oracle: the counter resets every time the target matches.
    int counter = 0;
    bool commanded = false;
    for (int i = 0; i < 40; ++i) {
      t.speed_estimate_mps = (i % 2 == 0) ? 0.45 : 0.55;
      const auto r = maybe_adjust_sounding(t, 3);
      t = r.state;
      if (duty_cycle_for_speed(t.speed_estimate_mps) == 1.0) {
        counter = 0;
      } else {
        ++counter;
      }
      CHECK(t.consecutive_band_hits == counter % 3);
      if (r.command_period_s) commanded = true;
    }
    CHECK_FALSE(commanded);
  }
}

TEST_CASE("receive period by zone position") {
  Zone z;
  z.id = 1;
  z.polygon = {0, 0, 20, 10};
  z.anchor_ids = {1};
  z.head_anchor_id = 1;

  CHECK(*receive_period_for_position({10, 5}, z, 2.0) == 3.0);
  CHECK(*receive_period_for_position({0.5, 5}, z, 2.0) == 1.0);
  CHECK(*receive_period_for_position({0, 5}, z, 2.0) == 1.0);  // on the border
  CHECK_FALSE(receive_period_for_position({30, 5}, z, 2.0).has_value());
}

TEST_CASE("sounding energy reproduces the module arithmetic") {
  EnergyModel m;  // 3.3 V, 110 mA, 1 uA, 1 ms
  CHECK(sounding_energy(m, 1.0) * 1e6 == doctest::Approx(366.2967).epsilon(1e-9));
  CHECK(sounding_energy(m, 2.0) * 1e6 == doctest::Approx(369.5967).epsilon(1e-9));
  CHECK(sounding_energy(m, m.tx_duration_s) * 1e6 == doctest::Approx(363.0));
  CHECK_THROWS_AS(sounding_energy(m, 0.0005), InvalidParameterError);
}

TEST_CASE("sounding energy is strictly increasing and continuous in the period") {
  EnergyModel m;
  double prev = sounding_energy(m, 0.001);
  for (double ts = 0.0011; ts < 4.0; ts += 0.0007) {
    const double e = sounding_energy(m, ts);
    CHECK(e > prev);
    // No jumps: the derivative is the sleep power.
    CHECK(e - prev < m.voltage_v * m.current_sleep_a * 0.001);
    prev = e;
  }
}

TEST_CASE("efficiency metric") {
  CHECK(localization_efficiency(1.39, 0.366) == doctest::Approx(1.414).epsilon(0.004));
  CHECK(localization_efficiency(1.43, 0.2936) == doctest::Approx(1.666).epsilon(0.004));
  CHECK(localization_efficiency(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(localization_efficiency(0.0, 1.0), InvalidParameterError);
  CHECK_THROWS_AS(localization_efficiency(1.0, 0.0), InvalidParameterError);
}

TEST_CASE("ledger accrual") {
  EnergyModel m;
  EnergyLedger ledger;
  ledger_accrue(ledger, RadioMode::receive, 1.0, m);
  CHECK(ledger.receive_j == doctest::Approx(0.099));
  ledger_accrue(ledger, RadioMode::transmit, 0.0, m);
  CHECK(ledger.transmit_j == 0.0);
  CHECK(ledger.total() == doctest::Approx(0.099));
  CHECK_THROWS_AS(ledger_accrue(ledger, RadioMode::sleep, -1.0, m),
                  InvalidParameterError);
}

TEST_CASE("mode-by-mode accrual equals whole-cycle accounting") {
  EnergyModel m;
  EnergyLedger ledger;
  for (int i = 0; i < 100; ++i) {
    ledger_accrue(ledger, RadioMode::transmit, m.tx_duration_s, m);
    ledger_accrue(ledger, RadioMode::sleep, 1.0 - m.tx_duration_s, m);
  }
  CHECK(ledger.total() == doctest::Approx(100.0 * sounding_energy(m, 1.0)).epsilon(1e-12));
}

TEST_CASE("the 60/20 cycle split saves about twenty percent") {
  EnergyModel m;
  const double fixed = 100.0 * sounding_energy(m, 1.0);
  const double adaptive = 60.0 * sounding_energy(m, 1.0) + 20.0 * sounding_energy(m, 2.0);
  CHECK(adaptive / fixed == doctest::Approx(0.802).epsilon(0.00125));
}

TEST_CASE("efficiency report is internally consistent") {
  const EfficiencyReport r = make_efficiency_report(1.39, 0.366);
  CHECK(r.eta == doctest::Approx((1.0 / (1.39 * 1.39)) / 0.366).epsilon(1e-9));
}

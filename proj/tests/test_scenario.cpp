#include <cmath>
#include <cstring>

#include <doctest.h>

#include "vharvest/errors.hpp"
#include "vharvest/random.hpp"
#include "vharvest/scenario.hpp"

using namespace vharvest;

TEST_CASE("defaults derive E_tx, N_s and L") {
  const Scenario s = Scenario::build(Scenario::defaults(4.0));
  CHECK(s.derived().E_tx == doctest::Approx(4e-6).epsilon(1e-12));
  CHECK(s.derived().N_s == 100);
  CHECK(s.derived().L == 8);
  CHECK(s.derived().N_H() == 8);
  CHECK(s.derived().step == doctest::Approx(1.0));
  CHECK(s.derived().m == doctest::Approx(4e-6));
  CHECK_FALSE(s.capacity_snapped());
  CHECK_FALSE(s.ell_snapped());
  CHECK(s.derived().W(4.0) == doctest::Approx(108.0));
  CHECK(s.derived().R(30, 4.0) == doctest::Approx(38.0));
  CHECK(s.derived().delta(30) == doctest::Approx(70 * 4e-6));
}

TEST_CASE("battery capacity snaps down to whole quanta") {
  auto p = Scenario::defaults(4.0);
  p.G = 402e-6;
  const Scenario s = Scenario::build(p);
  CHECK(s.capacity_snapped());
  CHECK(s.derived().N_s == 100);
  CHECK(s.params().G == doctest::Approx(400e-6));
  CHECK(s.requested_capacity() == doctest::Approx(402e-6));
}

TEST_CASE("harvest distance snaps to an even slot count") {
  auto p = Scenario::defaults(4.3);
  const Scenario s = Scenario::build(p);
  CHECK(s.ell_snapped());
  CHECK(s.ell() == doctest::Approx(4.0));
  CHECK(s.requested_ell() == doctest::Approx(4.3));
  CHECK(s.derived().L % 2 == 0);
  CHECK_THROWS_AS(Scenario::build(Scenario::defaults(0.3)), ValidationError);
}

TEST_CASE("invalid parameters name the field") {
  auto check_field = [](ScenarioParams p, const char* field) {
    try {
      Scenario::build(p);
      FAIL("expected ValidationError for " << field);
    } catch (const ValidationError& e) {
      CHECK(e.field() == field);
    }
  };
  auto p = Scenario::defaults();
  p.eta = 0.0;
  check_field(p, "eta");
  p = Scenario::defaults();
  p.eta = 1.5;
  check_field(p, "eta");
  p = Scenario::defaults();
  p.alpha = 1.0;
  check_field(p, "alpha");
  p = Scenario::defaults();
  p.Pt = -1.0;
  check_field(p, "Pt");
  p = Scenario::defaults();
  p.traffic = Poisson{0.0};
  check_field(p, "mu");
  p = Scenario::defaults();
  p.traffic = Platoon{-5.0};
  check_field(p, "d0");
  p = Scenario::defaults();
  p.fading = Rician{-1.0};
  check_field(p, "kappa");
  p = Scenario::defaults();
  p.r = NAN;
  check_field(p, "r");
}

TEST_CASE("decoding probability") {
  const double phi = decoding_probability(Scenario::build(Scenario::defaults()));
  // N0 r^alpha / Pt = 0.2, 2^(S/(BT)) - 1 = 2^(2/3) - 1
  CHECK(phi == doctest::Approx(std::exp(-0.2 * (std::pow(2.0, 2.0 / 3.0) - 1.0))).epsilon(1e-12));
  CHECK(phi == doctest::Approx(0.8891).epsilon(1e-4));

  auto p = Scenario::defaults();
  p.Pt = 80e-6;
  p.S = 4000.0;
  const double phi2 = decoding_probability(p);
  CHECK(phi2 == doctest::Approx(std::exp(-0.1 * (std::pow(2.0, 8.0 / 3.0) - 1.0))).epsilon(1e-12));
  CHECK(phi2 == doctest::Approx(0.5857).epsilon(1e-3));

  p = Scenario::defaults();
  p.S = 1e-9;
  CHECK(decoding_probability(p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("decoding probability matches Rayleigh outage by Monte Carlo") {
  const ScenarioParams p = Scenario::defaults();
  const double snr = p.Pt / (p.N0 * std::pow(p.r, p.alpha));
  const double threshold = std::pow(2.0, p.S / (p.B * p.T)) - 1.0;
  Rng rng(99);
  const int n = 1'000'000;
  int ok = 0;
  for (int i = 0; i < n; ++i) ok += rng.exponential() * snr >= threshold;
  const double mc = static_cast<double>(ok) / n;
  const double se = std::sqrt(mc * (1 - mc) / n);
  CHECK(std::abs(mc - decoding_probability(p)) < 4 * se);
}

TEST_CASE("decoding probability monotonicity on sampled grids") {
  const ScenarioParams base = Scenario::defaults();
  auto sweep = [&](double ScenarioParams::*field, double lo, double hi, int sign) {
    double prev = NAN;
    for (int i = 0; i <= 20; ++i) {
      ScenarioParams p = base;
      p.*field = lo + (hi - lo) * i / 20.0;
      const double phi = decoding_probability(p);
      if (!std::isnan(prev)) CHECK((phi - prev) * sign > 0.0);
      prev = phi;
    }
  };
  sweep(&ScenarioParams::Pt, 10e-6, 200e-6, +1);
  sweep(&ScenarioParams::B, 5e3, 50e3, +1);
  sweep(&ScenarioParams::S, 200.0, 5000.0, -1);
  sweep(&ScenarioParams::r, 50.0, 300.0, -1);
  sweep(&ScenarioParams::N0, 1e-13, 1e-11, -1);
}

TEST_CASE("rebuilding a scenario is bit-identical") {
  auto p = Scenario::defaults(5.0);
  p.traffic = Platoon{37.0};
  const Scenario a = Scenario::build(p);
  const Scenario b = Scenario::build(p);
  CHECK(std::memcmp(&a.derived(), &b.derived(), sizeof(Derived)) == 0);
  CHECK(decoding_probability(a) == decoding_probability(b));
}

TEST_CASE("units and model helpers") {
  CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
  CHECK(dbm_to_watts(-90.0) == doctest::Approx(1e-12));
  CHECK(rice_factor(Rayleigh{}) == 0.0);
  CHECK(mean_spacing(Poisson{0.04}) == doctest::Approx(25.0));
  CHECK(mean_spacing(Platoon{30.0}) == 30.0);
  CHECK(is_platoon(Platoon{}));
  CHECK_FALSE(is_platoon(Poisson{}));
}

#include <cmath>
#include <vector>

#include <doctest.h>

#include "vharvest/battery_chain.hpp"
#include "vharvest/metrics.hpp"
#include "vharvest/numeric.hpp"

using namespace vharvest;

namespace {

Scenario make(double ell, TrafficModel traffic, double Pt = 40e-6, double S = 1000.0) {
  auto p = Scenario::defaults(ell);
  p.traffic = traffic;
  p.Pt = Pt;
  p.S = S;
  return Scenario::build(p);
}

}  // namespace

TEST_CASE("psi_general edge cases") {
  const Scenario s = make(4.0, Poisson{0.02});
  const EnergyCdf cdf = analytic_cdf(s);
  const double two_ell = 2.0 * s.ell();

  SpacingCdf back_to_back{[two_ell](double y) { return y >= two_ell ? 1.0 : 0.0; }, {two_ell}, two_ell};
  for (int k : {0, 10, 50, 100}) CHECK(psi_general(k, cdf, back_to_back, s) == doctest::Approx(0.0).epsilon(1e-9));

  const SpacingCdf poisson = spacing_cdf(Poisson{0.02});
  const int n_s = s.derived().N_s;
  const double W = s.derived().W(s.ell());
  const double integral = numeric::integrate(poisson.cdf, two_ell, W, 1e-12);
  CHECK(psi_general(n_s, cdf, poisson, s) == doctest::Approx(n_s - integral / s.derived().step).epsilon(1e-9));
}

TEST_CASE("psi_general with Poisson spacing equals the closed form") {
  for (double ell : {2.0, 4.0, 7.0}) {
    const Scenario s = make(ell, Poisson{0.02});
    const EnergyCdf cdf = analytic_cdf(s);
    const SpacingCdf sp = spacing_cdf(s.params().traffic);
    for (int k : {0, 25, 50, 75, 100}) {
      CHECK(std::abs(psi_general(k, cdf, sp, s) - psi_poisson(k, cdf, 0.02, s)) < 1e-6);
    }
  }
}

TEST_CASE("psi_general with constant spacing equals the platoon form") {
  for (double d0 : {6.0, 30.0, 50.0, 75.0, 130.0}) {
    const Scenario s = make(4.0, Platoon{d0});
    const EnergyCdf cdf = analytic_cdf(s);
    const SpacingCdf sp = spacing_cdf(s.params().traffic);
    for (int k : {0, 20, 40, 60, 100}) {
      CHECK(psi_general(k, cdf, sp, s) == doctest::Approx(psi_platoon(k, cdf, d0, s)).epsilon(1e-6));
    }
  }
}

TEST_CASE("psi_poisson limits") {
  const Scenario s = make(4.0, Poisson{0.02});
  const EnergyCdf cdf = analytic_cdf(s);
  CHECK(psi_poisson(30, cdf, 1e3, s) < 1e-9);
  const double mu = 0.02, ell = s.ell(), W = s.derived().W(ell);
  CHECK(psi_poisson(100, cdf, mu, s) ==
        doctest::Approx((std::exp(-2 * ell * mu) - std::exp(-mu * W)) / (mu * s.derived().step)).epsilon(1e-12));
}

TEST_CASE("psi_platoon branches") {
  const Scenario s = make(4.0, Platoon{50.0});
  const EnergyCdf cdf = analytic_cdf(s);
  for (int k : {0, 10, 100}) CHECK(psi_platoon(k, cdf, 7.9, s) == 0.0);
  // 2 ell <= d0 < R: TP length bounds the count
  CHECK(psi_platoon(60, cdf, 50.0, s) == doctest::Approx(42.0));
  // continuity at d0 = R
  const int k = 30;
  const double R = s.derived().R(k, s.ell());
  CHECK(psi_platoon(k, cdf, R - 1e-9, s) == doctest::Approx(k).epsilon(1e-6));
  CHECK(psi_platoon(k, cdf, R, s) == doctest::Approx(k).epsilon(1e-6));
  // d0 >= W: capped by the battery
  const double W = s.derived().W(s.ell());
  CHECK(psi_platoon(k, cdf, W + 10.0, s) == doctest::Approx(psi_platoon(k, cdf, W, s)).epsilon(1e-9));
  CHECK(psi_platoon(k, cdf, W, s) <= 100.0);
}

TEST_CASE("psi is non-decreasing in k and bounded") {
  for (const TrafficModel& t : {TrafficModel{Poisson{0.02}}, TrafficModel{Platoon{50.0}}}) {
    for (double ell : {1.0, 4.0, 8.0}) {
      const Scenario s = make(ell, t);
      const auto psi = psi_table(s, analytic_cdf(s));
      const double tp_bound = is_platoon(t) ? (mean_spacing(t) - 2.0 * s.ell()) / s.derived().step : 1e300;
      for (std::size_t k = 0; k < psi.size(); ++k) {
        CHECK(psi[k] >= -1e-9);
        CHECK(psi[k] <= std::min<double>(s.derived().N_s, tp_bound) + 1e-6);
        if (k > 0) CHECK(psi[k] >= psi[k - 1] - 1e-9);
      }
    }
  }
}

TEST_CASE("throughput") {
  SUBCASE("perpetual harvest phase gives zero") {
    const Scenario s = make(4.0, Platoon{6.0});
    const Analysis a = analyze(s);
    CHECK(a.throughput.theta_pkt == 0.0);
  }
  SUBCASE("explicit empty battery with no transmissions") {
    const Scenario s = make(4.0, Platoon{6.0});
    const EnergyCdf cdf = analytic_cdf(s);
    const auto r = throughput(s, cdf, QuantizedPmf::unit(100, 0, PmfRole::battery));
    CHECK(r.theta_pkt == 0.0);
  }
  SUBCASE("bounds and unit conversion") {
    for (double ell : {1.0, 3.0, 6.0, 10.0}) {
      const Scenario s = make(ell, Poisson{0.02}, 40e-6, 2000.0);
      const auto r = analyze(s).throughput;
      CHECK(r.theta_pkt >= 0.0);
      CHECK(r.theta_pkt <= r.phi_s / s.params().T);
      CHECK(r.theta_bits == doctest::Approx(2000.0 * r.theta_pkt));
      CHECK(r.theta_kbit() == doctest::Approx(2.0 * r.theta_pkt));
      CHECK(r.phi_s == doctest::Approx(decoding_probability(s)));
    }
  }
  SUBCASE("battery pmf size must match") {
    const Scenario s = make(4.0, Poisson{0.02});
    CHECK_THROWS(throughput(s, analytic_cdf(s), QuantizedPmf::unit(5, 0, PmfRole::battery)));
  }
}

TEST_CASE("joint energy rescaling leaves psi and theta unchanged") {
  for (const TrafficModel& t : {TrafficModel{Poisson{0.02}}, TrafficModel{Platoon{50.0}}}) {
    auto p = Scenario::defaults(4.0);
    p.traffic = t;
    auto q = p;
    const double c = 2.0;
    q.Pv *= c;
    q.G *= c;
    q.Pt *= c;
    q.N0 *= c;
    const Analysis a = analyze(Scenario::build(p));
    const Analysis b = analyze(Scenario::build(q));
    for (std::size_t k = 0; k < a.throughput.psi.size(); ++k) {
      CHECK(b.throughput.psi[k] == doctest::Approx(a.throughput.psi[k]).epsilon(1e-9));
    }
    CHECK(b.throughput.theta_pkt == doctest::Approx(a.throughput.theta_pkt).epsilon(1e-9));
  }
}

TEST_CASE("energy density") {
  const Scenario s = make(4.0, Poisson{0.02});
  CHECK(energy_density(s) == doctest::Approx(1.6e-4).epsilon(1e-12));
  CHECK(energy_density(0.1, 5.0, 3.0, 50.0) == doctest::Approx(2 * 0.1 / (25.0 * 50.0)).epsilon(1e-12));
  for (double alpha : {2.5, 3.0, 3.5}) {
    const double w = 5.0, Pv = 0.1, mean = 50.0;
    const double line = numeric::integrate_split(
        [&](double x) { return std::pow(w * w + x * x, -alpha / 2.0); }, -1e5, 1e5, 1e-14,
        {-1e3, -100.0, -10.0, 0.0, 10.0, 100.0, 1e3});
    CHECK(energy_density(Pv, w, alpha, mean) == doctest::Approx(Pv / mean * line).epsilon(1e-6));
  }
}

TEST_CASE("efficiency") {
  const Scenario s = make(4.0, Poisson{0.02}, 40e-6, 2000.0);
  ThroughputResult zero;
  CHECK(efficiency(s, zero).upsilon == 0.0);

  const auto theta = analyze(s).throughput;
  const EfficiencyResult e = efficiency(s, theta);
  CHECK(e.upsilon == doctest::Approx(theta.theta_bits / e.epsilon));
  CHECK(e.upsilon == doctest::Approx(2000.0 * 25.0 * 50.0 / (2 * 0.1) * theta.theta_pkt));

  auto p = s.params();
  p.Pv *= 2.0;
  const EfficiencyResult doubled = efficiency(Scenario::build(p), theta);
  CHECK(doubled.upsilon == doctest::Approx(e.upsilon / 2.0));
}

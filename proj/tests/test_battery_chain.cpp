#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "vharvest/battery_chain.hpp"
#include "vharvest/energy_cdf.hpp"
#include "vharvest/errors.hpp"
#include "vharvest/random.hpp"

using namespace vharvest;

namespace {

QuantizedPmf random_pmf(int n_s, Rng& rng, PmfRole role) {
  QuantizedPmf q{std::vector<double>(static_cast<std::size_t>(n_s) + 1), role};
  for (double& v : q.p) v = rng.uniform() + 0.05;
  const double total = std::accumulate(q.p.begin(), q.p.end(), 0.0);
  for (double& v : q.p) v /= total;
  return q;
}

void check_pmf(const QuantizedPmf& q) {
  CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-10));
  for (double v : q.p) CHECK(v >= 0.0);
}

}  // namespace

TEST_CASE("harvest quanta pmf") {
  SUBCASE("all mass above capacity saturates") {
    const Scenario s = Scenario::build(Scenario::defaults(4.0));
    const EnergyCdf above = EnergyCdf::from_function([](double x) { return x < 1.0 ? 0.0 : 1.0; }, 1.0);
    const QuantizedPmf p = harvest_quanta_pmf(above, s.derived());
    CHECK(p[100] == 1.0);
    check_pmf(p);
  }
  SUBCASE("defaults, ell = 4 matches a Monte Carlo histogram") {
    const Scenario s = Scenario::build(Scenario::defaults(4.0));
    const QuantizedPmf p = harvest_quanta_pmf(analytic_cdf(s), s.derived());
    check_pmf(p);
    const auto mode = std::max_element(p.p.begin(), p.p.end()) - p.p.begin();
    CHECK(mode >= 58);
    CHECK(mode <= 66);
    CHECK(p.mean() == doctest::Approx(2.50e-4 / 4e-6 - 0.5).epsilon(0.02));

    const SegmentRates r = segment_rates(s);
    Rng rng(21);
    const FadingSampler gain(s.params().fading);
    std::vector<double> hist(101, 0.0);
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
      double e = 0.0;
      for (double l : r.lambda) e += gain(rng) / l;
      hist[std::min<std::size_t>(100, static_cast<std::size_t>(e / 4e-6))] += 1.0 / n;
    }
    double tv = 0.0;
    for (int k = 0; k <= 100; ++k) tv += 0.5 * std::abs(hist[k] - p[k]);
    CHECK(tv < 0.02);
  }
}

TEST_CASE("transmit quanta pmf") {
  auto p = Scenario::defaults(4.0);
  p.traffic = Platoon{50.0};
  Scenario s = Scenario::build(p);
  QuantizedPmf t = tp_quanta_pmf(s.params().traffic, s.derived(), s.ell());
  CHECK(t[42] == 1.0);
  check_pmf(t);

  t = tp_quanta_pmf(Platoon{6.0}, s.derived(), 4.0);
  CHECK(t[0] == 1.0);

  t = tp_quanta_pmf(Platoon{500.0}, s.derived(), 4.0);
  CHECK(t[100] == 1.0);

  t = tp_quanta_pmf(Poisson{1.0 / 50.0}, s.derived(), 4.0);
  CHECK(t[0] == doctest::Approx(1.0 - std::exp(-8.0 / 50.0)).epsilon(1e-12));
  CHECK(t[0] == doctest::Approx(0.1479).epsilon(1e-3));
  check_pmf(t);
  // p_T(k) = F_D(2l + k) - F_D(2l + k - 1); the tail collects d_v > 2l + N_s - 1
  CHECK(t[10] == doctest::Approx(std::exp(-17.0 / 50.0) - std::exp(-18.0 / 50.0)).epsilon(1e-9));
  CHECK(t[100] == doctest::Approx(std::exp(-107.0 / 50.0)).epsilon(1e-9));
}

TEST_CASE("transition matrix") {
  const int n = 5;
  SUBCASE("full recharge then full drain") {
    const auto M = transition_matrix(QuantizedPmf::unit(n, n, PmfRole::harvest),
                                     QuantizedPmf::unit(n, n, PmfRole::transmit));
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) CHECK(M(i, j) == (j == 0 ? 1.0 : 0.0));
    }
  }
  SUBCASE("nothing harvested, nothing spent") {
    const auto M = transition_matrix(QuantizedPmf::unit(n, 0, PmfRole::harvest),
                                     QuantizedPmf::unit(n, 0, PmfRole::transmit));
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) CHECK(M(i, j) == (i == j ? 1.0 : 0.0));
    }
  }
  SUBCASE("random pmfs match exhaustive enumeration") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const QuantizedPmf pe = random_pmf(n, rng, PmfRole::harvest);
      const QuantizedPmf pt = random_pmf(n, rng, PmfRole::transmit);
      const auto M = transition_matrix(pe, pt);
      std::vector<double> brute((n + 1) * (n + 1), 0.0);
      for (int i = 0; i <= n; ++i) {
        for (int h = 0; h <= n; ++h) {
          for (int k = 0; k <= n; ++k) {
            const int j = std::max(std::min(i + h, n) - k, 0);
            brute[i * (n + 1) + j] += pe[h] * pt[k];
          }
        }
      }
      for (int i = 0; i <= n; ++i) {
        double row = 0.0;
        for (int j = 0; j <= n; ++j) {
          CHECK(M(i, j) == doctest::Approx(brute[i * (n + 1) + j]).epsilon(1e-14));
          row += M(i, j);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("steady state") {
  SUBCASE("identity is reducible and returns the uniform vector") {
    TransitionMatrix M(4);
    for (int i = 0; i < 4; ++i) M(i, i) = 1.0;
    const StationaryResult r = steady_state(M);
    CHECK(r.reducible);
    for (double v : r.pi.p) CHECK(v == doctest::Approx(0.25));
  }
  SUBCASE("symmetric two-state chain") {
    TransitionMatrix M(2);
    M(0, 0) = M(0, 1) = M(1, 0) = M(1, 1) = 0.5;
    const StationaryResult r = steady_state(M);
    CHECK_FALSE(r.reducible);
    CHECK(r.pi[0] == doctest::Approx(0.5));
    CHECK(r.pi[1] == doctest::Approx(0.5));
  }
  SUBCASE("periodic chain converges") {
    TransitionMatrix M(2);
    M(0, 1) = M(1, 0) = 1.0;
    const StationaryResult r = steady_state(M);
    CHECK(r.pi[0] == doctest::Approx(0.5));
  }
  SUBCASE("default chains are fixed points") {
    for (double ell : {1.0, 4.0, 8.0}) {
      for (int plat = 0; plat < 2; ++plat) {
        auto p = Scenario::defaults(ell);
        if (plat) p.traffic = Platoon{50.0};
        const Scenario s = Scenario::build(p);
        const QuantizedPmf pe = harvest_quanta_pmf(analytic_cdf(s), s.derived());
        const QuantizedPmf pt = tp_quanta_pmf(s.params().traffic, s.derived(), s.ell());
        const auto M = transition_matrix(pe, pt);
        const StationaryResult r = steady_state(M);
        check_pmf(r.pi);
        const auto next = M.left_multiply(r.pi.p);
        for (std::size_t k = 0; k < next.size(); ++k) CHECK(std::abs(next[k] - r.pi[k]) < 1e-10);
      }
    }
  }
}

TEST_CASE("stationary battery rises with the harvest distance") {
  std::vector<double> prev_cdf;
  for (int ell = 1; ell <= 8; ++ell) {
    auto p = Scenario::defaults(ell);
    p.traffic = Platoon{50.0};
    const Scenario s = Scenario::build(p);
    const QuantizedPmf pe = harvest_quanta_pmf(analytic_cdf(s), s.derived());
    const QuantizedPmf pt = tp_quanta_pmf(s.params().traffic, s.derived(), s.ell());
    const QuantizedPmf pi = steady_state(transition_matrix(pe, pt)).pi;
    std::vector<double> cdf(pi.p.size());
    std::partial_sum(pi.p.begin(), pi.p.end(), cdf.begin());
    if (!prev_cdf.empty()) {
      for (std::size_t k = 0; k < cdf.size(); ++k) CHECK(cdf[k] <= prev_cdf[k] + 1e-9);
    }
    prev_cdf = cdf;
  }
}

TEST_CASE("post-harvest pmf") {
  Rng rng(8);
  const int n = 6;
  const QuantizedPmf pb = random_pmf(n, rng, PmfRole::battery);
  const QuantizedPmf pe = random_pmf(n, rng, PmfRole::harvest);

  QuantizedPmf out = post_harvest_pmf(QuantizedPmf::unit(n, 0, PmfRole::battery), pe);
  for (int k = 0; k <= n; ++k) CHECK(out[k] == doctest::Approx(pe[k]));
  out = post_harvest_pmf(pb, QuantizedPmf::unit(n, 0, PmfRole::harvest));
  for (int k = 0; k <= n; ++k) CHECK(out[k] == doctest::Approx(pb[k]));

  out = post_harvest_pmf(pb, pe);
  check_pmf(out);
  std::vector<double> brute(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    for (int h = 0; h <= n; ++h) brute[std::min(j + h, n)] += pb[j] * pe[h];
  }
  for (int k = 0; k <= n; ++k) CHECK(out[k] == doctest::Approx(brute[k]).epsilon(1e-14));
  CHECK_THROWS_AS(post_harvest_pmf(pb, QuantizedPmf::unit(n + 1, 0, PmfRole::harvest)), ValidationError);
}

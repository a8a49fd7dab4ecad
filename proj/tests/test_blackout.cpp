#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include "vharvest/blackout.hpp"
#include "vharvest/errors.hpp"
#include "vharvest/random.hpp"

using namespace vharvest;
using boost::multiprecision::cpp_rational;

namespace {

int longest_run(unsigned bits, int L) {
  int best = 0, run = 0;
  for (int i = 0; i < L; ++i) {
    run = (bits >> i) & 1u ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

Scenario platoon(double ell, double Pt = 40e-6, double d0 = 50.0) {
  auto p = Scenario::defaults(ell);
  p.traffic = Platoon{d0};
  p.Pt = Pt;
  return Scenario::build(p);
}

}  // namespace

TEST_CASE("runs_given_k spot values") {
  CHECK(runs_given_k(4, 2, 2) == doctest::Approx(0.5));
  CHECK(runs_given_k(5, 5, 5) == 1.0);
  CHECK(runs_given_k(5, 3, 5) == 0.0);
  CHECK(runs_given_k(6, 5, 4) == 0.0);
  CHECK_THROWS_AS(runs_given_k(6, 2, 3), ValidationError);
  CHECK_THROWS_AS(runs_given_k(6, 3, 7), ValidationError);
  CHECK_THROWS_AS(runs_given_k(0, 0, 0), ValidationError);

  // Q(6,3|4) against all C(6,4) = 15 strings
  int exactly = 0, total = 0;
  for (unsigned b = 0; b < 64; ++b) {
    if (__builtin_popcount(b) != 4) continue;
    ++total;
    exactly += longest_run(b, 6) == 3;
  }
  CHECK(total == 15);
  CHECK(runs_given_k(6, 3, 4) == doctest::Approx(static_cast<double>(exactly) / total));
}

TEST_CASE("runs_given_k is the exact longest-run law for L <= 16") {
  for (int L = 1; L <= 16; ++L) {
    // counts[k][j]: strings with k successes whose longest run is j
    std::vector<std::vector<long>> counts(L + 1, std::vector<long>(L + 1, 0));
    for (unsigned b = 0; b < (1u << L); ++b) counts[__builtin_popcount(b)][longest_run(b, L)]++;
    for (int k = 0; k <= L; ++k) {
      long n_k = 0;
      for (long c : counts[k]) n_k += c;
      cpp_rational mass = 0;
      for (int j = (L + 1) / 2; j <= L; ++j) {
        const cpp_rational expected(counts[k][j], n_k);
        const cpp_rational got = runs_given_k<cpp_rational>(L, j, k);
        CHECK_MESSAGE(got == expected, "L=" << L << " j=" << j << " k=" << k);
        CHECK(got >= 0);
        CHECK(got <= 1);
        mass += got;
      }
      CHECK(mass <= 1);
    }
  }
}

TEST_CASE("run_failure_prob against exhaustive enumeration") {
  for (int w = 1; w <= 8; ++w) {
    const int L = 2 * w;
    for (int tenth = 1; tenth <= 9; ++tenth) {
      const cpp_rational q(tenth, 10);
      cpp_rational expected = 0;
      for (unsigned b = 0; b < (1u << L); ++b) {
        if (longest_run(b, L) < w) continue;
        const int k = __builtin_popcount(b);
        cpp_rational term = 1;
        for (int i = 0; i < k; ++i) term *= q;
        for (int i = 0; i < L - k; ++i) term *= 1 - q;
        expected += term;
      }
      CHECK(run_failure_prob<cpp_rational>(w, q) == expected);
      CHECK(run_failure_prob(w, tenth / 10.0) == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
    }
  }
}

TEST_CASE("run_failure_prob values and shape") {
  CHECK(run_failure_prob(1, 0.5) == doctest::Approx(0.75));
  for (int w : {1, 5, 30, 31, 80}) {
    CHECK(run_failure_prob(w, 1.0) == doctest::Approx(1.0));
    CHECK(run_failure_prob(w, 0.0) == 0.0);
    // closed form q^w (1 + w (1 - q)); exercises the log-space path above L = 60
    for (double q : {0.2, 0.7, 0.95}) {
      CHECK(run_failure_prob(w, q) == doctest::Approx(std::pow(q, w) * (1 + w * (1 - q))).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(run_failure_prob(0, 0.5), ValidationError);
  CHECK_THROWS_AS(run_failure_prob(2, 1.5), ValidationError);

  // Monte Carlo over 1e6 strings of length 6
  Rng rng(3);
  int hits = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    int run = 0, best = 0;
    for (int s = 0; s < 6; ++s) {
      run = rng.uniform() < 0.3 ? run + 1 : 0;
      best = std::max(best, run);
    }
    hits += best >= 3;
  }
  CHECK(std::abs(run_failure_prob(3, 0.3) - static_cast<double>(hits) / n) < 0.002);

  for (int w = 1; w <= 20; ++w) {
    double prev = -1.0;
    for (int i = 0; i <= 20; ++i) {
      const double v = run_failure_prob(w, i / 20.0);
      CHECK(v >= prev - 1e-15);
      prev = v;
      if (w > 1) CHECK(v <= run_failure_prob(w - 1, i / 20.0) + 1e-15);
    }
  }
}

TEST_CASE("black-out query bookkeeping") {
  const Scenario s = platoon(4.0);
  const BlackoutQuery q = BlackoutQuery::make(s, 2.0);
  CHECK(q.x == 20);
  CHECK(q.N == 50);
  CHECK(q.N_H == 8);
  CHECK(q.N_T() == 42);
  CHECK(q.N_s == 100);
  CHECK_THROWS_AS(BlackoutQuery::make(Scenario::build(Scenario::defaults(4.0)), 2.0), UnsupportedModel);
  CHECK_THROWS_AS(BlackoutQuery::make(s, 0.01), ValidationError);
}

TEST_CASE("conditional black-out probability") {
  const Scenario s = platoon(4.0);
  const BlackoutQuery q = BlackoutQuery::make(s, 2.0);
  const double phi = 0.8;
  // few packets: the silence after the harvest phase is long enough on its own
  CHECK(blackout_probability(q, QuantizedPmf::unit(100, q.N - q.x + 1, PmfRole::post_harvest), phi) == 1.0);
  const int i = 40;
  CHECK(blackout_probability(q, QuantizedPmf::unit(100, i, PmfRole::post_harvest), phi) ==
        doctest::Approx(run_failure_prob(i - q.N + q.x - 1, 1 - phi)));
  // transmissions are capped by the transmit phase
  CHECK(blackout_probability(q, QuantizedPmf::unit(100, 90, PmfRole::post_harvest), phi) ==
        doctest::Approx(run_failure_prob(q.N_T() - q.N + q.x - 1, 1 - phi)));

  BlackoutQuery short_x = q;
  short_x.x = q.N_H;
  CHECK(blackout_probability(short_x, QuantizedPmf::unit(100, 90, PmfRole::post_harvest), phi) == 1.0);
}

TEST_CASE("black-out probability on default platoons") {
  CHECK(blackout_probability(platoon(10.0), 2.0) == 1.0);
  CHECK(blackout_probability(platoon(9.5), 1.5) == 1.0);

  for (double ell : {2.0, 4.0, 6.0}) {
    const Scenario s = platoon(ell, 60e-6);
    double prev = 2.0;
    for (double Qs = 0.5; Qs <= 4.0 + 1e-9; Qs += 0.1) {
      const double p = blackout_probability(s, Qs);
      CHECK(p >= 0.0);
      CHECK(p <= prev + 1e-12);
      prev = p;
    }
  }
  // the harvest phase fills the window as ell approaches x v0 T / 2
  const double Qs = 2.0;
  double prev = 0.0;
  for (double ell : {7.0, 8.0, 9.0, 10.0}) {
    const double p = blackout_probability(platoon(ell, 60e-6), Qs);
    CHECK(p >= prev - 1e-12);
    prev = p;
  }
  CHECK(prev == 1.0);
}

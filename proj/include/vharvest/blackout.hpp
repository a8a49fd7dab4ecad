#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "vharvest/battery_chain.hpp"
#include "vharvest/errors.hpp"
#include "vharvest/scenario.hpp"

namespace vharvest {

/// Slot bookkeeping for one black-out query on a platoon scenario.
struct BlackoutQuery {
  double Qs = 2.0;   // AoI threshold [s]
  int x = 0;         // threshold in slots, round(Qs/T)
  int N = 0;         // cycle slots, d0/(v0 T)
  int N_H = 0;       // harvest-phase slots
  int N_s = 0;

  int N_T() const { return N - N_H; }

  /// Throws UnsupportedModel for Poisson traffic, ValidationError if x < 1.
  static BlackoutQuery make(const Scenario& s, double Qs);
};

namespace detail {

// Binomial coefficient as Real; 0 outside 0 <= r <= n.
template <class Real>
Real binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return Real(0);
  r = std::min(r, n - r);
  Real c(1);
  for (int i = 1; i <= r; ++i) {
    c *= Real(n - r + i);
    c /= Real(i);
  }
  return c;
}

inline double log_binomial(int n, int r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

inline constexpr int kLogSpaceAbove = 60;

}  // namespace detail

/// Q(L, j | k): probability that the longest success run among L attempts is
/// exactly j, given k successes placed uniformly. Only valid for j >= L/2,
/// where a run of length j is necessarily unique.
template <class Real = double>
Real runs_given_k(int L, int j, int k) {
  if (L < 1) throw ValidationError("L", "must be >= 1");
  if (k < 0 || k > L) throw ValidationError("k", "must lie in [0, L]");
  if (j > L) throw ValidationError("j", "must be <= L");
  if (2 * j < L) throw ValidationError("j", "run formula only holds for j >= L/2");
  if (k == L) return j == L ? Real(1) : Real(0);
  if (j > k) return Real(0);
  if (k == L - 1) return Real(2) / Real(L);
  if constexpr (std::is_floating_point_v<Real>) {
    if (L > detail::kLogSpaceAbove) {
      const double denom = detail::log_binomial(L, k);
      double out = 0.0;
      if (k - j <= L - j - 1) out += 2.0 * std::exp(detail::log_binomial(L - j - 1, k - j) - denom);
      if (L - j - 2 >= 0 && k - j <= L - j - 2) {
        out += (L - j - 1) * std::exp(detail::log_binomial(L - j - 2, k - j) - denom);
      }
      return static_cast<Real>(out);
    }
  }
  const Real num = Real(2) * detail::binomial<Real>(L - j - 1, k - j) +
                   Real(L - j - 1) * detail::binomial<Real>(L - j - 2, k - j);
  return num / detail::binomial<Real>(L, k);
}

/// phi(w, q): probability of at least w consecutive successes among 2w
/// i.i.d. attempts with success probability q.
template <class Real = double>
Real run_failure_prob(int w, Real q) {
  if (w < 1) throw ValidationError("runLen", "must be >= 1");
  if (q < Real(0) || q > Real(1)) throw ValidationError("q", "must lie in [0, 1]");
  const int L = 2 * w;
  Real total(0);
  for (int k = w; k <= L; ++k) {
    Real binom_mass;
    if constexpr (std::is_floating_point_v<Real>) {
      if (L > detail::kLogSpaceAbove) {
        if (q == Real(0) || (q == Real(1) && k < L)) continue;
        double lp = detail::log_binomial(L, k) + k * std::log(static_cast<double>(q));
        if (k < L) lp += (L - k) * std::log1p(-static_cast<double>(q));
        binom_mass = static_cast<Real>(std::exp(lp));
      } else {
        binom_mass = detail::binomial<Real>(L, k) * std::pow(q, k) * std::pow(Real(1) - q, L - k);
      }
    } else {
      Real qk(1), pk(1);
      for (int i = 0; i < k; ++i) qk *= q;
      for (int i = 0; i < L - k; ++i) pk *= Real(1) - q;
      binom_mass = detail::binomial<Real>(L, k) * qk * pk;
    }
    Real runs(0);
    for (int j = w; j <= k; ++j) runs += runs_given_k<Real>(L, j, k);
    total += runs * binom_mass;
  }
  return total;
}

/// P_BO(x) for one cycle given the post-harvest battery pmf.
/// Transmissions per cycle are capped at N_T.
double blackout_probability(const BlackoutQuery& query, const QuantizedPmf& p_hat_B, double phi_s);

/// Convenience: full chain for scenario `s`, threshold Qs seconds.
double blackout_probability(const Scenario& s, double Qs);

}  // namespace vharvest

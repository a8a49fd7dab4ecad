#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vharvest/errors.hpp"

namespace vharvest::numeric {

/// Adaptive Gauss-Kronrod (15-point) integral of `f` over [a, b] to absolute
/// tolerance `abs_tol`. Throws NumericalError when the error estimate ends
/// well above tolerance at maximum depth.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol) {
  if (!(b > a)) return 0.0;
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  double error = 0.0;
  double l1 = 0.0;
  // Boost terminates on relative error; a single-panel pass gives the scale
  // that turns the absolute tolerance into a relative one. The floor keeps
  // the request above the integrand's own rounding noise.
  rule::integrate(f, a, b, 0, 1.0, &error, &l1);
  const double rel_tol = l1 > 0.0 ? std::clamp(abs_tol / l1, 1e-10, 0.1) : 0.1;
  const double value = rule::integrate(f, a, b, 25, rel_tol, &error, &l1);
  // Boost's summed estimate can land a few percent over the goal it stopped
  // on; only a clear miss counts as non-convergence.
  if (!(error <= 10.0 * abs_tol) && !(error <= 10.0 * rel_tol * l1)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "quadrature did not converge on [%.6g, %.6g]: error estimate %.3g > tolerance %.3g",
                  a, b, error, abs_tol);
    throw NumericalError(msg);
  }
  return value;
}

/// Same as `integrate` but splits [a, b] at the interior `breaks` so that
/// known discontinuities land on panel boundaries.
template <class F>
double integrate_split(F&& f, double a, double b, double abs_tol, std::vector<double> breaks) {
  if (!(b > a)) return 0.0;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double x) { return !(x > a && x < b); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  double lo = a;
  const double share = abs_tol / static_cast<double>(breaks.size() + 1);
  for (double x : breaks) {
    total += integrate(f, lo, x, share);
    lo = x;
  }
  return total + integrate(f, lo, b, share);
}

/// Standard normal CDF and density.
inline double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }
inline double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI); }

}  // namespace vharvest::numeric

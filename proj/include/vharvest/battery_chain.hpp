#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vharvest/energy_cdf.hpp"
#include "vharvest/scenario.hpp"

namespace vharvest {

enum class PmfRole { harvest, transmit, battery, post_harvest, stationary };

const char* to_string(PmfRole role);

/// Probability mass over battery quanta {0, ..., N_s}.
struct QuantizedPmf {
  std::vector<double> p;
  PmfRole role = PmfRole::battery;

  int N_s() const noexcept { return static_cast<int>(p.size()) - 1; }
  double operator[](std::size_t k) const { return p[k]; }
  double sum() const;
  double mean() const;

  static QuantizedPmf unit(int N_s, int k, PmfRole role);
};

/// CDF of the inter-vehicle distance d_v, with known jump locations.
struct SpacingCdf {
  std::function<double(double)> cdf;
  std::vector<double> jumps;
  double mean = 0.0;

  double operator()(double y) const { return y <= 0.0 ? 0.0 : cdf(y); }
};

SpacingCdf spacing_cdf(const TrafficModel& traffic);

/// Exponential spacing shifted by a minimum distance `d_min`:
/// F_D(y) = 1 - exp(-mu (y - d_min)) for y >= d_min.
SpacingCdf shifted_exponential_spacing(double mu, double d_min);

/// p_E(k): quanta harvested in one harvest phase, E_h rounded down to a
/// multiple of E_tx, saturating at N_s.
QuantizedPmf harvest_quanta_pmf(const EnergyCdf& cdf, const Derived& d);

/// p_T(k): quanta the transmit phase can spend, capped at N_s.
QuantizedPmf tp_quanta_pmf(const TrafficModel& traffic, const Derived& d, double ell);

/// p_T(k) from an arbitrary spacing distribution.
QuantizedPmf tp_quanta_pmf(const SpacingCdf& spacing, const Derived& d, double ell);

/// Row-stochastic (N_s+1)x(N_s+1) battery transition matrix, row-major.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(int n_states) : n_(n_states), m_(static_cast<std::size_t>(n_states) * n_states, 0.0) {}

  int size() const noexcept { return n_; }
  double operator()(int i, int j) const { return m_[index(i, j)]; }
  double& operator()(int i, int j) { return m_[index(i, j)]; }
  std::span<const double> row(int i) const {
    return {m_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
  }
  /// pi * M
  std::vector<double> left_multiply(std::span<const double> pi) const;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_;
  std::vector<double> m_;
};

/// Battery chain over a cycle: harvest h ~ p_E quanta (capped at N_s), then
/// spend k ~ p_T quanta (floored at 0). Throws NumericalError if a row sum
/// deviates from 1 by more than 1e-9.
TransitionMatrix transition_matrix(const QuantizedPmf& p_E, const QuantizedPmf& p_T);

struct StationaryResult {
  QuantizedPmf pi;
  double residual = 0.0;     // ||pi M - pi||_1
  std::size_t iterations = 0;
  bool reducible = false;    // more than one closed communicating class
};

/// Stationary distribution by (lazy) power iteration from the uniform vector,
/// to residual < 1e-12 within 1e6 iterations; NumericalError otherwise.
StationaryResult steady_state(const TransitionMatrix& M);

/// Battery level right after the harvest phase: p_B convolved with p_E, with
/// the overflow folded into state N_s.
QuantizedPmf post_harvest_pmf(const QuantizedPmf& p_B, const QuantizedPmf& p_E);

}  // namespace vharvest

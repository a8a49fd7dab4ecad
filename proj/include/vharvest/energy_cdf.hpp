#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vharvest/scenario.hpp"

namespace vharvest {

/// Inverse mean energies of the L harvest-phase slots.
///
/// Slot i sees the vehicle at the midpoint (i + 1/2) v0 T - ell of its road
/// segment, so lambda[i] = (w^2 + x_i^2)^{alpha/2} / (eta Pv T). The list is
/// mirror-symmetric and strictly decreasing on the first half.
struct SegmentRates {
  std::vector<double> lambda;

  std::size_t size() const noexcept { return lambda.size(); }
  /// lambda_hat[i] = 2 (kappa + 1) lambda[i]
  std::vector<double> lambda_hat(double kappa) const;
  /// E[E_h] = sum 1/lambda_i
  double mean() const;
  /// Var[E_h] for Rician fading with Rice factor kappa.
  double variance(double kappa) const;
};

SegmentRates segment_rates(const Scenario& s);

/// Cumulant generating function of E_h and its first three derivatives.
struct CgfValue {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
  double third = 0.0;
};

/// Supremum of the MGF domain, min_i lambda_hat_i / 2.
double cgf_domain_limit(const SegmentRates& rates, double kappa);

/// K_E(t), K'_E(t), K''_E(t), K'''_E(t). Throws std::domain_error for t at or
/// beyond `cgf_domain_limit`.
CgfValue cgf_and_derivatives(const SegmentRates& rates, double kappa, double t);

enum class CdfKind { saddle_rician, hypoexp_rayleigh, empirical, custom };

const char* to_string(CdfKind kind);

/// Immutable, shareable CDF of the per-cycle harvested energy.
class EnergyCdf {
 public:
  class Model {
   public:
    virtual ~Model() = default;
    virtual double cdf(double x) const = 0;
  };

  EnergyCdf(std::shared_ptr<const Model> model, CdfKind kind, double mean,
            std::vector<double> sorted_samples = {});

  /// Wraps an arbitrary CDF (used for degenerate or synthetic cases).
  static EnergyCdf from_function(std::function<double(double)> cdf, double mean);

  /// F_E(x), clamped to [0, 1]; 0 for x <= 0.
  double operator()(double x) const;

  CdfKind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }

  /// Inverse CDF. Exact order statistic for empirical CDFs, bisection otherwise.
  double quantile(double p) const;

  /// Sorted draws backing an empirical CDF (empty otherwise).
  const std::vector<double>& samples() const noexcept { return *samples_; }

  /// Set when a constructor had to fall back to a different method.
  const std::string& note() const noexcept { return note_; }
  EnergyCdf with_note(std::string note) const;

 private:
  std::shared_ptr<const Model> model_;
  CdfKind kind_;
  double mean_;
  std::shared_ptr<const std::vector<double>> samples_;
  std::string note_;
};

/// Lugannani-Rice saddle-point approximation for Rician fading (any kappa >= 0).
EnergyCdf saddle_cdf(const SegmentRates& rates, double kappa);

/// Exact CDF under Rayleigh fading: self-convolution of the half-cycle
/// hypoexponential. Falls back to a 10^6-draw empirical CDF (noted) when
/// two half-cycle rates coincide within relative 1e-9.
EnergyCdf rayleigh_cdf(const SegmentRates& rates);

/// Sorted-sample CDF of `n_draws` Monte Carlo draws of E_h. Deterministic in `seed`.
EnergyCdf empirical_cdf(const SegmentRates& rates, const FadingModel& fading,
                        std::size_t n_draws, std::uint64_t seed);

/// Analytic CDF matching the scenario's fading model.
EnergyCdf analytic_cdf(const Scenario& s);

/// Probability band used by `accuracy_metric`.
struct AccuracyRange {
  double lo = 0.001;
  double hi = 0.5;
  bool complementary = false;
};

/// Mean relative deviation between `analytic` and `empirical` over the points
/// where lo < F_empirical < hi. The reference is F_emp (or 1 - F_emp when
/// `complementary`). Evaluated at the empirical quantiles of 1000 evenly
/// spaced probability levels spanning the band.
double accuracy_metric(const EnergyCdf& analytic, const EnergyCdf& empirical,
                       AccuracyRange range = {});

struct CdfAccuracy {
  double cdf = 0.0;
  double ccdf = 0.0;
};

/// Accuracy on the CDF band (0.001, 0.5) and the cCDF band (0.5, 0.999).
CdfAccuracy cdf_accuracy(const EnergyCdf& analytic, const EnergyCdf& empirical);

/// Maximum |F - G| over the points of `grid`.
double ks_distance(const EnergyCdf& a, const EnergyCdf& b, const std::vector<double>& grid);

/// Kolmogorov-Smirnov distance between an empirical CDF and `other`, taken
/// over the empirical sample (sup over both sides of each jump).
double ks_distance(const EnergyCdf& empirical, const EnergyCdf& other);

}  // namespace vharvest

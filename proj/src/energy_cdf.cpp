#include "vharvest/energy_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <boost/math/tools/roots.hpp>

#include "vharvest/errors.hpp"
#include "vharvest/numeric.hpp"
#include "vharvest/random.hpp"

namespace vharvest {

// ---------------------------------------------------------------------------
// Segment rates and cumulants

std::vector<double> SegmentRates::lambda_hat(double kappa) const {
  std::vector<double> out(lambda.size());
  std::transform(lambda.begin(), lambda.end(), out.begin(),
                 [kappa](double l) { return 2.0 * (kappa + 1.0) * l; });
  return out;
}

double SegmentRates::mean() const {
  double sum = 0.0;
  for (double l : lambda) sum += 1.0 / l;
  return sum;
}

double SegmentRates::variance(double kappa) const {
  const double scale = (1.0 + 2.0 * kappa) / ((1.0 + kappa) * (1.0 + kappa));
  double sum = 0.0;
  for (double l : lambda) sum += scale / (l * l);
  return sum;
}

SegmentRates segment_rates(const Scenario& s) {
  const auto& p = s.params();
  const auto& d = s.derived();
  const double per_slot = p.eta * p.Pv * p.T;
  SegmentRates rates;
  rates.lambda.resize(static_cast<std::size_t>(d.L));
  const int half = d.L / 2;
  for (int i = 0; i < half; ++i) {
    const double x = (i + 0.5) * d.step - p.ell;
    const double lam = std::pow(p.w_off * p.w_off + x * x, p.alpha / 2.0) / per_slot;
    rates.lambda[static_cast<std::size_t>(i)] = lam;
    rates.lambda[static_cast<std::size_t>(d.L - 1 - i)] = lam;
  }
  return rates;
}

double cgf_domain_limit(const SegmentRates& rates, double kappa) {
  const double min_lambda = *std::min_element(rates.lambda.begin(), rates.lambda.end());
  return (kappa + 1.0) * min_lambda;
}

CgfValue cgf_and_derivatives(const SegmentRates& rates, double kappa, double t) {
  if (!(t < cgf_domain_limit(rates, kappa))) {
    throw std::domain_error("cgf: t = " + std::to_string(t) + " outside the MGF domain");
  }
  CgfValue out;
  for (double lam : rates.lambda) {
    const double lh = 2.0 * (kappa + 1.0) * lam;
    const double a = lh - 2.0 * t;
    const double ratio = kappa * lh / a;
    out.value += -std::log1p(-2.0 * t / lh) + 2.0 * kappa * t / a;
    out.first += 2.0 / a * (1.0 + ratio);
    out.second += 4.0 / (a * a) * (1.0 + 2.0 * ratio);
    out.third += 16.0 / (a * a * a) * (1.0 + 3.0 * ratio);
  }
  return out;
}

// ---------------------------------------------------------------------------
// EnergyCdf

const char* to_string(CdfKind kind) {
  switch (kind) {
    case CdfKind::saddle_rician: return "saddle_rician";
    case CdfKind::hypoexp_rayleigh: return "hypoexp_rayleigh";
    case CdfKind::empirical: return "empirical";
    case CdfKind::custom: return "custom";
  }
  return "unknown";
}

EnergyCdf::EnergyCdf(std::shared_ptr<const Model> model, CdfKind kind, double mean,
                     std::vector<double> sorted_samples)
    : model_(std::move(model)),
      kind_(kind),
      mean_(mean),
      samples_(std::make_shared<const std::vector<double>>(std::move(sorted_samples))) {}

namespace {

class FunctionModel final : public EnergyCdf::Model {
 public:
  explicit FunctionModel(std::function<double(double)> f) : f_(std::move(f)) {}
  double cdf(double x) const override { return f_(x); }

 private:
  std::function<double(double)> f_;
};

class SampleModel final : public EnergyCdf::Model {
 public:
  explicit SampleModel(std::shared_ptr<const std::vector<double>> sorted)
      : sorted_(std::move(sorted)) {}
  double cdf(double x) const override {
    const auto it = std::upper_bound(sorted_->begin(), sorted_->end(), x);
    return static_cast<double>(it - sorted_->begin()) / static_cast<double>(sorted_->size());
  }

 private:
  std::shared_ptr<const std::vector<double>> sorted_;
};

}  // namespace

EnergyCdf EnergyCdf::from_function(std::function<double(double)> cdf, double mean) {
  return EnergyCdf(std::make_shared<FunctionModel>(std::move(cdf)), CdfKind::custom, mean);
}

double EnergyCdf::operator()(double x) const {
  if (!(x > 0.0)) return 0.0;
  return std::clamp(model_->cdf(x), 0.0, 1.0);
}

double EnergyCdf::quantile(double p) const {
  p = std::clamp(p, 0.0, 1.0);
  if (!samples_->empty()) {
    const auto n = samples_->size();
    auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    idx = std::clamp<std::size_t>(idx, 1, n) - 1;
    return (*samples_)[idx];
  }
  double lo = 0.0;
  double hi = std::max(mean_, std::numeric_limits<double>::min());
  while ((*this)(hi) < p && hi < 1e6 * std::max(mean_, 1e-300)) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((*this)(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EnergyCdf EnergyCdf::with_note(std::string note) const {
  EnergyCdf copy = *this;
  copy.note_ = std::move(note);
  return copy;
}

// ---------------------------------------------------------------------------
// Saddle point (Lugannani-Rice)

namespace {

// t K'_i(t) - K_i(t) for one summand, written in rho = 2t/lambda_hat_i so that
// the O(rho^2) result carries no cancellation near the mean.
double legendre_term(double rho, double kappa) {
  double base = 0.0;
  if (std::abs(rho) < 0.25) {
    double power = rho;
    for (int n = 2; n < 64; ++n) {
      power *= rho;
      const double term = (1.0 - 1.0 / n) * power;
      base += term;
      if (std::abs(term) < 1e-18 * std::abs(base)) break;
    }
  } else {
    base = rho / (1.0 - rho) + std::log1p(-rho);
  }
  const double q = rho / (1.0 - rho);
  return base + kappa * q * q;
}

class SaddleModel final : public EnergyCdf::Model {
 public:
  SaddleModel(SegmentRates rates, double kappa)
      : rates_(std::move(rates)),
        kappa_(kappa),
        lambda_hat_(rates_.lambda_hat(kappa)),
        limit_(cgf_domain_limit(rates_, kappa)) {
    // Cumulants k_n = K^(n)(0) = sum (2/lh)^n [(n-1)! + n! kappa].
    double k[7] = {};
    for (double lh : lambda_hat_) {
      double scale = 1.0;
      double fact = 1.0;  // (n-1)!
      for (int n = 1; n <= 6; ++n) {
        scale *= 2.0 / lh;
        k[n] += scale * (fact + fact * n * kappa_);
        fact *= n;
      }
    }
    sigma_ = std::sqrt(k[2]);
    const double s2 = k[2];
    const double s3 = s2 * sigma_;
    // Taylor coefficients in z of 1/w - 1/u around the mean, where the
    // closed form cancels catastrophically.
    series_[0] = k[3] / (6.0 * s3);
    series_[1] = -(5.0 * k[3] * k[3] - 3.0 * k[4] * s2) / (24.0 * s3 * s2);
    series_[2] = (475.0 * std::pow(k[3], 3) - 540.0 * k[3] * k[4] * s2 + 108.0 * k[5] * s2 * s2) /
                 (2160.0 * s3 * s2 * s2);
    series_[3] = -(11375.0 * std::pow(k[3], 4) - 18900.0 * k[3] * k[3] * k[4] * s2 +
                   4752.0 * k[3] * k[5] * s2 * s2 + 3645.0 * k[4] * k[4] * s2 * s2 -
                   720.0 * k[6] * s2 * s2 * s2) /
                 (51840.0 * s3 * s3 * s3);
  }

  double cdf(double x) const override {
    const double z = solve(x);
    const CgfValue k = cgf_and_derivatives(rates_, kappa_, z);
    double legendre = z * (x - k.first);
    for (double lh : lambda_hat_) legendre += legendre_term(2.0 * z / lh, kappa_);
    legendre = std::max(legendre, 0.0);
    const double u = std::copysign(std::sqrt(2.0 * legendre), z);
    double correction = 0.0;
    if (std::abs(z) * sigma_ < 1e-2) {
      correction = series_[0] + z * (series_[1] + z * (series_[2] + z * series_[3]));
    } else {
      correction = 1.0 / u - 1.0 / (z * std::sqrt(k.second));
    }
    return numeric::normal_cdf(u) + numeric::normal_pdf(u) * correction;
  }

 private:
  // Solves K'(t) = x. K' increases from 0 (t -> -inf) to +inf (t -> limit).
  double solve(double x) const {
    auto slope = [&](double t) { return cgf_and_derivatives(rates_, kappa_, t).first; };
    double lo = -limit_;
    int guard = 0;
    while (slope(lo) >= x) {
      lo *= 2.0;
      if (++guard > 2000) throw NumericalError("saddle point: lower bracket not found for x = " + std::to_string(x));
    }
    double gap = 0.5 * limit_;
    guard = 0;
    while (slope(limit_ - gap) <= x) {
      gap *= 0.5;
      if (++guard > 1000 || gap <= 0.0) {
        throw NumericalError("saddle point: upper bracket not found for x = " + std::to_string(x));
      }
    }
    const double hi = limit_ - gap;
    double guess = 0.0;
    if (!(guess > lo && guess < hi)) guess = 0.5 * (lo + hi);
    auto f = [&](double t) {
      const CgfValue k = cgf_and_derivatives(rates_, kappa_, t);
      return std::make_tuple(k.first - x, k.second);
    };
    std::uintmax_t iters = 500;
    const double root = boost::math::tools::newton_raphson_iterate(f, guess, lo, hi, 46, iters);
    if (iters >= 500) {
      throw NumericalError("saddle point: Newton iteration did not converge for x = " +
                           std::to_string(x) + " (bracket [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "])");
    }
    return root;
  }

  SegmentRates rates_;
  double kappa_;
  std::vector<double> lambda_hat_;
  double limit_;
  double sigma_ = 0.0;
  double series_[4] = {};
};

// ---------------------------------------------------------------------------
// Rayleigh: E_h = E1 + E2 with E1, E2 i.i.d. hypoexponential over the first
// half of the rates.

class HypoexpModel final : public EnergyCdf::Model {
 public:
  explicit HypoexpModel(std::vector<double> half_rates) {
    scale_ = 0.0;
    for (double l : half_rates) scale_ += 1.0 / l;
    for (double l : half_rates) rates_.push_back(static_cast<long double>(l) * scale_);
    const std::size_t n = rates_.size();
    prod_diff_.assign(n, 1.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i) prod_diff_[i] *= rates_[k] - rates_[i];
      }
    }
    a_ = 1.0L;
    for (long double l : rates_) a_ *= l * l;
  }

  double cdf(double x) const override {
    const long double y = static_cast<long double>(x) / scale_;
    const std::size_t n = rates_.size();
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const long double li = rates_[i];
      const long double ei = std::exp(-li * y);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const long double lj = rates_[j];
        sum += (std::exp(-lj * y) / lj - ei / li) / ((li - lj) * prod_diff_[i] * prod_diff_[j]);
      }
      sum += ei * (1.0L + li * y) / (li * li * prod_diff_[i] * prod_diff_[i]);
    }
    return static_cast<double>(1.0L - a_ * sum);
  }

 private:
  double scale_ = 1.0;  // rates are stored in units of 1/mean(E1)
  std::vector<long double> rates_;
  std::vector<long double> prod_diff_;
  long double a_ = 1.0L;
};

}  // namespace

EnergyCdf saddle_cdf(const SegmentRates& rates, double kappa) {
  if (rates.size() < 2) throw ValidationError("L", "saddle CDF needs at least two segments");
  if (!(kappa >= 0.0)) throw ValidationError("kappa", "Rice factor must be >= 0");
  return EnergyCdf(std::make_shared<SaddleModel>(rates, kappa), CdfKind::saddle_rician,
                   rates.mean());
}

EnergyCdf rayleigh_cdf(const SegmentRates& rates) {
  const std::size_t n = rates.size();
  if (n < 2 || n % 2 != 0) {
    throw ValidationError("L", "Rayleigh CDF needs an even number of segments");
  }
  std::vector<double> half(rates.lambda.begin(),
                           rates.lambda.begin() + static_cast<std::ptrdiff_t>(n / 2));
  for (std::size_t i = 0; i < half.size(); ++i) {
    for (std::size_t j = i + 1; j < half.size(); ++j) {
      if (std::abs(half[i] - half[j]) <= 1e-9 * std::max(half[i], half[j])) {
        return empirical_cdf(rates, Rayleigh{}, 1'000'000, 0x5eedULL)
            .with_note("near-equal segment rates; hypoexponential closed form replaced by "
                       "an empirical CDF");
      }
    }
  }
  return EnergyCdf(std::make_shared<HypoexpModel>(std::move(half)), CdfKind::hypoexp_rayleigh,
                   rates.mean());
}

EnergyCdf empirical_cdf(const SegmentRates& rates, const FadingModel& fading,
                        std::size_t n_draws, std::uint64_t seed) {
  if (n_draws < 10'000) throw ValidationError("n_draws", "empirical CDF needs at least 1e4 draws");
  Rng rng(derive_seed(seed, 0xcdf));
  const FadingSampler gain(fading);
  auto samples = std::vector<double>(n_draws);
  double total = 0.0;
  for (auto& e : samples) {
    double sum = 0.0;
    for (double lam : rates.lambda) sum += gain(rng) / lam;
    e = sum;
    total += sum;
  }
  std::sort(samples.begin(), samples.end());
  auto shared = std::make_shared<const std::vector<double>>(samples);
  return EnergyCdf(std::make_shared<SampleModel>(shared), CdfKind::empirical,
                   total / static_cast<double>(n_draws), std::move(samples));
}

EnergyCdf analytic_cdf(const Scenario& s) {
  const SegmentRates rates = segment_rates(s);
  if (std::holds_alternative<Rayleigh>(s.params().fading)) return rayleigh_cdf(rates);
  return saddle_cdf(rates, s.kappa());
}

// ---------------------------------------------------------------------------
// Comparison metrics

double accuracy_metric(const EnergyCdf& analytic, const EnergyCdf& empirical,
                       AccuracyRange range) {
  if (!(range.hi > range.lo)) throw ValidationError("range", "empty accuracy range");
  constexpr int kLevels = 1000;
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < kLevels; ++i) {
    const double p = range.lo + (range.hi - range.lo) * (i + 0.5) / kLevels;
    const double x = empirical.quantile(p);
    const double ref = empirical(x);
    if (!(ref > range.lo && ref < range.hi)) continue;
    const double diff = std::abs(analytic(x) - ref);
    sum += diff / (range.complementary ? 1.0 - ref : ref);
    ++count;
  }
  if (count == 0) throw ValidationError("range", "no evaluation points fall inside the range");
  return sum / count;
}

CdfAccuracy cdf_accuracy(const EnergyCdf& analytic, const EnergyCdf& empirical) {
  return {accuracy_metric(analytic, empirical, {0.001, 0.5, false}),
          accuracy_metric(analytic, empirical, {0.5, 0.999, true})};
}

double ks_distance(const EnergyCdf& a, const EnergyCdf& b, const std::vector<double>& grid) {
  double worst = 0.0;
  for (double x : grid) worst = std::max(worst, std::abs(a(x) - b(x)));
  return worst;
}

double ks_distance(const EnergyCdf& empirical, const EnergyCdf& other) {
  const auto& xs = empirical.samples();
  if (xs.empty()) throw ValidationError("empirical", "KS distance needs a sample-backed CDF");
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = other(xs[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f),
                      std::abs(static_cast<double>(i) / n - f)});
  }
  return worst;
}

}  // namespace vharvest

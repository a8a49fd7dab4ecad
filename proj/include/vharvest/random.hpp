#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "vharvest/scenario.hpp"

namespace vharvest {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for substream `stream` of master seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Pinned generator: std::mt19937_64 (fully specified by the standard) with
/// hand-written variate transforms, so draws are bit-identical across
/// standard libraries. Bump kRngVersion if any transform changes.
class Rng {
 public:
  static constexpr int kRngVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Unit-rate exponential.
  double exponential() { return -std::log1p(-uniform()); }

  /// Standard normal (Box-Muller, one value per call, spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Draws the unit-mean power gain |h|^2 for a fading model.
class FadingSampler {
 public:
  explicit FadingSampler(const FadingModel& fading) {
    const double kappa = rice_factor(fading);
    los_ = std::sqrt(kappa / (kappa + 1.0));
    sigma_ = std::sqrt(0.5 / (kappa + 1.0));
    rayleigh_ = std::holds_alternative<Rayleigh>(fading);
  }

  double operator()(Rng& rng) const {
    if (rayleigh_) return rng.exponential();
    const double re = los_ + sigma_ * rng.normal();
    const double im = sigma_ * rng.normal();
    return re * re + im * im;
  }

 private:
  double los_ = 0.0;
  double sigma_ = 0.0;
  bool rayleigh_ = false;
};

}  // namespace vharvest

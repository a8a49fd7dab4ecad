#include "vharvest/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vharvest/errors.hpp"

namespace vharvest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double value, const char* field) {
  if (!std::isfinite(value)) {
    throw ValidationError(field, "must be finite");
  }
  if (!(value > 0.0)) {
    throw ValidationError(field, "must be strictly positive, got " + std::to_string(value));
  }
}

// Values this close to an integer are treated as that integer.
constexpr double kSnapTol = 1e-9;

}  // namespace

double rice_factor(const FadingModel& fading) {
  return std::visit(overloaded{[](const Rician& r) { return r.kappa; },
                               [](const Rayleigh&) { return 0.0; }},
                    fading);
}

double mean_spacing(const TrafficModel& traffic) {
  return std::visit(overloaded{[](const Poisson& p) { return 1.0 / p.mu; },
                               [](const Platoon& p) { return p.d0; }},
                    traffic);
}

bool is_platoon(const TrafficModel& traffic) {
  return std::holds_alternative<Platoon>(traffic);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

ScenarioParams Scenario::defaults(double ell) {
  ScenarioParams p;
  p.ell = ell;
  return p;
}

Scenario Scenario::build(const ScenarioParams& raw) {
  require_positive(raw.r, "r");
  require_positive(raw.w_off, "w_off");
  require_positive(raw.T, "T");
  require_positive(raw.v0, "v0");
  require_positive(raw.Pt, "Pt");
  require_positive(raw.Pv, "Pv");
  require_positive(raw.N0, "N0");
  require_positive(raw.alpha, "alpha");
  require_positive(raw.eta, "eta");
  require_positive(raw.B, "B");
  require_positive(raw.S, "S");
  require_positive(raw.G, "G");
  require_positive(raw.ell, "ell");
  if (raw.eta > 1.0) {
    throw ValidationError("eta", "must lie in (0, 1]");
  }
  if (!(raw.alpha > 1.0)) {
    throw ValidationError("alpha", "must exceed 1 for a finite energy density");
  }
  if (const auto* rc = std::get_if<Rician>(&raw.fading)) {
    if (!std::isfinite(rc->kappa) || rc->kappa < 0.0) {
      throw ValidationError("kappa", "Rice factor must be finite and >= 0");
    }
  }
  std::visit(overloaded{[](const Poisson& p) { require_positive(p.mu, "mu"); },
                        [](const Platoon& p) { require_positive(p.d0, "d0"); }},
             raw.traffic);

  Scenario s;
  s.params_ = raw;
  s.requested_ell_ = raw.ell;
  s.requested_G_ = raw.G;

  Derived& d = s.derived_;
  d.E_tx = raw.Pt * raw.T;
  d.step = raw.v0 * raw.T;
  d.m = raw.Pt / raw.v0;

  const double quanta = raw.G / d.E_tx;
  d.N_s = static_cast<int>(std::floor(quanta + kSnapTol * std::max(1.0, quanta)));
  if (d.N_s < 1) {
    throw ValidationError("G", "battery must hold at least one packet worth of energy");
  }
  const double snapped_G = d.N_s * d.E_tx;
  if (std::abs(snapped_G - raw.G) > kSnapTol * raw.G) {
    s.params_.G = snapped_G;
    s.capacity_snapped_ = true;
  }

  // Half the harvest phase must be an integer number of slots.
  const double half_slots = raw.ell / d.step;
  const long half = std::lround(half_slots);
  if (half < 1) {
    throw ValidationError("ell", "empty harvest phase: 2*ell/(v0*T) rounds to 0");
  }
  d.L = static_cast<int>(2 * half);
  if (std::abs(half_slots - static_cast<double>(half)) > kSnapTol * std::max(1.0, half_slots)) {
    s.params_.ell = static_cast<double>(half) * d.step;
    s.ell_snapped_ = true;
  }
  return s;
}

double decoding_probability(const ScenarioParams& p) {
  const double snr_scale = p.N0 * std::pow(p.r, p.alpha) / p.Pt;
  return std::exp(-snr_scale * std::expm1(std::log(2.0) * p.S / (p.B * p.T)));
}

double decoding_probability(const Scenario& s) { return decoding_probability(s.params()); }

}  // namespace vharvest

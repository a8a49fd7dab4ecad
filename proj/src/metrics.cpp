#include "vharvest/metrics.hpp"

#include <cmath>
#include <string>

#include "vharvest/errors.hpp"
#include "vharvest/numeric.hpp"

namespace vharvest {

namespace {

void check_quanta(int k, const Derived& d) {
  if (k < 0 || k > d.N_s) {
    throw ValidationError("k", "battery level " + std::to_string(k) + " outside [0, N_s]");
  }
}

// int_a^b f over an energy CDF. Step-function (sample-backed) CDFs defeat the
// adaptive error estimate, so they get a fixed composite Simpson rule.
template <class F>
double integrate_energy(const EnergyCdf& cdf, F&& f, double a, double b, double abs_tol,
                        std::vector<double> breaks = {}) {
  if (!(b > a)) return 0.0;
  if (cdf.kind() != CdfKind::empirical) {
    return numeric::integrate_split(f, a, b, abs_tol, std::move(breaks));
  }
  constexpr int kPanels = 4000;
  const double h = (b - a) / kPanels;
  double sum = f(a) + f(b);
  for (int i = 1; i < kPanels; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

double psi_general(int k, const EnergyCdf& cdf_E, const SpacingCdf& spacing, const Scenario& s) {
  const Derived& d = s.derived();
  check_quanta(k, d);
  const double ell = s.ell();
  const double tol = 1e-6 * d.N_s;
  const double lo = 2.0 * ell;
  const double W = d.W(ell);
  const double R = d.R(k, ell);
  const double delta = d.delta(k);

  const double spacing_term =
      numeric::integrate_split(spacing, lo, W, 0.5 * tol * d.step, spacing.jumps) / d.step;

  std::vector<double> energy_breaks;
  for (double jump : spacing.jumps) energy_breaks.push_back(d.m * (jump - R));
  auto integrand = [&](double y) { return cdf_E(y) * (1.0 - spacing(y / d.m + R)); };
  const double energy_term =
      integrate_energy(cdf_E, integrand, 0.0, delta, 0.5 * tol * d.E_tx, energy_breaks) / d.E_tx;

  return d.N_s - spacing_term - energy_term;
}

double psi_poisson(int k, const EnergyCdf& cdf_E, double mu, const Scenario& s) {
  const Derived& d = s.derived();
  check_quanta(k, d);
  if (!(mu > 0.0)) throw ValidationError("mu", "must be strictly positive");
  const double ell = s.ell();
  const double R = d.R(k, ell);
  const double decay = std::exp(-mu * R);
  const double short_gap = (std::exp(-2.0 * ell * mu) - decay) / (mu * d.step);
  if (decay == 0.0) return short_gap;
  auto integrand = [&](double y) { return (1.0 - cdf_E(y)) * std::exp(-mu * y / d.m); };
  const double tol = 1e-6 * d.N_s * d.E_tx / decay;
  return short_gap + decay * integrate_energy(cdf_E, integrand, 0.0, d.delta(k), tol) / d.E_tx;
}

double psi_platoon(int k, const EnergyCdf& cdf_E, double d0, const Scenario& s) {
  const Derived& d = s.derived();
  check_quanta(k, d);
  if (!(d0 > 0.0)) throw ValidationError("d0", "must be strictly positive");
  const double ell = s.ell();
  const double R = d.R(k, ell);
  if (d0 < 2.0 * ell) return 0.0;
  if (d0 < R) return (d0 - 2.0 * ell) / d.step;
  const double upper = d0 < d.W(ell) ? d.m * (d0 - R) : d.delta(k);
  auto survival = [&](double y) { return 1.0 - cdf_E(y); };
  const double tol = 1e-6 * d.N_s * d.E_tx;
  return k + integrate_energy(cdf_E, survival, 0.0, upper, tol) / d.E_tx;
}

std::vector<double> psi_table(const Scenario& s, const EnergyCdf& cdf_E) {
  const int n = s.derived().N_s;
  std::vector<double> psi(static_cast<std::size_t>(n) + 1);
  const auto& traffic = s.params().traffic;
  for (int k = 0; k <= n; ++k) {
    if (const auto* plat = std::get_if<Platoon>(&traffic)) {
      psi[static_cast<std::size_t>(k)] = psi_platoon(k, cdf_E, plat->d0, s);
    } else {
      psi[static_cast<std::size_t>(k)] = psi_poisson(k, cdf_E, std::get<Poisson>(traffic).mu, s);
    }
  }
  return psi;
}

ThroughputResult throughput(const Scenario& s, const EnergyCdf& cdf_E, const QuantizedPmf& p_B) {
  if (p_B.N_s() != s.derived().N_s) {
    throw ValidationError("p_B", "battery pmf support does not match N_s");
  }
  ThroughputResult out;
  out.psi = psi_table(s, cdf_E);
  out.phi_s = decoding_probability(s);
  out.ell = s.ell();
  out.platoon = is_platoon(s.params().traffic);
  double expected_tx = 0.0;
  for (std::size_t k = 0; k < out.psi.size(); ++k) expected_tx += p_B[k] * out.psi[k];
  out.theta_pkt = out.phi_s * s.params().v0 / s.mean_spacing() * expected_tx;
  out.theta_bits = out.theta_pkt * s.params().S;
  return out;
}

Analysis analyze(const Scenario& s, const EnergyCdf& cdf_E) {
  Analysis a;
  a.p_E = harvest_quanta_pmf(cdf_E, s.derived());
  a.p_T = tp_quanta_pmf(s.params().traffic, s.derived(), s.ell());
  a.M = transition_matrix(a.p_E, a.p_T);
  a.stationary = steady_state(a.M);
  a.throughput = throughput(s, cdf_E, a.stationary.pi);
  return a;
}

Analysis analyze(const Scenario& s) { return analyze(s, analytic_cdf(s)); }

double energy_density(double Pv, double w_off, double alpha, double mean_spacing) {
  if (!(alpha > 1.0)) {
    throw ValidationError("alpha", "energy density integral diverges for alpha <= 1");
  }
  return Pv / mean_spacing * std::sqrt(M_PI) * std::pow(w_off, 1.0 - alpha) *
         std::tgamma((alpha - 1.0) / 2.0) / std::tgamma(alpha / 2.0);
}

double energy_density(const Scenario& s) {
  const auto& p = s.params();
  return energy_density(p.Pv, p.w_off, p.alpha, s.mean_spacing());
}

EfficiencyResult efficiency(const Scenario& s, const ThroughputResult& theta) {
  EfficiencyResult out;
  out.epsilon = energy_density(s);
  out.upsilon = theta.theta_bits / out.epsilon;
  return out;
}

}  // namespace vharvest

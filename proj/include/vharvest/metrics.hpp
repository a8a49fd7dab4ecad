#pragma once

#include <vector>

#include "vharvest/battery_chain.hpp"
#include "vharvest/energy_cdf.hpp"
#include "vharvest/scenario.hpp"

namespace vharvest {

/// Psi(k) for a general spacing distribution, integrals by adaptive quadrature:
///   N_s - (1/(v0 T)) int_{2l}^{W} F_D
///       - (1/E_tx) int_0^{delta} F_E(y) [1 - F_D(y/m + R)] dy
double psi_general(int k, const EnergyCdf& cdf_E, const SpacingCdf& spacing, const Scenario& s);

/// Psi(k) under Poisson spacing (closed form plus one quadrature).
double psi_poisson(int k, const EnergyCdf& cdf_E, double mu, const Scenario& s);

/// Psi(k) under constant spacing d0 (four-branch form).
double psi_platoon(int k, const EnergyCdf& cdf_E, double d0, const Scenario& s);

/// Psi(k) for k = 0..N_s using the closed form matching the scenario's traffic.
std::vector<double> psi_table(const Scenario& s, const EnergyCdf& cdf_E);

/// Everything the analytic pipeline produces for one scenario.
struct ThroughputResult {
  double theta_pkt = 0.0;    // packets/s
  double theta_bits = 0.0;   // bits/s
  std::vector<double> psi;   // Psi(k), k = 0..N_s
  double phi_s = 0.0;
  double ell = 0.0;
  bool platoon = false;

  double theta_kbit() const { return theta_bits * 1e-3; }
};

/// Theta = (phi_s v0 / E[d_v]) sum_k p_B(k) Psi(k) for a given battery pmf.
ThroughputResult throughput(const Scenario& s, const EnergyCdf& cdf_E, const QuantizedPmf& p_B);

/// Full chain: p_E, p_T, M, steady state, Psi, Theta.
struct Analysis {
  QuantizedPmf p_E;
  QuantizedPmf p_T;
  TransitionMatrix M{1};
  StationaryResult stationary;
  ThroughputResult throughput;
};

Analysis analyze(const Scenario& s, const EnergyCdf& cdf_E);
Analysis analyze(const Scenario& s);

/// Average RF power density at the EHD:
/// (Pv / E[d_v]) sqrt(pi) w^{1-alpha} Gamma((alpha-1)/2) / Gamma(alpha/2).
double energy_density(const Scenario& s);
double energy_density(double Pv, double w_off, double alpha, double mean_spacing);

struct EfficiencyResult {
  double epsilon = 0.0;   // W
  double upsilon = 0.0;   // bit/J
};

/// Upsilon = S Theta / epsilon.
EfficiencyResult efficiency(const Scenario& s, const ThroughputResult& theta);

}  // namespace vharvest

#pragma once

#include <variant>

namespace vharvest {

/// Rician fading with linear Rice factor `kappa` (LOS to scattered power ratio).
/// The power gain |h|^2 has unit mean.
struct Rician {
  double kappa = 10.0;
};

/// Rayleigh fading: |h|^2 is unit-mean exponential. Equivalent to Rician{0}.
struct Rayleigh {};

using FadingModel = std::variant<Rician, Rayleigh>;

/// Rice factor of a fading model (0 for Rayleigh).
double rice_factor(const FadingModel& fading);

/// Vehicles arrive as a Poisson point process of `mu` vehicles per meter.
struct Poisson {
  double mu = 1.0 / 50.0;
};

/// Vehicles move at constant spacing `d0` meters.
struct Platoon {
  double d0 = 50.0;
};

using TrafficModel = std::variant<Poisson, Platoon>;

/// E[d_v]: 1/mu or d0.
double mean_spacing(const TrafficModel& traffic);

bool is_platoon(const TrafficModel& traffic);

/// Raw physical and protocol parameters, SI units throughout.
struct ScenarioParams {
  double r = 200.0;        // EHD to AP distance [m]
  double w_off = 5.0;      // EHD to lane center [m]
  double T = 0.1;          // slot duration [s]
  double v0 = 10.0;        // vehicle speed [m/s]
  double Pt = 40e-6;       // EHD transmit power [W]
  double Pv = 0.1;         // vehicle transmit power [W]
  double N0 = 1e-12;       // noise power [W]
  double alpha = 3.0;      // path-loss exponent
  double eta = 0.5;        // harvesting efficiency
  double B = 15e3;         // EHD to AP bandwidth [Hz]
  double S = 1000.0;       // packet size [bit]
  double G = 400e-6;       // battery capacity [J]
  FadingModel fading = Rician{10.0};
  TrafficModel traffic = Poisson{1.0 / 50.0};
  double ell = 4.0;        // harvest distance [m]
};

/// Quantities derived from a validated parameter record.
struct Derived {
  double E_tx = 0.0;   // energy per packet, Pt*T [J]
  int N_s = 0;         // battery capacity in quanta
  int L = 0;           // harvest-phase slots (even)
  double step = 0.0;   // road length covered per slot, v0*T [m]
  double m = 0.0;      // Pt/v0 [J/m]

  int N_H() const { return L; }
  /// 2*ell + k*v0*T
  double R(int k, double ell) const { return 2.0 * ell + k * step; }
  /// 2*ell + N_s*v0*T
  double W(double ell) const { return R(N_s, ell); }
  /// (N_s - k)*E_tx
  double delta(int k) const { return (N_s - k) * E_tx; }
};

/// Validated, immutable scenario. Construct with `Scenario::build`.
class Scenario {
 public:
  /// Validates `raw`, snaps G down to a multiple of E_tx and ell to the
  /// nearest value giving an even slot count. Throws ValidationError.
  static Scenario build(const ScenarioParams& raw);

  /// Reference setup with the given harvest distance.
  static ScenarioParams defaults(double ell = 4.0);

  const ScenarioParams& params() const noexcept { return params_; }
  const Derived& derived() const noexcept { return derived_; }
  double ell() const noexcept { return params_.ell; }
  double kappa() const { return rice_factor(params_.fading); }
  double mean_spacing() const { return vharvest::mean_spacing(params_.traffic); }

  bool ell_snapped() const noexcept { return ell_snapped_; }
  double requested_ell() const noexcept { return requested_ell_; }
  bool capacity_snapped() const noexcept { return capacity_snapped_; }
  double requested_capacity() const noexcept { return requested_G_; }

 private:
  Scenario() = default;

  ScenarioParams params_;
  Derived derived_;
  bool ell_snapped_ = false;
  double requested_ell_ = 0.0;
  bool capacity_snapped_ = false;
  double requested_G_ = 0.0;
};

/// Packet decoding probability at the AP under Rayleigh block fading:
/// exp(-(N0 r^alpha / Pt) (2^{S/(B T)} - 1)).
double decoding_probability(const Scenario& s);
double decoding_probability(const ScenarioParams& p);

double db_to_linear(double db);
double dbm_to_watts(double dbm);

}  // namespace vharvest

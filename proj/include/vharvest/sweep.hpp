#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vharvest/scenario.hpp"
#include "vharvest/simulator.hpp"

namespace vharvest {

struct SweepOutputs {
  bool theta = true;
  bool upsilon = false;
  bool pbo = false;
  bool sim_validation = false;
};

struct SimSettings {
  std::uint64_t n_cycles = 100'000;
  std::uint64_t seed = 1;
  HarvestSources harvest_sources = HarvestSources::closest_only;
  double cutoff = 50.0;
  std::size_t n_reps = 1;
};

/// Cartesian grid over the listed axes; an empty axis keeps the base value.
/// Rows are ordered traffic, fading, G, Pt, S, ell (ell varies fastest).
struct SweepSpec {
  ScenarioParams base;
  std::vector<double> ell;   // [m]
  std::vector<double> Pt;    // [W]
  std::vector<double> S;     // [bit]
  std::vector<double> G;     // [J]
  std::vector<TrafficModel> traffic;
  std::vector<FadingModel> fading;
  SweepOutputs outputs;
  double Qs = 2.0;           // [s], black-out threshold
  SimSettings sim;
  unsigned threads = 0;      // 0: hardware concurrency

  /// Throws ValidationError / UnsupportedModel on inconsistent requests.
  void validate() const;
  std::vector<ScenarioParams> grid() const;
};

struct SweepRow {
  ScenarioParams params;     // as evaluated (ell and G snapped)
  double requested_ell = 0.0;
  double theta_pkt = 0.0;    // packets/s
  double theta_bits = 0.0;   // bits/s
  double upsilon = std::numeric_limits<double>::quiet_NaN();
  double pbo = std::numeric_limits<double>::quiet_NaN();
  double sim_theta_bits = std::numeric_limits<double>::quiet_NaN();
  double sim_theta_hw = std::numeric_limits<double>::quiet_NaN();
  double sim_pbo = std::numeric_limits<double>::quiet_NaN();
};

/// Evaluates every grid point (concurrently); rows come back in grid order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Analytic P_BO for one parameter point (platoon traffic).
double row_blackout(const ScenarioParams& params, double Qs);

enum class Objective { max_theta, min_pbo };

struct Optimum {
  double ell = 0.0;
  double metric = 0.0;
  bool degenerate = false;   // metric identically 0 (theta) or 1 (P_BO)
  std::size_t row = 0;       // index into the evaluated rows
};

/// Best row of one curve; ties go to the smaller ell.
Optimum optimal_ell(const std::vector<SweepRow>& curve, Objective objective);

/// Runs `spec` (only the ell axis may hold more than one value) and returns
/// the best ell.
Optimum optimal_ell(const SweepSpec& spec, Objective objective);

/// Splits rows into curves (all parameters but ell equal), in first-seen order.
std::vector<std::vector<SweepRow>> split_curves(const std::vector<SweepRow>& rows);

enum class TrafficKind { poisson, platoon };

TrafficModel traffic_with_mean(TrafficKind kind, double mean_spacing);

struct PriceSpec {
  ScenarioParams base;
  std::vector<double> mean_spacing;  // [m]
  std::vector<double> ell;           // [m]
  std::vector<double> Pt;            // [W]; empty keeps base
  TrafficKind regular = TrafficKind::platoon;
  TrafficKind reference = TrafficKind::poisson;
  unsigned threads = 0;
};

struct PriceRow {
  double mean_spacing = 0.0;
  double Pt = 0.0;
  double ell_regular = 0.0;
  double ell_reference = 0.0;
  double theta_regular = 0.0;     // bits/s at the throughput-optimal ell
  double theta_reference = 0.0;
  double upsilon_regular = 0.0;   // bit/J at the same ell
  double upsilon_reference = 0.0;
  double theta_gain = 0.0;        // regular / reference - 1
  double upsilon_gain = 0.0;
};

std::vector<PriceRow> price_of_uncertainty(const PriceSpec& spec);

struct TradeoffSpec {
  ScenarioParams base;       // platoon traffic
  std::vector<double> ell;
  std::vector<double> Pt;
  std::vector<double> S;
  double Qs = 2.0;
  double bound = 1e-3;
  unsigned threads = 0;
};

struct TradeoffRow {
  double ell = 0.0;
  double Pt = 0.0;
  double S = 0.0;
  double theta_bits = 0.0;
  double pbo = 0.0;
};

struct TradeoffResult {
  std::vector<TradeoffRow> rows;
  TradeoffRow unconstrained;
  std::optional<TradeoffRow> constrained;  // nullopt: no row meets the bound
  double loss() const {
    return constrained ? 1.0 - constrained->theta_bits / unconstrained.theta_bits : 1.0;
  }
};

TradeoffResult tradeoff_table(const TradeoffSpec& spec);

struct CdfAccuracySpec {
  ScenarioParams base;
  std::vector<double> ell;
  std::vector<double> kappa;     // linear Rice factors
  std::size_t draws = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct CdfAccuracyRow {
  double ell = 0.0;
  double kappa = 0.0;
  int L = 0;
  double cdf = 0.0;
  double ccdf = 0.0;
};

/// Saddle-point accuracy against a Monte Carlo reference at every (kappa, ell).
std::vector<CdfAccuracyRow> cdf_accuracy_sweep(const CdfAccuracySpec& spec);

struct QuantizationSpec {
  ScenarioParams base;
  std::vector<TrafficModel> traffic;
  std::vector<double> ell;
  SimSettings sim;
  unsigned threads = 0;
};

struct QuantizationRow {
  std::string traffic;
  double mean_spacing = 0.0;
  double ell = 0.0;
  double theta_continuous = 0.0;  // bits/s
  double theta_quantized = 0.0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
};

/// Paired simulations (same seed) with and without energy quantization.
std::vector<QuantizationRow> quantization_sweep(const QuantizationSpec& spec);

// CSV emission. Header comment lines are written by the caller.
void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);
void write_price_csv(std::ostream& os, const std::vector<PriceRow>& rows);
void write_tradeoff_csv(std::ostream& os, const TradeoffSpec& spec, const TradeoffResult& result);
void write_cdf_accuracy_csv(std::ostream& os, const std::vector<CdfAccuracyRow>& rows);
void write_quantization_csv(std::ostream& os, const std::vector<QuantizationRow>& rows);

/// "poisson" / "platoon" and "rician" / "rayleigh" labels.
std::string traffic_label(const TrafficModel& traffic);
std::string fading_label(const FadingModel& fading);

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the
/// first exception.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace vharvest

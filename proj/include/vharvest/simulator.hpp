#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vharvest/scenario.hpp"

namespace vharvest {

enum class HarvestSources { closest_only, all_within };
enum class DecodeMode { bernoulli, expected };

struct SimConfig {
  Scenario scenario = Scenario::build(Scenario::defaults());
  std::uint64_t n_cycles = 100'000;
  std::uint64_t seed = 1;
  HarvestSources harvest_sources = HarvestSources::all_within;
  double cutoff = 50.0;          // [m], all_within only; must be >= ell
  bool quantize_energy = false;  // battery held in whole quanta, E_h floored per HP
  DecodeMode decode_mode = DecodeMode::bernoulli;
  double Qs = 2.0;               // black-out threshold [s]
  double initial_charge = 0.0;   // [J]
  bool vehicles_transmit = true; // false silences every vehicle (Pv = 0)
  bool record_cycle_energy = false;
  bool unit_gain = false;        // |h|^2 = 1 in every slot instead of drawing fading

  /// Throws ValidationError.
  void validate() const;
};

struct SimOutcome {
  double delivered_pkts = 0.0;   // integral in bernoulli mode
  std::uint64_t attempts = 0;
  std::uint64_t cycles = 0;
  std::uint64_t slots = 0;
  double elapsed_s = 0.0;
  double throughput_bits_s = 0.0;
  std::uint64_t blackout_cycles = 0;
  std::uint64_t max_silent_slots = 0;
  std::vector<std::uint64_t> battery_start_hist;  // quanta at each cycle start
  double energy_harvested_J = 0.0;
  double energy_wasted_overflow_J = 0.0;
  double energy_lost_rounding_J = 0.0;  // quantized mode only
  double energy_lost_outage_J = 0.0;    // sub-packet residue drained in the TP
  double energy_consumed_J = 0.0;
  double initial_battery_J = 0.0;
  double final_battery_J = 0.0;
  std::vector<double> cycle_energy_J;   // when record_cycle_energy

  double blackout_rate() const { return cycles ? static_cast<double>(blackout_cycles) / cycles : 0.0; }
  std::vector<double> battery_start_pmf() const;
  /// harvested - losses - consumed - (final - initial); ~0 up to rounding.
  double energy_imbalance_J() const;
};

SimOutcome run_simulation(const SimConfig& cfg);

/// |Theta_quantized - Theta_continuous| / Theta_continuous from paired runs
/// sharing the seed; nullopt when the continuous throughput is zero.
std::optional<double> quantization_error(const SimConfig& cfg);

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal approximation
  std::size_t n = 0;
};

Estimate estimate(const std::vector<double>& samples);

struct Replicated {
  Estimate throughput_bits_s;
  Estimate blackout_rate;
  Estimate delivered_pkts;
  std::vector<SimOutcome> runs;
};

/// Replications with seeds derive_seed(cfg.seed, r), run concurrently.
Replicated replicate(const SimConfig& cfg, std::size_t n_reps, unsigned threads = 0);
/// Same, with explicit seeds (may repeat).
Replicated replicate(const SimConfig& cfg, const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

}  // namespace vharvest

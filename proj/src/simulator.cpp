#include "vharvest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "vharvest/errors.hpp"
#include "vharvest/random.hpp"

namespace vharvest {

namespace {

enum Stream : std::uint64_t { kArrivals = 1, kFading = 2, kDecoding = 3 };

// Lazily generated vehicle entry times (crossing of -ell), oldest first.
class Traffic {
 public:
  Traffic(const TrafficModel& model, double v0, std::uint64_t seed)
      : model_(model), v0_(v0), rng_(derive_seed(seed, kArrivals)) {
    entries_.push_back(0.0);
  }

  // Make sure every vehicle entering before `t` has been generated.
  void generate_until(double t) {
    while (entries_.back() <= t) {
      double gap = 0.0;
      if (const auto* p = std::get_if<Poisson>(&model_)) {
        gap = rng_.exponential() / p->mu;
      } else {
        gap = std::get<Platoon>(model_).d0;
      }
      entries_.push_back(entries_.back() + gap / v0_);
    }
  }

  // Forget vehicles that entered before `t`; the newest is always kept.
  void drop_before(double t) {
    while (entries_.size() > 1 && entries_.front() < t) {
      entries_.pop_front();
      ++dropped_;
    }
  }

  const std::deque<double>& entries() const { return entries_; }
  std::uint64_t index_of_front() const { return dropped_; }

 private:
  TrafficModel model_;
  double v0_;
  Rng rng_;
  std::deque<double> entries_;
  std::uint64_t dropped_ = 0;
};

}  // namespace

void SimConfig::validate() const {
  if (n_cycles < 1) throw ValidationError("n_cycles", "must be >= 1");
  if (harvest_sources == HarvestSources::all_within && !(cutoff >= scenario.ell())) {
    throw ValidationError("cutoff", "must be >= ell");
  }
  if (!(Qs > 0.0) || !std::isfinite(Qs)) throw ValidationError("Qs", "must be positive");
  if (!(initial_charge >= 0.0) || !std::isfinite(initial_charge)) {
    throw ValidationError("initial_charge", "must be >= 0");
  }
}

std::vector<double> SimOutcome::battery_start_pmf() const {
  const double total = std::accumulate(battery_start_hist.begin(), battery_start_hist.end(), 0.0);
  std::vector<double> pmf(battery_start_hist.size(), 0.0);
  if (total == 0.0) return pmf;
  for (std::size_t k = 0; k < pmf.size(); ++k) pmf[k] = battery_start_hist[k] / total;
  return pmf;
}

double SimOutcome::energy_imbalance_J() const {
  return energy_harvested_J - energy_wasted_overflow_J - energy_lost_rounding_J -
         energy_lost_outage_J - energy_consumed_J - (final_battery_J - initial_battery_J);
}

SimOutcome run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const Scenario& s = cfg.scenario;
  const ScenarioParams& p = s.params();
  const Derived& d = s.derived();
  const double ell = s.ell();
  const double T = p.T;
  const double G = d.N_s * d.E_tx;
  const double phi_s = decoding_probability(s);
  const auto x_slots = static_cast<std::uint64_t>(std::max(1L, std::lround(cfg.Qs / T)));
  const bool closest = cfg.harvest_sources == HarvestSources::closest_only;
  const double reach = closest ? ell : cfg.cutoff;
  const double gain = p.eta * p.Pv * T;

  Traffic traffic(p.traffic, p.v0, cfg.seed);
  Rng fading_rng(derive_seed(cfg.seed, kFading));
  Rng decode_rng(derive_seed(cfg.seed, kDecoding));
  const FadingSampler fading(p.fading);

  SimOutcome out;
  out.battery_start_hist.assign(static_cast<std::size_t>(d.N_s) + 1, 0);

  // Battery: continuous in joules, or whole quanta plus energy pending until
  // the harvest phase closes.
  double battery = std::min(cfg.initial_charge, G);
  std::int64_t quanta = 0;
  double pending = 0.0;
  if (cfg.quantize_energy) {
    quanta = static_cast<std::int64_t>(std::floor(battery / d.E_tx + 1e-9));
    battery = quanta * d.E_tx;
  }
  out.initial_battery_J = battery;

  auto flush = [&] {
    if (!cfg.quantize_energy || pending == 0.0) return;
    const auto q = static_cast<std::int64_t>(std::floor(pending / d.E_tx + 1e-9));
    out.energy_lost_rounding_J += pending - q * d.E_tx;
    pending = 0.0;
    quanta += q;
    if (quanta > d.N_s) {
      out.energy_wasted_overflow_J += (quanta - d.N_s) * d.E_tx;
      quanta = d.N_s;
    }
    battery = quanta * d.E_tx;
  };

  std::uint64_t next_entry = 0;  // index of the next vehicle to enter
  std::uint64_t silent = 0;
  bool in_hp = false;
  bool cycle_blackout = false;
  double cycle_energy = 0.0;
  bool cycle_open = false;

  auto close_cycle = [&] {
    if (!cycle_open) return;
    if (cycle_blackout) ++out.blackout_cycles;
    if (cfg.record_cycle_energy) out.cycle_energy_J.push_back(cycle_energy);
    ++out.cycles;
  };

  std::uint64_t n = 0;
  for (;; ++n) {
    const double tm = (n + 0.5) * T;
    traffic.generate_until(tm + (reach + ell) / p.v0);
    traffic.drop_before(tm - (reach + ell) / p.v0 - T);

    // Cycle boundaries: every vehicle whose entry precedes this slot midpoint.
    bool done = false;
    const auto& entries = traffic.entries();
    while (true) {
      const std::uint64_t idx = next_entry - traffic.index_of_front();
      if (idx >= entries.size() || entries[idx] > tm) break;
      flush();
      close_cycle();
      if (next_entry == cfg.n_cycles) {
        done = true;
        break;
      }
      ++next_entry;
      cycle_open = true;
      cycle_blackout = false;
      cycle_energy = 0.0;
      const auto level = cfg.quantize_energy
                             ? quanta
                             : static_cast<std::int64_t>(std::floor(battery / d.E_tx + 1e-9));
      ++out.battery_start_hist[static_cast<std::size_t>(std::clamp<std::int64_t>(level, 0, d.N_s))];
    }
    if (done) break;

    // Positions at the slot midpoint, snapped to segment midpoints.
    double nearest = std::numeric_limits<double>::infinity();
    bool zone_occupied = false;
    double harvested = 0.0;
    double best_gain = 0.0;
    for (double t_entry : entries) {
      const double x = p.v0 * (tm - t_entry) - ell;
      if (std::abs(x) > reach) continue;
      const double xq = -ell + (std::floor((x + ell) / d.step) + 0.5) * d.step;
      const bool in_zone = x >= -ell && x < ell;
      zone_occupied = zone_occupied || in_zone;
      if (closest && !in_zone) continue;
      const double g = cfg.unit_gain ? 1.0 : fading(fading_rng);
      const double e = cfg.vehicles_transmit
                           ? gain * g / std::pow(p.w_off * p.w_off + xq * xq, p.alpha / 2.0)
                           : 0.0;
      if (closest) {
        if (std::abs(x) < nearest) {
          nearest = std::abs(x);
          best_gain = e;
        }
      } else {
        harvested += e;
      }
    }
    if (closest) harvested = best_gain;

    bool success = false;
    if (zone_occupied) {
      in_hp = true;
      out.energy_harvested_J += harvested;
      cycle_energy += harvested;
      if (cfg.quantize_energy) {
        pending += harvested;
      } else {
        battery += harvested;
        if (battery > G) {
          out.energy_wasted_overflow_J += battery - G;
          battery = G;
        }
      }
    } else {
      if (in_hp) flush();
      in_hp = false;
      const double u = decode_rng.uniform();
      if (battery >= d.E_tx * (1.0 - 1e-12)) {
        const double spent = std::min(battery, d.E_tx);
        out.energy_consumed_J += spent;
        if (cfg.quantize_energy) {
          --quanta;
          battery = quanta * d.E_tx;
        } else {
          battery -= spent;
        }
        ++out.attempts;
        success = u < phi_s;
        out.delivered_pkts += cfg.decode_mode == DecodeMode::expected ? phi_s : (success ? 1.0 : 0.0);
      } else if (battery > 0.0) {
        out.energy_lost_outage_J += battery;
        battery = 0.0;
      }
    }

    if (success) {
      silent = 0;
    } else {
      ++silent;
      out.max_silent_slots = std::max(out.max_silent_slots, silent);
      if (silent + 1 >= x_slots) cycle_blackout = true;
    }
  }

  flush();
  out.final_battery_J = battery;
  out.slots = n;
  out.elapsed_s = n * T;
  out.throughput_bits_s = out.elapsed_s > 0.0 ? p.S * out.delivered_pkts / out.elapsed_s : 0.0;
  return out;
}

std::optional<double> quantization_error(const SimConfig& cfg) {
  SimConfig continuous = cfg;
  continuous.quantize_energy = false;
  SimConfig quantized = cfg;
  quantized.quantize_energy = true;
  const double base = run_simulation(continuous).throughput_bits_s;
  if (base == 0.0) return std::nullopt;
  return std::abs(run_simulation(quantized).throughput_bits_s - base) / base;
}

Estimate estimate(const std::vector<double>& samples) {
  Estimate e;
  e.n = samples.size();
  if (e.n == 0) return e;
  e.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / e.n;
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double v : samples) ss += (v - e.mean) * (v - e.mean);
  e.half_width = 1.96 * std::sqrt(ss / (e.n - 1)) / std::sqrt(static_cast<double>(e.n));
  return e;
}

Replicated replicate(const SimConfig& cfg, const std::vector<std::uint64_t>& seeds, unsigned threads) {
  if (seeds.size() < 2) throw ValidationError("n_reps", "must be >= 2");
  cfg.validate();
  Replicated out;
  out.runs.resize(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t r = w; r < seeds.size(); r += threads) {
          SimConfig c = cfg;
          c.seed = seeds[r];
          out.runs[r] = run_simulation(c);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> thr, bo, del;
  for (const auto& r : out.runs) {
    thr.push_back(r.throughput_bits_s);
    bo.push_back(r.blackout_rate());
    del.push_back(r.delivered_pkts);
  }
  out.throughput_bits_s = estimate(thr);
  out.blackout_rate = estimate(bo);
  out.delivered_pkts = estimate(del);
  return out;
}

Replicated replicate(const SimConfig& cfg, std::size_t n_reps, unsigned threads) {
  std::vector<std::uint64_t> seeds(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) seeds[r] = derive_seed(cfg.seed, 1000 + r);
  return replicate(cfg, seeds, threads);
}

}  // namespace vharvest

#include "vharvest/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "vharvest/blackout.hpp"
#include "vharvest/energy_cdf.hpp"
#include "vharvest/errors.hpp"
#include "vharvest/metrics.hpp"
#include "vharvest/random.hpp"

namespace vharvest {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool same_curve(const ScenarioParams& a, const ScenarioParams& b) {
  return a.Pt == b.Pt && a.S == b.S && a.G == b.G && a.r == b.r && a.w_off == b.w_off &&
         a.T == b.T && a.v0 == b.v0 && a.Pv == b.Pv && a.N0 == b.N0 && a.alpha == b.alpha &&
         a.eta == b.eta && a.B == b.B && traffic_label(a.traffic) == traffic_label(b.traffic) &&
         mean_spacing(a.traffic) == mean_spacing(b.traffic) &&
         fading_label(a.fading) == fading_label(b.fading) &&
         rice_factor(a.fading) == rice_factor(b.fading);
}

template <class T>
std::vector<T> or_base(const std::vector<T>& axis, const T& base) {
  return axis.empty() ? std::vector<T>{base} : axis;
}

}  // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!first) first = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::string traffic_label(const TrafficModel& traffic) {
  return is_platoon(traffic) ? "platoon" : "poisson";
}

std::string fading_label(const FadingModel& fading) {
  return std::holds_alternative<Rayleigh>(fading) ? "rayleigh" : "rician";
}

void SweepSpec::validate() const {
  if (outputs.pbo) {
    for (const auto& t : or_base(traffic, base.traffic)) {
      if (!is_platoon(t)) throw UnsupportedModel("sweep: black-out output needs platoon traffic");
    }
  }
  if (!(Qs > 0.0)) throw ValidationError("Qs", "must be positive");
  if (outputs.sim_validation && sim.n_reps < 1) throw ValidationError("n_reps", "must be >= 1");
  for (const auto& p : grid()) Scenario::build(p);
}

std::vector<ScenarioParams> SweepSpec::grid() const {
  std::vector<ScenarioParams> out;
  for (const auto& t : or_base(traffic, base.traffic)) {
    for (const auto& f : or_base(fading, base.fading)) {
      for (double g : or_base(G, base.G)) {
        for (double pt : or_base(Pt, base.Pt)) {
          for (double s : or_base(S, base.S)) {
            for (double l : or_base(ell, base.ell)) {
              ScenarioParams p = base;
              p.traffic = t;
              p.fading = f;
              p.G = g;
              p.Pt = pt;
              p.S = s;
              p.ell = l;
              out.push_back(p);
            }
          }
        }
      }
    }
  }
  return out;
}

double row_blackout(const ScenarioParams& params, double Qs) {
  return blackout_probability(Scenario::build(params), Qs);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto points = spec.grid();
  std::vector<SweepRow> rows(points.size());
  parallel_for(points.size(), spec.threads, [&](std::size_t i) {
    const Scenario s = Scenario::build(points[i]);
    SweepRow& row = rows[i];
    row.params = s.params();
    row.requested_ell = points[i].ell;
    const Analysis a = analyze(s);
    row.theta_pkt = a.throughput.theta_pkt;
    row.theta_bits = a.throughput.theta_bits;
    if (spec.outputs.upsilon) row.upsilon = efficiency(s, a.throughput).upsilon;
    if (spec.outputs.pbo) {
      const BlackoutQuery q = BlackoutQuery::make(s, spec.Qs);
      row.pbo = blackout_probability(q, post_harvest_pmf(a.stationary.pi, a.p_E),
                                     a.throughput.phi_s);
    }
    if (spec.outputs.sim_validation) {
      SimConfig cfg;
      cfg.scenario = s;
      cfg.n_cycles = spec.sim.n_cycles;
      cfg.seed = derive_seed(spec.sim.seed, i);
      cfg.harvest_sources = spec.sim.harvest_sources;
      cfg.cutoff = std::max(spec.sim.cutoff, s.ell());
      cfg.Qs = spec.Qs;
      if (spec.sim.n_reps >= 2) {
        const Replicated r = replicate(cfg, spec.sim.n_reps, 1);
        row.sim_theta_bits = r.throughput_bits_s.mean;
        row.sim_theta_hw = r.throughput_bits_s.half_width;
        if (spec.outputs.pbo) row.sim_pbo = r.blackout_rate.mean;
      } else {
        const SimOutcome o = run_simulation(cfg);
        row.sim_theta_bits = o.throughput_bits_s;
        if (spec.outputs.pbo) row.sim_pbo = o.blackout_rate();
      }
    }
  });
  return rows;
}

Optimum optimal_ell(const std::vector<SweepRow>& curve, Objective objective) {
  if (curve.empty()) throw ValidationError("ell", "grid is empty");
  std::vector<std::size_t> order(curve.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve[a].params.ell < curve[b].params.ell;
  });
  const bool maximize = objective == Objective::max_theta;
  auto metric = [&](std::size_t i) { return maximize ? curve[i].theta_bits : curve[i].pbo; };
  Optimum best;
  best.row = order.front();
  best.metric = metric(best.row);
  bool all_trivial = true;
  for (std::size_t i : order) {
    const double v = metric(i);
    if (std::isnan(v)) throw ValidationError("pbo", "black-out metric missing from sweep rows");
    all_trivial = all_trivial && (maximize ? v == 0.0 : v >= 1.0);
    const bool better = maximize ? v > best.metric : v < best.metric;
    if (better) {
      best.metric = v;
      best.row = i;
    }
  }
  best.ell = curve[best.row].params.ell;
  best.degenerate = all_trivial;
  return best;
}

Optimum optimal_ell(const SweepSpec& spec, Objective objective) {
  if (spec.Pt.size() > 1 || spec.S.size() > 1 || spec.G.size() > 1 || spec.traffic.size() > 1 ||
      spec.fading.size() > 1) {
    throw ValidationError("sweep", "optimal_ell expects a single curve (only ell may vary)");
  }
  SweepSpec one = spec;
  one.outputs.sim_validation = false;
  if (objective == Objective::min_pbo) one.outputs.pbo = true;
  return optimal_ell(run_sweep(one), objective);
}

std::vector<std::vector<SweepRow>> split_curves(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<SweepRow>> curves;
  for (const auto& r : rows) {
    auto it = std::find_if(curves.begin(), curves.end(),
                           [&](const auto& c) { return same_curve(c.front().params, r.params); });
    if (it == curves.end()) {
      curves.push_back({r});
    } else {
      it->push_back(r);
    }
  }
  return curves;
}

TrafficModel traffic_with_mean(TrafficKind kind, double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("mean_spacing", "must be positive");
  if (kind == TrafficKind::platoon) return Platoon{spacing};
  return Poisson{1.0 / spacing};
}

std::vector<PriceRow> price_of_uncertainty(const PriceSpec& spec) {
  if (spec.mean_spacing.empty()) throw ValidationError("mean_spacing", "grid is empty");
  if (spec.ell.empty()) throw ValidationError("ell", "grid is empty");
  const auto powers = or_base(spec.Pt, spec.base.Pt);

  struct Cell {
    double spacing;
    double pt;
  };
  std::vector<Cell> cells;
  for (double pt : powers) {
    for (double d : spec.mean_spacing) cells.push_back({d, pt});
  }
  std::vector<PriceRow> rows(cells.size());
  parallel_for(cells.size(), spec.threads, [&](std::size_t i) {
    auto best_of = [&](TrafficKind kind, double& ell, double& theta, double& upsilon) {
      SweepSpec sw;
      sw.base = spec.base;
      sw.base.Pt = cells[i].pt;
      sw.base.traffic = traffic_with_mean(kind, cells[i].spacing);
      sw.ell = spec.ell;
      sw.outputs.upsilon = true;
      sw.threads = 1;
      const auto curve = run_sweep(sw);
      const Optimum opt = optimal_ell(curve, Objective::max_theta);
      ell = opt.ell;
      theta = curve[opt.row].theta_bits;
      upsilon = curve[opt.row].upsilon;
    };
    PriceRow& r = rows[i];
    r.mean_spacing = cells[i].spacing;
    r.Pt = cells[i].pt;
    best_of(spec.regular, r.ell_regular, r.theta_regular, r.upsilon_regular);
    best_of(spec.reference, r.ell_reference, r.theta_reference, r.upsilon_reference);
    r.theta_gain = r.theta_reference > 0.0 ? r.theta_regular / r.theta_reference - 1.0 : 0.0;
    r.upsilon_gain = r.upsilon_reference > 0.0 ? r.upsilon_regular / r.upsilon_reference - 1.0 : 0.0;
  });
  return rows;
}

TradeoffResult tradeoff_table(const TradeoffSpec& spec) {
  if (!is_platoon(spec.base.traffic)) {
    throw UnsupportedModel("tradeoff: black-out analysis needs platoon traffic");
  }
  if (!(spec.bound >= 0.0 && spec.bound <= 1.0)) throw ValidationError("bound", "must lie in [0, 1]");
  SweepSpec sw;
  sw.base = spec.base;
  sw.ell = spec.ell;
  sw.Pt = spec.Pt;
  sw.S = spec.S;
  sw.Qs = spec.Qs;
  sw.outputs.pbo = true;
  sw.threads = spec.threads;
  const auto rows = run_sweep(sw);

  TradeoffResult out;
  for (const auto& r : rows) {
    out.rows.push_back({r.params.ell, r.params.Pt, r.params.S, r.theta_bits, r.pbo});
  }
  if (out.rows.empty()) throw ValidationError("sweep", "grid is empty");
  out.unconstrained = out.rows.front();
  for (const auto& r : out.rows) {
    if (r.theta_bits > out.unconstrained.theta_bits) out.unconstrained = r;
    if (r.pbo <= spec.bound && (!out.constrained || r.theta_bits > out.constrained->theta_bits)) {
      out.constrained = r;
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  const auto& o = spec.outputs;
  os << "ell_m,Pt_uW,S_bit,G_uJ,traffic,mean_dv_m,fading,kappa_dB,phi_s,theta_pkt_s,theta_kbit_s";
  if (o.upsilon) os << ",upsilon_bits_per_J";
  if (o.pbo) os << ",Qs_s,P_BO_analytic";
  if (o.sim_validation) {
    os << ",sim_theta_kbit_s,sim_theta_hw_kbit_s";
    if (o.pbo) os << ",P_BO_sim";
  }
  os << '\n';
  for (const auto& r : rows) {
    const auto& p = r.params;
    const double kappa = rice_factor(p.fading);
    os << num(p.ell) << ',' << num(p.Pt * 1e6) << ',' << num(p.S) << ',' << num(p.G * 1e6) << ','
       << traffic_label(p.traffic) << ',' << num(mean_spacing(p.traffic)) << ','
       << fading_label(p.fading) << ','
       << (std::holds_alternative<Rayleigh>(p.fading) ? "" : num(10.0 * std::log10(kappa))) << ','
       << num(decoding_probability(p)) << ',' << num(r.theta_pkt) << ','
       << num(r.theta_bits * 1e-3);
    if (o.upsilon) os << ',' << num(r.upsilon);
    if (o.pbo) os << ',' << num(spec.Qs) << ',' << num(r.pbo);
    if (o.sim_validation) {
      os << ',' << num(r.sim_theta_bits * 1e-3) << ',' << num(r.sim_theta_hw * 1e-3);
      if (o.pbo) os << ',' << num(r.sim_pbo);
    }
    os << '\n';
  }
}

void write_price_csv(std::ostream& os, const std::vector<PriceRow>& rows) {
  os << "mean_dv_m,Pt_uW,ell_regular_m,ell_reference_m,theta_regular_kbit_s,"
        "theta_reference_kbit_s,upsilon_regular_bits_per_J,upsilon_reference_bits_per_J,"
        "theta_gain,upsilon_gain\n";
  for (const auto& r : rows) {
    os << num(r.mean_spacing) << ',' << num(r.Pt * 1e6) << ',' << num(r.ell_regular) << ','
       << num(r.ell_reference) << ',' << num(r.theta_regular * 1e-3) << ','
       << num(r.theta_reference * 1e-3) << ',' << num(r.upsilon_regular) << ','
       << num(r.upsilon_reference) << ',' << num(r.theta_gain) << ',' << num(r.upsilon_gain)
       << '\n';
  }
}

void write_tradeoff_csv(std::ostream& os, const TradeoffSpec& spec, const TradeoffResult& result) {
  os << "kind,ell_m,Pt_uW,S_bit,Qs_s,theta_kbit_s,P_BO_analytic\n";
  auto line = [&](const char* kind, const TradeoffRow& r) {
    os << kind << ',' << num(r.ell) << ',' << num(r.Pt * 1e6) << ',' << num(r.S) << ','
       << num(spec.Qs) << ',' << num(r.theta_bits * 1e-3) << ',' << num(r.pbo) << '\n';
  };
  for (const auto& r : result.rows) line("grid", r);
  line("unconstrained", result.unconstrained);
  if (result.constrained) {
    line("constrained", *result.constrained);
  } else {
    os << "infeasible,,,," << num(spec.Qs) << ",,\n";
  }
}

std::vector<CdfAccuracyRow> cdf_accuracy_sweep(const CdfAccuracySpec& spec) {
  if (spec.ell.empty() || spec.kappa.empty()) throw ValidationError("grid", "ell and kappa must be non-empty");
  std::vector<CdfAccuracyRow> rows;
  for (double k : spec.kappa) {
    for (double l : spec.ell) rows.push_back({l, k, 0, 0.0, 0.0});
  }
  parallel_for(rows.size(), spec.threads, [&](std::size_t i) {
    ScenarioParams p = spec.base;
    p.ell = rows[i].ell;
    p.fading = Rician{rows[i].kappa};
    const Scenario s = Scenario::build(p);
    const SegmentRates rates = segment_rates(s);
    const EnergyCdf analytic = saddle_cdf(rates, rows[i].kappa);
    const EnergyCdf reference = empirical_cdf(rates, p.fading, spec.draws, derive_seed(spec.seed, i));
    const CdfAccuracy acc = cdf_accuracy(analytic, reference);
    rows[i].ell = s.ell();
    rows[i].L = s.derived().L;
    rows[i].cdf = acc.cdf;
    rows[i].ccdf = acc.ccdf;
  });
  return rows;
}

std::vector<QuantizationRow> quantization_sweep(const QuantizationSpec& spec) {
  const auto traffic = or_base(spec.traffic, spec.base.traffic);
  if (spec.ell.empty()) throw ValidationError("ell", "grid is empty");
  std::vector<QuantizationRow> rows;
  std::vector<ScenarioParams> points;
  for (const auto& t : traffic) {
    for (double l : spec.ell) {
      ScenarioParams p = spec.base;
      p.traffic = t;
      p.ell = l;
      points.push_back(p);
      rows.push_back({traffic_label(t), mean_spacing(t), l, 0.0, 0.0});
    }
  }
  parallel_for(points.size(), spec.threads, [&](std::size_t i) {
    SimConfig cfg;
    cfg.scenario = Scenario::build(points[i]);
    cfg.n_cycles = spec.sim.n_cycles;
    cfg.seed = derive_seed(spec.sim.seed, i);
    cfg.harvest_sources = spec.sim.harvest_sources;
    cfg.cutoff = std::max(spec.sim.cutoff, cfg.scenario.ell());
    cfg.quantize_energy = false;
    rows[i].theta_continuous = run_simulation(cfg).throughput_bits_s;
    cfg.quantize_energy = true;
    rows[i].theta_quantized = run_simulation(cfg).throughput_bits_s;
    rows[i].ell = cfg.scenario.ell();
    if (rows[i].theta_continuous > 0.0) {
      rows[i].rel_error =
          std::abs(rows[i].theta_quantized - rows[i].theta_continuous) / rows[i].theta_continuous;
    }
  });
  return rows;
}

void write_cdf_accuracy_csv(std::ostream& os, const std::vector<CdfAccuracyRow>& rows) {
  os << "kappa_dB,ell_m,L,accuracy_cdf,accuracy_ccdf\n";
  for (const auto& r : rows) {
    os << num(10.0 * std::log10(r.kappa)) << ',' << num(r.ell) << ',' << r.L << ',' << num(r.cdf)
       << ',' << num(r.ccdf) << '\n';
  }
}

void write_quantization_csv(std::ostream& os, const std::vector<QuantizationRow>& rows) {
  os << "traffic,mean_dv_m,ell_m,theta_continuous_kbit_s,theta_quantized_kbit_s,rel_error\n";
  for (const auto& r : rows) {
    os << r.traffic << ',' << num(r.mean_spacing) << ',' << num(r.ell) << ','
       << num(r.theta_continuous * 1e-3) << ',' << num(r.theta_quantized * 1e-3) << ','
       << num(r.rel_error) << '\n';
  }
}

}  // namespace vharvest

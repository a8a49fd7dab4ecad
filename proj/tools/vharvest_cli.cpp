#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vharvest/battery_chain.hpp"
#include "vharvest/blackout.hpp"
#include "vharvest/energy_cdf.hpp"
#include "vharvest/errors.hpp"
#include "vharvest/metrics.hpp"
#include "vharvest/random.hpp"
#include "vharvest/recipe.hpp"
#include "vharvest/scenario.hpp"
#include "vharvest/simulator.hpp"
#include "vharvest/sweep.hpp"
#include "vharvest/version.hpp"

#ifndef VHARVEST_RECIPE_DIR
#define VHARVEST_RECIPE_DIR "recipes"
#endif

namespace fs = std::filesystem;
using namespace vharvest;

namespace {

enum Exit { kOk = 0, kNumerical = 1, kUsage = 2 };

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Accepts INI/TOML, and also a previous run's output: "# key = value" header
// lines are read as settings, everything else that is not a setting is skipped.
class EchoConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    static const std::regex setting(R"(^\s*#?\s*([A-Za-z][A-Za-z0-9_-]*\s*=.*)$)");
    static const std::regex section(R"(^\s*\[[^\]]*\]\s*$)");
    std::ostringstream kept;
    std::string line;
    std::smatch m;
    while (std::getline(input, line)) {
      if (std::regex_match(line, m, setting)) {
        kept << m[1] << '\n';
      } else if (std::regex_match(line, section)) {
        kept << line << '\n';
      }
    }
    std::istringstream filtered(kept.str());
    return CLI::ConfigTOML::from_config(filtered);
  }
};

// Scenario inputs in command-line units.
struct UserParams {
  double ell = 4.0;       // m
  double Pt = 40.0;       // uW
  double Pv = 100.0;      // mW
  double N0 = -90.0;      // dBm
  double T = 100.0;       // ms
  double B = 15.0;        // kHz
  double S = 1.0;         // kbit
  double G = 400.0;       // uJ
  std::string fading = "rician";
  double kappa = 10.0;    // dB
  std::string traffic = "poisson";
  double mu = 0.02;       // vehicles/m
  double d0 = 50.0;       // m
  double r = 200.0;       // m
  double w_off = 5.0;     // m
  double v0 = 10.0;       // m/s
  double alpha = 3.0;
  double eta = 0.5;

  ScenarioParams to_params() const {
    ScenarioParams p;
    p.ell = ell;
    p.Pt = Pt * 1e-6;
    p.Pv = Pv * 1e-3;
    p.N0 = dbm_to_watts(N0);
    p.T = T * 1e-3;
    p.B = B * 1e3;
    p.S = S * 1e3;
    p.G = G * 1e-6;
    p.r = r;
    p.w_off = w_off;
    p.v0 = v0;
    p.alpha = alpha;
    p.eta = eta;
    if (fading == "rayleigh") {
      p.fading = Rayleigh{};
    } else {
      p.fading = Rician{db_to_linear(kappa)};
    }
    if (traffic == "platoon") {
      p.traffic = Platoon{d0};
    } else {
      p.traffic = Poisson{mu};
    }
    return p;
  }
};

struct RunOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output;
  double Qs = 2.0;
  std::uint64_t cycles = 100'000;
  std::string harvest = "all_within";
  double cutoff = 50.0;
  bool quantize = false;
  std::string decode = "bernoulli";
  std::size_t reps = 1;
  double initial_charge = 0.0;  // uJ
  std::size_t draws = 1'000'000;
  std::string recipe_path;
  std::string recipe_dir = VHARVEST_RECIPE_DIR;
  std::string out_dir = ".";
  std::vector<std::string> figures;
};

struct Cli {
  CLI::App app{"Throughput, black-out and simulation tools for RF energy harvesting from vehicular traffic",
               "vharvest"};
  UserParams u;
  RunOptions o;
  struct Field {
    CLI::Option* opt;
    const double* number;      // exactly one of number / text is set
    const std::string* text;
  };
  std::vector<Field> scenario_opts;

  CLI::App* throughput = nullptr;
  CLI::App* blackout = nullptr;
  CLI::App* efficiency = nullptr;
  CLI::App* chain = nullptr;
  CLI::App* simulate = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* validate_cdf = nullptr;
  CLI::App* reproduce = nullptr;

  Cli() {
    app.config_formatter(std::make_shared<EchoConfig>());
    app.set_config("--config", "", "INI/TOML settings, or the header of an earlier run's output");
    app.set_version_flag("--version", kVersion);
    app.fallthrough();
    app.require_subcommand(1);

    const auto add = [&](const char* name, auto& target, const char* help) {
      auto* opt = app.add_option(name, target, help)->capture_default_str()->group("Scenario");
      if constexpr (std::is_same_v<std::decay_t<decltype(target)>, std::string>) {
        scenario_opts.push_back({opt, nullptr, &target});
      } else {
        scenario_opts.push_back({opt, &target, nullptr});
      }
      return opt;
    };
    add("--ell", u.ell, "harvest distance [m]")->check(CLI::PositiveNumber);
    add("--Pt", u.Pt, "EHD transmit power [uW]")->check(CLI::PositiveNumber);
    add("--Pv", u.Pv, "vehicle transmit power [mW]")->check(CLI::NonNegativeNumber);
    add("--N0", u.N0, "noise power [dBm]");
    add("--T", u.T, "slot duration [ms]")->check(CLI::PositiveNumber);
    add("--B", u.B, "bandwidth [kHz]")->check(CLI::PositiveNumber);
    add("--S", u.S, "packet size [kbit]")->check(CLI::PositiveNumber);
    add("--G", u.G, "battery capacity [uJ]")->check(CLI::PositiveNumber);
    add("--fading", u.fading, "rician or rayleigh")->check(CLI::IsMember({"rician", "rayleigh"}));
    add("--kappa", u.kappa, "Rice factor [dB]");
    add("--traffic", u.traffic, "poisson or platoon")->check(CLI::IsMember({"poisson", "platoon"}));
    add("--mu", u.mu, "Poisson vehicle density [vehicles/m]")->check(CLI::PositiveNumber);
    add("--d0", u.d0, "platoon spacing [m]")->check(CLI::PositiveNumber);
    add("--r", u.r, "EHD to access point distance [m]")->check(CLI::PositiveNumber);
    add("--w-off", u.w_off, "EHD to lane offset [m]")->check(CLI::PositiveNumber);
    add("--v0", u.v0, "vehicle speed [m/s]")->check(CLI::PositiveNumber);
    add("--alpha", u.alpha, "path-loss exponent")->check(CLI::PositiveNumber);
    add("--eta", u.eta, "harvesting efficiency")->check(CLI::Range(0.0, 1.0));

    app.add_option("--seed", o.seed, "master seed")->capture_default_str()->group("Run");
    app.add_option("--threads", o.threads, "worker threads (0: all cores)")->group("Run");
    app.add_option("-o,--output", o.output, "output file (default stdout)")->group("Run");
    app.add_option("--Qs", o.Qs, "black-out threshold [s]")->capture_default_str()->group("Run")
        ->check(CLI::PositiveNumber);
    app.add_option("--cycles", o.cycles, "simulated cycles")->capture_default_str()->group("Simulation")
        ->check(CLI::PositiveNumber);
    app.add_option("--harvest", o.harvest, "closest_only or all_within")->capture_default_str()
        ->group("Simulation")->check(CLI::IsMember({"closest_only", "all_within"}));
    app.add_option("--cutoff", o.cutoff, "all_within source radius [m]")->capture_default_str()
        ->group("Simulation");
    app.add_flag("--quantize", o.quantize, "hold the battery in whole quanta")->group("Simulation");
    app.add_option("--decode", o.decode, "bernoulli or expected")->capture_default_str()
        ->group("Simulation")->check(CLI::IsMember({"bernoulli", "expected"}));
    app.add_option("--reps", o.reps, "independent replications")->capture_default_str()
        ->group("Simulation")->check(CLI::PositiveNumber);
    app.add_option("--initial-charge", o.initial_charge, "battery at start [uJ]")->group("Simulation");
    app.add_option("--draws", o.draws, "Monte Carlo draws for validate-cdf")->capture_default_str()
        ->group("Run");

    throughput = app.add_subcommand("throughput", "analytic throughput");
    blackout = app.add_subcommand("blackout", "analytic black-out probability (platoon traffic)");
    efficiency = app.add_subcommand("efficiency", "throughput, RF power density and energy efficiency");
    chain = app.add_subcommand("chain", "battery chain: p_E, p_T, stationary p_B and Psi per level");
    simulate = app.add_subcommand("simulate", "slot-level Monte Carlo simulation");
    sweep = app.add_subcommand("sweep", "run a recipe file; scenario flags override its base");
    sweep->add_option("recipe", o.recipe_path, "recipe JSON")->required()->check(CLI::ExistingFile);
    validate_cdf = app.add_subcommand("validate-cdf", "analytic F_E against a Monte Carlo reference");
    reproduce = app.add_subcommand("reproduce", "write figN.csv for the named figure recipes");
    reproduce->add_option("figures", o.figures, "fig2 ... fig14, tradeoff, or all")->required();
    reproduce->add_option("--recipe-dir", o.recipe_dir, "recipe directory")->capture_default_str();
    reproduce->add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
  }
};

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw ValidationError("output", "cannot open " + path);
      os = &file;
    }
  }
};

void header(std::ostream& os, const char* command) {
  os << "# vharvest " << kVersion << " (rng v" << Rng::kRngVersion << ")\n";
  os << "# command: " << command << '\n';
}

void echo_scenario_exact(const Cli& cli, std::ostream& os, bool only_set = false) {
  for (const auto& f : cli.scenario_opts) {
    if (only_set && f.opt->count() == 0) continue;
    os << "# " << f.opt->get_lnames().front() << " = ";
    if (f.text) {
      os << '"' << *f.text << "\"\n";
    } else {
      os << fmt(*f.number) << '\n';
    }
  }
}

void echo_kv(std::ostream& os, const char* key, const std::string& value) {
  os << "# " << key << " = " << value << '\n';
}

void note_snapping(std::ostream& os, const Scenario& s) {
  if (s.ell_snapped()) {
    os << "# note: ell " << fmt(s.requested_ell()) << " m evaluated at " << fmt(s.ell()) << " m (even slot count)\n";
  }
  if (s.capacity_snapped()) {
    os << "# note: G " << fmt(s.requested_capacity() * 1e6) << " uJ evaluated at "
       << fmt(s.params().G * 1e6) << " uJ (whole quanta)\n";
  }
}

int cmd_throughput(const Cli& cli, std::ostream& os) {
  const Scenario s = Scenario::build(cli.u.to_params());
  const Analysis a = analyze(s);
  header(os, "throughput");
  echo_scenario_exact(cli, os);
  note_snapping(os, s);
  os << "ell_m,Pt_uW,S_kbit,traffic,mean_dv_m,phi_s,theta_pkt_s,theta_kbit_s\n";
  os << fixed(s.ell()) << ',' << fixed(s.params().Pt * 1e6) << ',' << fixed(s.params().S * 1e-3) << ','
     << traffic_label(s.params().traffic) << ',' << fixed(s.mean_spacing()) << ','
     << fixed(a.throughput.phi_s) << ',' << fixed(a.throughput.theta_pkt) << ','
     << fixed(a.throughput.theta_kbit()) << '\n';
  return kOk;
}

int cmd_blackout(const Cli& cli, std::ostream& os) {
  const Scenario s = Scenario::build(cli.u.to_params());
  const auto q = BlackoutQuery::make(s, cli.o.Qs);
  const double pbo = blackout_probability(s, cli.o.Qs);
  header(os, "blackout");
  echo_scenario_exact(cli, os);
  echo_kv(os, "Qs", fmt(cli.o.Qs));
  note_snapping(os, s);
  os << "ell_m,Pt_uW,S_kbit,d0_m,Qs_s,x_slots,N_slots,N_H,phi_s,P_BO\n";
  os << fixed(s.ell()) << ',' << fixed(s.params().Pt * 1e6) << ',' << fixed(s.params().S * 1e-3) << ','
     << fixed(s.mean_spacing()) << ',' << fixed(cli.o.Qs) << ',' << q.x << ',' << q.N << ',' << q.N_H << ','
     << fixed(decoding_probability(s)) << ',' << fixed(pbo) << '\n';
  return kOk;
}

int cmd_efficiency(const Cli& cli, std::ostream& os) {
  const Scenario s = Scenario::build(cli.u.to_params());
  const Analysis a = analyze(s);
  const EfficiencyResult e = efficiency(s, a.throughput);
  header(os, "efficiency");
  echo_scenario_exact(cli, os);
  note_snapping(os, s);
  os << "ell_m,mean_dv_m,theta_kbit_s,epsilon_W,upsilon_bits_per_J\n";
  os << fixed(s.ell()) << ',' << fixed(s.mean_spacing()) << ',' << fixed(a.throughput.theta_kbit()) << ','
     << fixed(e.epsilon) << ',' << fixed(e.upsilon) << '\n';
  return kOk;
}

int cmd_chain(const Cli& cli, std::ostream& os) {
  const Scenario s = Scenario::build(cli.u.to_params());
  const Analysis a = analyze(s);
  header(os, "chain");
  echo_scenario_exact(cli, os);
  note_snapping(os, s);
  os << "# stationary: iterations = " << a.stationary.iterations << ", residual = " << fixed(a.stationary.residual)
     << (a.stationary.reducible ? ", reducible" : "") << '\n';
  os << "k,p_E,p_T,p_B,psi\n";
  for (int k = 0; k <= s.derived().N_s; ++k) {
    os << k << ',' << fixed(a.p_E[k]) << ',' << fixed(a.p_T[k]) << ',' << fixed(a.stationary.pi[k]) << ','
       << fixed(a.throughput.psi[k]) << '\n';
  }
  return kOk;
}

int cmd_simulate(const Cli& cli, std::ostream& os) {
  SimConfig cfg;
  cfg.scenario = Scenario::build(cli.u.to_params());
  cfg.n_cycles = cli.o.cycles;
  cfg.seed = cli.o.seed;
  cfg.harvest_sources = cli.o.harvest == "closest_only" ? HarvestSources::closest_only : HarvestSources::all_within;
  cfg.cutoff = cli.o.cutoff;
  cfg.quantize_energy = cli.o.quantize;
  cfg.decode_mode = cli.o.decode == "expected" ? DecodeMode::expected : DecodeMode::bernoulli;
  cfg.Qs = cli.o.Qs;
  cfg.initial_charge = cli.o.initial_charge * 1e-6;
  cfg.validate();

  std::vector<std::uint64_t> seeds;
  if (cli.o.reps == 1) {
    seeds.push_back(cli.o.seed);
  } else {
    for (std::size_t r = 0; r < cli.o.reps; ++r) seeds.push_back(derive_seed(cli.o.seed, 1000 + r));
  }
  Replicated rep;
  if (seeds.size() == 1) {
    rep.runs.push_back(run_simulation(cfg));
  } else {
    rep = replicate(cfg, seeds, cli.o.threads);
  }

  header(os, "simulate");
  echo_scenario_exact(cli, os);
  echo_kv(os, "seed", std::to_string(cli.o.seed));
  echo_kv(os, "cycles", std::to_string(cli.o.cycles));
  echo_kv(os, "harvest", '"' + cli.o.harvest + '"');
  echo_kv(os, "cutoff", fmt(cli.o.cutoff));
  echo_kv(os, "quantize", cli.o.quantize ? "true" : "false");
  echo_kv(os, "decode", '"' + cli.o.decode + '"');
  echo_kv(os, "reps", std::to_string(cli.o.reps));
  echo_kv(os, "Qs", fmt(cli.o.Qs));
  echo_kv(os, "initial-charge", fmt(cli.o.initial_charge));
  note_snapping(os, cfg.scenario);
  if (rep.runs.size() > 1) {
    os << "# summary: throughput_kbit_s " << fixed(rep.throughput_bits_s.mean * 1e-3) << " +- "
       << fixed(rep.throughput_bits_s.half_width * 1e-3) << " (95%)\n";
    os << "# summary: blackout_rate " << fixed(rep.blackout_rate.mean) << " +- " << fixed(rep.blackout_rate.half_width)
       << " (95%)\n";
  }
  os << "seed,cycles,slots,attempts,delivered,throughput_kbit_s,blackout_rate,max_silent_slots,"
        "harvested_J,overflow_J,rounding_J,outage_J,consumed_J,final_battery_J\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const SimOutcome& r = rep.runs[i];
    os << seeds[i] << ',' << r.cycles << ',' << r.slots << ',' << r.attempts << ',' << fixed(r.delivered_pkts) << ','
       << fixed(r.throughput_bits_s * 1e-3) << ',' << fixed(r.blackout_rate()) << ',' << r.max_silent_slots << ','
       << fixed(r.energy_harvested_J) << ',' << fixed(r.energy_wasted_overflow_J) << ','
       << fixed(r.energy_lost_rounding_J) << ',' << fixed(r.energy_lost_outage_J) << ','
       << fixed(r.energy_consumed_J) << ',' << fixed(r.final_battery_J) << '\n';
  }
  return kOk;
}

int cmd_validate_cdf(const Cli& cli, std::ostream& os) {
  const Scenario s = Scenario::build(cli.u.to_params());
  const SegmentRates rates = segment_rates(s);
  const EnergyCdf analytic = analytic_cdf(s);
  const EnergyCdf empirical = empirical_cdf(rates, s.params().fading, cli.o.draws, cli.o.seed);
  const CdfAccuracy acc = cdf_accuracy(analytic, empirical);
  header(os, "validate-cdf");
  echo_scenario_exact(cli, os);
  echo_kv(os, "seed", std::to_string(cli.o.seed));
  echo_kv(os, "draws", std::to_string(cli.o.draws));
  note_snapping(os, s);
  if (!analytic.note().empty()) os << "# note: " << analytic.note() << '\n';
  os << "ell_m,L,fading,kappa_dB,method,mean_J,accuracy_cdf,accuracy_ccdf,ks\n";
  const double kappa = s.kappa();
  os << fixed(s.ell()) << ',' << rates.size() << ',' << fading_label(s.params().fading) << ','
     << (kappa > 0 ? fixed(10.0 * std::log10(kappa)) : "") << ',' << to_string(analytic.kind()) << ','
     << fixed(analytic.mean()) << ',' << fixed(acc.cdf) << ',' << fixed(acc.ccdf) << ','
     << fixed(ks_distance(empirical, analytic)) << '\n';
  return kOk;
}

// Applies scenario flags given on the command line or in --config.
ScenarioParams overlay(const Cli& cli, ScenarioParams base) {
  const ScenarioParams user = cli.u.to_params();
  for (const auto& f : cli.scenario_opts) {
    if (f.opt->count() == 0) continue;
    const std::string key = f.opt->get_lnames().front();
    if (key == "ell") base.ell = user.ell;
    else if (key == "Pt") base.Pt = user.Pt;
    else if (key == "Pv") base.Pv = user.Pv;
    else if (key == "N0") base.N0 = user.N0;
    else if (key == "T") base.T = user.T;
    else if (key == "B") base.B = user.B;
    else if (key == "S") base.S = user.S;
    else if (key == "G") base.G = user.G;
    else if (key == "fading" || key == "kappa") base.fading = user.fading;
    else if (key == "traffic" || key == "mu" || key == "d0") base.traffic = user.traffic;
    else if (key == "r") base.r = user.r;
    else if (key == "w-off") base.w_off = user.w_off;
    else if (key == "v0") base.v0 = user.v0;
    else if (key == "alpha") base.alpha = user.alpha;
    else if (key == "eta") base.eta = user.eta;
  }
  return base;
}

void apply_overrides(const Cli& cli, Recipe& recipe) {
  std::visit(
      [&](auto& spec) {
        spec.base = overlay(cli, spec.base);
        if (cli.o.threads) spec.threads = cli.o.threads;
      },
      recipe.spec);
}

void recipe_header(const Cli& cli, std::ostream& os, const Recipe& recipe, const char* command) {
  header(os, command);
  os << "# recipe: " << recipe.name << " (" << recipe.kind() << ")\n";
  if (!recipe.title.empty()) os << "# title: " << recipe.title << '\n';
  echo_scenario_exact(cli, os, true);
}

int cmd_sweep(const Cli& cli, std::ostream& os) {
  Recipe recipe = load_recipe(cli.o.recipe_path);
  apply_overrides(cli, recipe);
  std::ostringstream body;
  run_recipe(recipe, body);
  recipe_header(cli, os, recipe, "sweep");
  os << body.str();
  return kOk;
}

std::vector<std::string> all_recipes(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

int cmd_reproduce(const Cli& cli) {
  const fs::path dir = cli.o.recipe_dir;
  std::vector<std::string> names = cli.o.figures;
  if (names.size() == 1 && names.front() == "all") names = all_recipes(dir);
  fs::create_directories(cli.o.out_dir);
  for (const auto& name : names) {
    const fs::path path = dir / (name + ".json");
    if (!fs::exists(path)) throw ValidationError("figure", "no recipe " + path.string());
    Recipe recipe = load_recipe(path);
    apply_overrides(cli, recipe);
    std::ostringstream body;
    run_recipe(recipe, body);
    const fs::path out = fs::path(cli.o.out_dir) / (name + ".csv");
    std::ofstream file(out);
    if (!file) throw ValidationError("out-dir", "cannot write " + out.string());
    recipe_header(cli, file, recipe, "reproduce");
    file << body.str();
    std::cout << out.string() << '\n';
  }
  return kOk;
}

int dispatch(Cli& cli) {
  if (*cli.reproduce) return cmd_reproduce(cli);
  Output out(cli.o.output);
  std::ostream& os = *out.os;
  if (*cli.throughput) return cmd_throughput(cli, os);
  if (*cli.blackout) return cmd_blackout(cli, os);
  if (*cli.efficiency) return cmd_efficiency(cli, os);
  if (*cli.chain) return cmd_chain(cli, os);
  if (*cli.simulate) return cmd_simulate(cli, os);
  if (*cli.sweep) return cmd_sweep(cli, os);
  if (*cli.validate_cdf) return cmd_validate_cdf(cli, os);
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.app.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.app.exit(e);
    return kUsage;
  }

  const std::string command = cli.app.get_subcommands().front()->get_name();
  try {
    return dispatch(cli);
  } catch (const ValidationError& e) {
    std::cerr << "vharvest " << command << ": invalid parameter " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedModel& e) {
    std::cerr << "vharvest " << command << ": unsupported combination: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "vharvest " << command << ": numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "vharvest " << command << ": " << e.what() << '\n';
    return kNumerical;
  }
}

#include "vharvest/recipe.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vharvest/errors.hpp"

namespace vharvest {

namespace {

using json = nlohmann::json;

double number(const json& j, const char* key) {
  if (!j.at(key).is_number()) throw ValidationError(key, "must be a number");
  return j.at(key).get<double>();
}

// A list of numbers, or {"from", "to", "step"} (inclusive).
std::vector<double> axis(const json& j, const char* key, double scale) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  const json& a = j.at(key);
  if (a.is_array()) {
    for (const auto& v : a) {
      if (!v.is_number()) throw ValidationError(key, "axis entries must be numbers");
      out.push_back(v.get<double>() * scale);
    }
  } else if (a.is_object()) {
    const double from = number(a, "from");
    const double to = number(a, "to");
    const double step = a.contains("step") ? number(a, "step") : 1.0;
    if (!(step > 0.0) || to < from) throw ValidationError(key, "bad range");
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back((from + i * step) * scale);
  } else if (a.is_number()) {
    out.push_back(a.get<double>() * scale);
  } else {
    throw ValidationError(key, "expected a list, a range object or a number");
  }
  return out;
}

TrafficModel traffic_from(const json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "poisson") return Poisson{number(j, "mu")};
  if (model == "platoon") return Platoon{number(j, "d0_m")};
  throw ValidationError("traffic", "unknown model '" + model + "'");
}

FadingModel fading_from(const json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "rayleigh") return Rayleigh{};
  if (model == "rician") return Rician{db_to_linear(number(j, "kappa_dB"))};
  throw ValidationError("fading", "unknown model '" + model + "'");
}

ScenarioParams params_from(const json& j, ScenarioParams p) {
  if (!j.is_object()) throw ValidationError("base", "must be an object");
  struct Field {
    const char* key;
    double ScenarioParams::*member;
    double scale;
  };
  static const Field fields[] = {
      {"r_m", &ScenarioParams::r, 1.0},        {"w_off_m", &ScenarioParams::w_off, 1.0},
      {"T_ms", &ScenarioParams::T, 1e-3},      {"v0_mps", &ScenarioParams::v0, 1.0},
      {"Pt_uW", &ScenarioParams::Pt, 1e-6},    {"Pv_mW", &ScenarioParams::Pv, 1e-3},
      {"alpha", &ScenarioParams::alpha, 1.0},  {"eta", &ScenarioParams::eta, 1.0},
      {"B_kHz", &ScenarioParams::B, 1e3},      {"S_kbit", &ScenarioParams::S, 1e3},
      {"G_uJ", &ScenarioParams::G, 1e-6},      {"ell_m", &ScenarioParams::ell, 1.0},
  };
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& f : fields) {
      if (key == f.key) {
        p.*(f.member) = number(j, f.key) * f.scale;
        known = true;
      }
    }
    if (key == "N0_dBm") {
      p.N0 = dbm_to_watts(number(j, "N0_dBm"));
    } else if (key == "traffic") {
      p.traffic = traffic_from(value);
    } else if (key == "fading") {
      p.fading = fading_from(value);
    } else if (!known) {
      throw ValidationError(key, "unknown scenario key");
    }
  }
  return p;
}

SimSettings sim_from(const json& j) {
  SimSettings s;
  if (!j.contains("sim")) return s;
  const json& o = j.at("sim");
  if (o.contains("n_cycles")) s.n_cycles = o.at("n_cycles").get<std::uint64_t>();
  if (o.contains("seed")) s.seed = o.at("seed").get<std::uint64_t>();
  if (o.contains("n_reps")) s.n_reps = o.at("n_reps").get<std::size_t>();
  if (o.contains("cutoff_m")) s.cutoff = number(o, "cutoff_m");
  if (o.contains("harvest_sources")) {
    const std::string h = o.at("harvest_sources").get<std::string>();
    if (h == "closest_only") {
      s.harvest_sources = HarvestSources::closest_only;
    } else if (h == "all_within") {
      s.harvest_sources = HarvestSources::all_within;
    } else {
      throw ValidationError("harvest_sources", "unknown value '" + h + "'");
    }
  }
  return s;
}

std::vector<TrafficModel> traffic_axis(const json& j) {
  std::vector<TrafficModel> out;
  if (j.contains("traffic")) {
    for (const auto& t : j.at("traffic")) out.push_back(traffic_from(t));
  }
  return out;
}

TrafficKind kind_from(const json& j, const char* key, TrafficKind fallback) {
  if (!j.contains(key)) return fallback;
  const std::string v = j.at(key).get<std::string>();
  if (v == "platoon") return TrafficKind::platoon;
  if (v == "poisson") return TrafficKind::poisson;
  throw ValidationError(key, "unknown traffic kind '" + v + "'");
}

}  // namespace

const char* Recipe::kind() const {
  switch (spec.index()) {
    case 0: return "sweep";
    case 1: return "cdf_accuracy";
    case 2: return "quantization";
    case 3: return "price";
    default: return "tradeoff";
  }
}

ScenarioParams params_from_json(const std::string& json_object, ScenarioParams base) {
  try {
    return params_from(json::parse(json_object), base);
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
}

Recipe parse_recipe(const std::string& text) {
  try {
    const json j = json::parse(text);
    Recipe r;
    r.name = j.at("name").get<std::string>();
    r.title = j.value("title", "");
    const std::string kind = j.at("kind").get<std::string>();
    const ScenarioParams base = j.contains("base") ? params_from(j.at("base"), {}) : ScenarioParams{};
    const unsigned threads = j.value("threads", 0u);

    if (kind == "sweep") {
      SweepSpec s;
      s.base = base;
      s.ell = axis(j, "ell_m", 1.0);
      s.Pt = axis(j, "Pt_uW", 1e-6);
      s.S = axis(j, "S_kbit", 1e3);
      s.G = axis(j, "G_uJ", 1e-6);
      s.traffic = traffic_axis(j);
      if (j.contains("fading")) {
        for (const auto& f : j.at("fading")) s.fading.push_back(fading_from(f));
      }
      s.outputs.theta = true;
      if (j.contains("outputs")) {
        for (const auto& o : j.at("outputs")) {
          const std::string name = o.get<std::string>();
          if (name == "upsilon") {
            s.outputs.upsilon = true;
          } else if (name == "pbo") {
            s.outputs.pbo = true;
          } else if (name == "sim") {
            s.outputs.sim_validation = true;
          } else if (name != "theta") {
            throw ValidationError("outputs", "unknown output '" + name + "'");
          }
        }
      }
      s.Qs = j.value("Qs_s", 2.0);
      s.sim = sim_from(j);
      s.threads = threads;
      r.spec = s;
    } else if (kind == "cdf_accuracy") {
      CdfAccuracySpec s;
      s.base = base;
      s.ell = axis(j, "ell_m", 1.0);
      for (double k : axis(j, "kappa_dB", 1.0)) s.kappa.push_back(db_to_linear(k));
      s.draws = j.value("draws", std::size_t{1'000'000});
      s.seed = j.value("seed", std::uint64_t{1});
      s.threads = threads;
      r.spec = s;
    } else if (kind == "quantization") {
      QuantizationSpec s;
      s.base = base;
      s.traffic = traffic_axis(j);
      s.ell = axis(j, "ell_m", 1.0);
      s.sim = sim_from(j);
      s.threads = threads;
      r.spec = s;
    } else if (kind == "price") {
      PriceSpec s;
      s.base = base;
      s.mean_spacing = axis(j, "mean_dv_m", 1.0);
      s.ell = axis(j, "ell_m", 1.0);
      s.Pt = axis(j, "Pt_uW", 1e-6);
      s.regular = kind_from(j, "regular", TrafficKind::platoon);
      s.reference = kind_from(j, "reference", TrafficKind::poisson);
      s.threads = threads;
      r.spec = s;
    } else if (kind == "tradeoff") {
      TradeoffSpec s;
      s.base = base;
      s.ell = axis(j, "ell_m", 1.0);
      s.Pt = axis(j, "Pt_uW", 1e-6);
      s.S = axis(j, "S_kbit", 1e3);
      s.Qs = j.value("Qs_s", 2.0);
      s.bound = j.value("bound", 1e-3);
      s.threads = threads;
      r.spec = s;
    } else {
      throw ValidationError("kind", "unknown recipe kind '" + kind + "'");
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError("recipe", e.what());
  }
}

Recipe load_recipe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("recipe", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_recipe(buf.str());
}

void run_recipe(const Recipe& recipe, std::ostream& csv) {
  std::visit(
      [&](const auto& spec) {
        using S = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<S, SweepSpec>) {
          write_sweep_csv(csv, spec, run_sweep(spec));
        } else if constexpr (std::is_same_v<S, CdfAccuracySpec>) {
          write_cdf_accuracy_csv(csv, cdf_accuracy_sweep(spec));
        } else if constexpr (std::is_same_v<S, QuantizationSpec>) {
          write_quantization_csv(csv, quantization_sweep(spec));
        } else if constexpr (std::is_same_v<S, PriceSpec>) {
          write_price_csv(csv, price_of_uncertainty(spec));
        } else {
          write_tradeoff_csv(csv, spec, tradeoff_table(spec));
        }
      },
      recipe.spec);
}

}  // namespace vharvest

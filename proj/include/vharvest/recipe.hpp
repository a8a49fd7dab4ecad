#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "vharvest/sweep.hpp"

namespace vharvest {

/// A figure-reproduction recipe: a named experiment of one kind.
struct Recipe {
  std::string name;    // e.g. "fig5"
  std::string title;
  std::variant<SweepSpec, CdfAccuracySpec, QuantizationSpec, PriceSpec, TradeoffSpec> spec;

  const char* kind() const;
};

/// Parses recipe JSON. Units: ell_m, Pt_uW, Pv_mW, S_kbit, G_uJ, T_ms, B_kHz,
/// N0_dBm, kappa_dB, mu (vehicles/m), d0_m, r_m, w_off_m. Throws ValidationError.
Recipe parse_recipe(const std::string& json_text);
Recipe load_recipe(const std::filesystem::path& path);

/// Scenario fields from a JSON object with the recipe units; absent keys keep
/// the values of `base`.
ScenarioParams params_from_json(const std::string& json_object, ScenarioParams base = {});

/// Runs a recipe and writes its CSV body (no header comments).
void run_recipe(const Recipe& recipe, std::ostream& csv);

}  // namespace vharvest

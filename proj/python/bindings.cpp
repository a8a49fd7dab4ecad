#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vharvest/blackout.hpp"
#include "vharvest/energy_cdf.hpp"
#include "vharvest/errors.hpp"
#include "vharvest/metrics.hpp"
#include "vharvest/recipe.hpp"
#include "vharvest/scenario.hpp"
#include "vharvest/simulator.hpp"
#include "vharvest/version.hpp"

namespace py = pybind11;
using namespace vharvest;

PYBIND11_MODULE(_core, m) {
  m.doc() = "RF energy harvesting from vehicular traffic: analysis and simulation";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<UnsupportedModel>(m, "UnsupportedModel", PyExc_NotImplementedError);

  py::class_<Rician>(m, "Rician")
      .def(py::init<double>(), py::arg("kappa") = 10.0)
      .def_readwrite("kappa", &Rician::kappa);
  py::class_<Rayleigh>(m, "Rayleigh").def(py::init<>());
  py::class_<Poisson>(m, "Poisson")
      .def(py::init<double>(), py::arg("mu") = 1.0 / 50.0)
      .def_readwrite("mu", &Poisson::mu);
  py::class_<Platoon>(m, "Platoon")
      .def(py::init<double>(), py::arg("d0") = 50.0)
      .def_readwrite("d0", &Platoon::d0);

  py::class_<ScenarioParams>(m, "ScenarioParams", "Scenario inputs in SI units")
      .def(py::init<>())
      .def_readwrite("r", &ScenarioParams::r)
      .def_readwrite("w_off", &ScenarioParams::w_off)
      .def_readwrite("T", &ScenarioParams::T)
      .def_readwrite("v0", &ScenarioParams::v0)
      .def_readwrite("Pt", &ScenarioParams::Pt)
      .def_readwrite("Pv", &ScenarioParams::Pv)
      .def_readwrite("N0", &ScenarioParams::N0)
      .def_readwrite("alpha", &ScenarioParams::alpha)
      .def_readwrite("eta", &ScenarioParams::eta)
      .def_readwrite("B", &ScenarioParams::B)
      .def_readwrite("S", &ScenarioParams::S)
      .def_readwrite("G", &ScenarioParams::G)
      .def_readwrite("fading", &ScenarioParams::fading)
      .def_readwrite("traffic", &ScenarioParams::traffic)
      .def_readwrite("ell", &ScenarioParams::ell);

  py::class_<Derived>(m, "Derived")
      .def_readonly("E_tx", &Derived::E_tx)
      .def_readonly("N_s", &Derived::N_s)
      .def_readonly("L", &Derived::L)
      .def_readonly("step", &Derived::step);

  py::class_<Scenario>(m, "Scenario")
      .def_static("build", &Scenario::build, py::arg("params"))
      .def_static("defaults", &Scenario::defaults, py::arg("ell") = 4.0)
      .def_property_readonly("params", &Scenario::params)
      .def_property_readonly("derived", &Scenario::derived)
      .def_property_readonly("ell", &Scenario::ell);

  m.def("decoding_probability", py::overload_cast<const Scenario&>(&decoding_probability));

  py::class_<ThroughputResult>(m, "ThroughputResult")
      .def_readonly("theta_pkt", &ThroughputResult::theta_pkt)
      .def_readonly("theta_bits", &ThroughputResult::theta_bits)
      .def_readonly("psi", &ThroughputResult::psi)
      .def_readonly("phi_s", &ThroughputResult::phi_s)
      .def_property_readonly("theta_kbit", &ThroughputResult::theta_kbit);

  m.def("throughput", [](const Scenario& s) { return analyze(s).throughput; }, py::arg("scenario"),
        "Analytic throughput of a scenario");
  m.def("stationary_battery", [](const Scenario& s) { return analyze(s).stationary.pi.p; }, py::arg("scenario"),
        "Stationary battery pmf over quanta 0..N_s");
  m.def("efficiency",
        [](const Scenario& s) {
          const auto e = efficiency(s, analyze(s).throughput);
          return py::make_tuple(e.epsilon, e.upsilon);
        },
        py::arg("scenario"), "(RF power density [W], bits per joule)");
  m.def("blackout_probability", py::overload_cast<const Scenario&, double>(&blackout_probability),
        py::arg("scenario"), py::arg("Qs") = 2.0);
  m.def("energy_cdf",
        [](const Scenario& s, const std::vector<double>& x) {
          const EnergyCdf cdf = analytic_cdf(s);
          std::vector<double> out;
          out.reserve(x.size());
          for (double v : x) out.push_back(cdf(v));
          return out;
        },
        py::arg("scenario"), py::arg("x"), "F_E at the given energies [J]");

  py::enum_<HarvestSources>(m, "HarvestSources")
      .value("closest_only", HarvestSources::closest_only)
      .value("all_within", HarvestSources::all_within);
  py::enum_<DecodeMode>(m, "DecodeMode")
      .value("bernoulli", DecodeMode::bernoulli)
      .value("expected", DecodeMode::expected);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("scenario", &SimConfig::scenario)
      .def_readwrite("n_cycles", &SimConfig::n_cycles)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("harvest_sources", &SimConfig::harvest_sources)
      .def_readwrite("cutoff", &SimConfig::cutoff)
      .def_readwrite("quantize_energy", &SimConfig::quantize_energy)
      .def_readwrite("decode_mode", &SimConfig::decode_mode)
      .def_readwrite("Qs", &SimConfig::Qs);

  py::class_<SimOutcome>(m, "SimOutcome")
      .def_readonly("delivered_pkts", &SimOutcome::delivered_pkts)
      .def_readonly("attempts", &SimOutcome::attempts)
      .def_readonly("cycles", &SimOutcome::cycles)
      .def_readonly("slots", &SimOutcome::slots)
      .def_readonly("throughput_bits_s", &SimOutcome::throughput_bits_s)
      .def_readonly("blackout_cycles", &SimOutcome::blackout_cycles)
      .def_readonly("energy_harvested_J", &SimOutcome::energy_harvested_J)
      .def_property_readonly("blackout_rate", &SimOutcome::blackout_rate)
      .def("battery_start_pmf", &SimOutcome::battery_start_pmf)
      .def("energy_imbalance_J", &SimOutcome::energy_imbalance_J);

  m.def("simulate", &run_simulation, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("quantization_error", &quantization_error, py::arg("config"), py::call_guard<py::gil_scoped_release>());

  m.def("run_recipe",
        [](const std::string& json_text) {
          const Recipe recipe = parse_recipe(json_text);
          std::ostringstream csv;
          {
            py::gil_scoped_release release;
            run_recipe(recipe, csv);
          }
          return csv.str();
        },
        py::arg("json_text"), "Runs a recipe given as JSON text and returns its CSV");
}

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spopo/cavity.hpp"
#include "spopo/commands.hpp"
#include "spopo/config.hpp"
#include "spopo/errors.hpp"
#include "spopo/homodyne.hpp"
#include "spopo/squeezing.hpp"
#include "spopo/state.hpp"
#include "spopo/supermodes.hpp"
#include "spopo/trace_io.hpp"
#include "spopo/units.hpp"

namespace py = pybind11;
using namespace spopo;

PYBIND11_MODULE(_spopo, m) {
  m.doc() = "SPOPO multimode squeezing simulation and homodyne analysis";
  m.attr("__version__") = SPOPO_VERSION;

  auto precondition = py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<AboveThresholdError>(m, "AboveThresholdError", precondition);
  py::register_exception<IllDefinedFwhmError>(m, "IllDefinedFwhmError", PyExc_ValueError);
  py::register_exception<InconsistentEfficiencyError>(m, "InconsistentEfficiencyError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("db", &db);
  m.def("db_inv", &db_inv);

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init<>())
      .def(py::init<double, double, std::size_t>(), py::arg("center_nm"), py::arg("span_nm"), py::arg("n_points"))
      .def_property_readonly("step", &FrequencyGrid::step)
      .def_property_readonly("points",
                             [](const FrequencyGrid& g) { return std::vector<double>(g.points().begin(), g.points().end()); })
      .def("__len__", &FrequencyGrid::size);

  py::class_<SupermodeBasis>(m, "SupermodeBasis")
      .def_readonly("grid", &SupermodeBasis::grid)
      .def_readonly("modes", &SupermodeBasis::modes)
      .def_readonly("gains", &SupermodeBasis::gains)
      .def_readonly("cutoff", &SupermodeBasis::cutoff)
      .def("__len__", &SupermodeBasis::size);

  m.def(
      "decompose",
      [](const FrequencyGrid& grid, double pump_fwhm, double phasematch_fwhm, std::size_t k_max, double gain_floor) {
        return decompose(build_kernel(grid, pump_fwhm, phasematch_fwhm), k_max, gain_floor);
      },
      py::arg("grid"), py::arg("pump_fwhm"), py::arg("phasematch_fwhm"), py::arg("k_max") = 40,
      py::arg("gain_floor") = kDefaultGainFloor);
  m.def("analytic_oracle", &analytic_oracle, py::arg("pump_fwhm"), py::arg("phasematch_fwhm"), py::arg("grid"),
        py::arg("k_max"), py::arg("gain_floor") = kDefaultGainFloor);
  m.def(
      "mode_fwhm",
      [](const SupermodeBasis& b, std::size_t k, bool envelope) {
        return mode_fwhm(b, k, envelope ? FwhmKind::kEnvelope : FwhmKind::kStrict);
      },
      py::arg("basis"), py::arg("k"), py::arg("envelope") = false);
  m.def("schmidt_ratio", &schmidt_ratio);

  py::class_<CavityParams>(m, "CavityParams")
      .def(py::init<>())
      .def_readwrite("length_m", &CavityParams::length_m)
      .def_readwrite("r_ic", &CavityParams::r_ic)
      .def_readwrite("r_oc", &CavityParams::r_oc)
      .def_readwrite("intracavity_loss", &CavityParams::intracavity_loss);
  py::class_<DetectionBudget>(m, "DetectionBudget")
      .def(py::init<>())
      .def_readwrite("eta_pd", &DetectionBudget::eta_pd)
      .def_readwrite("eta_opt", &DetectionBudget::eta_opt)
      .def_readwrite("visibility", &DetectionBudget::visibility)
      .def_readwrite("eta_bkg", &DetectionBudget::eta_bkg);
  m.def("free_spectral_range", &free_spectral_range);
  m.def("finesse", &finesse);
  m.def("cavity_bandwidth_fwhm", &cavity_bandwidth_fwhm);
  m.def("escape_efficiency", &escape_efficiency);
  m.def("total_efficiency", &total_efficiency);

  m.def("detected_variance", &detected_variance, py::arg("sigma2_spopo"), py::arg("eta_hom"));
  m.def("infer_output_variance", &infer_output_variance, py::arg("sigma2_detected"), py::arg("eta_hom"));

  py::class_<SqueezedThermalState>(m, "SqueezedThermalState")
      .def(py::init<double, double>(), py::arg("n_th") = 0.0, py::arg("r") = 0.0)
      .def_readwrite("n_th", &SqueezedThermalState::n_th)
      .def_readwrite("r", &SqueezedThermalState::r);
  m.def("st_variance", &st_variance, py::arg("state"), py::arg("theta"));
  m.def("purity", &purity);
  m.def("nonclassical_depth", &nonclassical_depth);
  m.def("wigner", &wigner, py::arg("state"), py::arg("x"), py::arg("p"));
  m.def(
      "fit_squeezed_thermal",
      [](std::vector<double> thetas, std::vector<double> variances, bool fit_alpha) {
        VarianceCurve curve{std::move(thetas), std::move(variances), {}};
        FitOptions options;
        options.fit_alpha = fit_alpha;
        const auto r = fit_squeezed_thermal(curve, options);
        py::dict out;
        out["n_th"] = r.state.n_th;
        out["r"] = r.state.r;
        out["theta0"] = r.scan.theta0;
        out["alpha"] = r.scan.alpha;
        out["residual"] = r.residual;
        out["degenerate"] = r.degenerate;
        return out;
      },
      py::arg("thetas"), py::arg("variances"), py::arg("fit_alpha") = true);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("cavity", &ExperimentConfig::cavity)
      .def_readwrite("detection", &ExperimentConfig::detection)
      .def_property(
          "seed", [](const ExperimentConfig& c) { return c.acquisition.rng_seed; },
          [](ExperimentConfig& c, std::uint64_t s) { c.acquisition.rng_seed = s; })
      .def_property(
          "n_samples", [](const ExperimentConfig& c) { return c.acquisition.n_samples; },
          [](ExperimentConfig& c, std::size_t n) { c.acquisition.n_samples = n; })
      .def_property(
          "pump_power_mw", [](const ExperimentConfig& c) { return c.pump.power_mw; },
          [](ExperimentConfig& c, double p) { c.pump.power_mw = p; })
      .def("serialize", &serialize_config)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source_name") = "<config>");
  m.def("load_config", &load_config);

  m.def("build_basis", &build_basis);
  m.def(
      "budget",
      [](const ExperimentConfig& c) {
        const auto b = cmd_budget(c);
        py::dict out;
        out["fsr_mhz"] = b.fsr_mhz;
        out["finesse"] = b.finesse;
        out["bandwidth_mhz"] = b.bandwidth_mhz;
        out["escape_efficiency"] = b.escape_efficiency;
        out["gdd_residual_fs2"] = b.gdd_residual_fs2;
        out["eta_hom"] = b.eta_hom;
        out["parametric_gain"] = b.parametric_gain;
        return out;
      },
      py::arg("config") = ExperimentConfig{});

  auto curve_to_list = [](const std::vector<ScanPoint>& c) {
    std::vector<std::tuple<double, double, double>> out;
    for (const auto& p : c) out.emplace_back(p.x, p.squeezing_db, p.antisqueezing_db);
    return out;
  };
  m.def(
      "scan_pump",
      [curve_to_list](const ExperimentConfig& c, double p_min, double p_max, std::size_t n,
                      const std::filesystem::path& out_dir) {
        return curve_to_list(cmd_scan_pump(c, p_min, p_max, n, {out_dir}).curve);
      },
      py::arg("config"), py::arg("p_min"), py::arg("p_max"), py::arg("n"), py::arg("out_dir"));
  m.def(
      "scan_lo",
      [curve_to_list](const ExperimentConfig& c, double w_min, double w_max, std::size_t n,
                      const std::filesystem::path& out_dir) {
        return curve_to_list(cmd_scan_lo(c, w_min, w_max, n, {out_dir}).curve);
      },
      py::arg("config"), py::arg("w_min"), py::arg("w_max"), py::arg("n"), py::arg("out_dir"));
  m.def(
      "simulate_trace",
      [](const ExperimentConfig& c, const std::filesystem::path& out_path) {
        const auto r = cmd_simulate_trace(c, out_path);
        return py::make_tuple(r.trace_path, r.vacuum_path);
      },
      py::arg("config"), py::arg("out_path"));
  m.def(
      "analyze_trace",
      [](const ExperimentConfig& c, const std::filesystem::path& trace, const std::filesystem::path& vacuum,
         const std::filesystem::path& out_dir, bool fit_alpha) {
        AnalyzeOptions a;
        a.fit_alpha = fit_alpha;
        const auto r = cmd_analyze_trace(c, trace, vacuum, a, {out_dir});
        py::dict out;
        out["squeezing_db"] = r.squeezing_db;
        out["antisqueezing_db"] = r.antisqueezing_db;
        out["error"] = r.error;
        if (r.fit) {
          out["n_th"] = r.fit->state.n_th;
          out["r"] = r.fit->state.r;
          out["alpha"] = r.fit->scan.alpha;
          out["purity"] = r.purity;
          out["nonclassical_depth"] = r.nonclassical_depth;
        }
        return out;
      },
      py::arg("config"), py::arg("trace"), py::arg("vacuum"), py::arg("out_dir"), py::arg("fit_alpha") = true);
  m.def(
      "read_trace_samples", [](const std::filesystem::path& p) { return read_trace(p).samples; }, py::arg("path"));
}

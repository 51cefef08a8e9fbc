#include "spopo/commands.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "spopo/atomic_file.hpp"
#include "spopo/cavity.hpp"
#include "spopo/errors.hpp"
#include "spopo/trace_io.hpp"
#include "spopo/units.hpp"

namespace spopo {
namespace {

using nlohmann::json;

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) throw PreconditionError("scan: need at least one point");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = b;
  return out;
}

std::ostringstream csv_stream(const ExperimentConfig& config) {
  std::ostringstream out;
  out << std::setprecision(15);
  out << provenance_line(config) << '\n';
  return out;
}

std::filesystem::path emit(const RunOptions& options, const std::string& name, const std::string& contents) {
  const auto path = options.out_dir / name;
  write_file_atomic(path, contents);
  return path;
}

void emit_plot_script(const RunOptions& options, const std::string& name, const std::string& csv,
                      const std::string& xlabel, std::vector<std::filesystem::path>& files) {
  if (!options.plot_script) return;
  std::ostringstream s;
  s << "# gnuplot stub; any tool that reads CSV works the same way\n"
    << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel '" << xlabel << "'\n"
    << "set ylabel 'dB'\n"
    << "plot '" << csv << "' every ::1 using 1:2 with linespoints, '' every ::1 using 1:3 with linespoints\n";
  files.push_back(emit(options, name, s.str()));
}

json config_json(const ExperimentConfig& config) {
  return json{{"config_hash", config_hash(config)}, {"config_yaml", serialize_config(config)}};
}

json curve_json(const std::vector<ScanPoint>& curve) {
  json rows = json::array();
  for (const auto& p : curve) rows.push_back({p.x, p.squeezing_db, p.antisqueezing_db});
  return rows;
}

std::string curve_csv(const ExperimentConfig& config, const std::vector<ScanPoint>& curve) {
  auto out = csv_stream(config);
  out << "x,squeezing_db,antisqueezing_db\n";
  for (const auto& p : curve) out << p.x << ',' << p.squeezing_db << ',' << p.antisqueezing_db << '\n';
  return out.str();
}

json mode_table_json(const SupermodeBasis& basis, const std::vector<VariancePair>& table) {
  json rows = json::array();
  for (std::size_t k = 0; k < table.size(); ++k) {
    rows.push_back({{"k", k},
                    {"gain", basis.gains[k]},
                    {"squeezed_db", db(table[k].squeezed)},
                    {"antisqueezed_db", db(table[k].antisqueezed)}});
  }
  return rows;
}

}  // namespace

std::string provenance_line(const ExperimentConfig& config) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash(config)));
  return std::string("# spopo ") + SPOPO_VERSION + " config_hash=" + hash;
}

SupermodeBasis build_basis(const ExperimentConfig& config) {
  config.validate();
  const auto kernel = build_kernel(config.grid.make(), config.model.pump_fwhm_nm, config.model.phasematch_fwhm_nm);
  return decompose(kernel, config.model.k_max, config.model.gain_floor);
}

double lo_center_offset(const ExperimentConfig& config) { return config.lo.center_nm - config.grid.center_nm; }

BudgetReport cmd_budget(const ExperimentConfig& config) {
  config.validate();
  BudgetReport r;
  r.fsr_mhz = free_spectral_range(config.cavity);
  r.finesse = finesse(config.cavity);
  r.bandwidth_mhz = cavity_bandwidth_fwhm(config.cavity);
  r.escape_efficiency = escape_efficiency(config.cavity);
  r.gdd_residual_fs2 = gdd_residual(config.cavity);
  r.eta_hom = total_efficiency(config.detection);
  r.normalized_pump = config.pump.normalized();
  r.parametric_gain = parametric_gain(config.pump);
  return r;
}

std::string format_budget(const BudgetReport& r, OutputFormat format) {
  if (format == OutputFormat::kJson) {
    return json{{"fsr_mhz", r.fsr_mhz},
                {"finesse", r.finesse},
                {"bandwidth_mhz", r.bandwidth_mhz},
                {"escape_efficiency", r.escape_efficiency},
                {"gdd_residual_fs2", r.gdd_residual_fs2},
                {"eta_hom", r.eta_hom},
                {"normalized_pump", r.normalized_pump},
                {"parametric_gain", r.parametric_gain}}
               .dump(2) +
           "\n";
  }
  std::ostringstream out;
  out << std::fixed;
  auto row = [&](const char* name, double value, int precision, const char* unit) {
    out << std::left << std::setw(22) << name << std::right << std::setw(12) << std::setprecision(precision) << value
        << "  " << unit << '\n';
  };
  row("free spectral range", r.fsr_mhz, 3, "MHz");
  row("finesse", r.finesse, 2, "");
  row("bandwidth (FWHM)", r.bandwidth_mhz, 3, "MHz");
  row("escape efficiency", r.escape_efficiency, 4, "");
  row("residual GDD", r.gdd_residual_fs2, 1, "fs^2");
  row("eta_hom", r.eta_hom, 4, "");
  row("pump P/P_th", r.normalized_pump, 4, "");
  row("parametric gain", r.parametric_gain, 3, "");
  return out.str();
}

ModesResult cmd_modes(const ExperimentConfig& config, const RunOptions& options) {
  const auto basis = build_basis(config);
  const auto table = mode_variance_table(basis, config.pump, config.cavity, config.model.analysis_freq_mhz);
  const std::size_t rows = std::min(config.model.report_modes, basis.cutoff + 1);

  ModesResult result;
  result.widths_nm = config.lo.projection_widths_nm;
  result.cutoff = basis.cutoff;
  std::vector<ModeProjection> projections;
  for (double w : result.widths_nm) {
    projections.push_back(project_lo(LOSpectrum::gaussian(basis.grid, w, lo_center_offset(config)), basis));
  }
  result.weight_sums.assign(result.widths_nm.size(), 0.0);
  for (std::size_t k = 0; k < rows; ++k) {
    ModeRow row;
    row.k = k;
    row.gain = basis.gains[k];
    try {
      row.fwhm_nm = mode_fwhm(basis, k);
    } catch (const IllDefinedFwhmError&) {
    }
    row.squeezed_db = db(table[k].squeezed);
    row.antisqueezed_db = db(table[k].antisqueezed);
    for (std::size_t j = 0; j < projections.size(); ++j) {
      row.weights.push_back(projections[j].weights[k]);
      result.weight_sums[j] += projections[j].weights[k];
    }
    result.rows.push_back(std::move(row));
  }

  if (options.format == OutputFormat::kJson) {
    json rows_json = json::array();
    for (const auto& row : result.rows) {
      rows_json.push_back({{"k", row.k},
                           {"gain", row.gain},
                           {"fwhm_nm", row.fwhm_nm ? json(*row.fwhm_nm) : json(nullptr)},
                           {"squeezed_db", row.squeezed_db},
                           {"antisqueezed_db", row.antisqueezed_db},
                           {"weights", row.weights}});
    }
    json doc{{"widths_nm", result.widths_nm},
             {"cutoff", result.cutoff},
             {"weight_sums", result.weight_sums},
             {"modes", rows_json},
             {"provenance", config_json(config)}};
    result.files.push_back(emit(options, "modes.json", doc.dump(2) + "\n"));
    return result;
  }

  auto modes = csv_stream(config);
  modes << "k,gain,fwhm_nm\n";
  for (const auto& row : result.rows) {
    modes << row.k << ',' << row.gain << ',';
    if (row.fwhm_nm) modes << *row.fwhm_nm;
    modes << '\n';
  }
  result.files.push_back(emit(options, "modes.csv", modes.str()));

  auto proj = csv_stream(config);
  proj << 'k';
  for (double w : result.widths_nm) proj << ",weight_" << w << "nm";
  proj << '\n';
  for (const auto& row : result.rows) {
    proj << row.k;
    for (double v : row.weights) proj << ',' << v;
    proj << '\n';
  }
  proj << "# sum";
  for (double s : result.weight_sums) proj << ',' << s;
  proj << '\n';
  result.files.push_back(emit(options, "projections.csv", proj.str()));

  auto var = csv_stream(config);
  var << "k,squeezed_db,antisqueezed_db\n";
  for (const auto& row : result.rows) var << row.k << ',' << row.squeezed_db << ',' << row.antisqueezed_db << '\n';
  result.files.push_back(emit(options, "per_mode_variance.csv", var.str()));
  return result;
}

namespace {

ScanResult finish_scan(const ExperimentConfig& config, const SupermodeBasis& basis, std::vector<ScanPoint> curve,
                       const std::string& name, const std::string& xlabel, const RunOptions& options) {
  ScanResult result;
  result.curve = std::move(curve);

  // Reference operating point: configured pump and LO.
  const double eta_hom = total_efficiency(config.detection);
  const auto table = mode_variance_table(basis, config.pump, config.cavity, config.model.analysis_freq_mhz);
  const auto projection =
      project_lo(LOSpectrum::gaussian(basis.grid, config.lo.fwhm_nm, lo_center_offset(config)), basis);
  const double output = spopo_variance(0.0, projection, table);
  const double detected = detected_variance(output, eta_hom);
  result.anchor_p = config.pump.normalized();
  result.anchor_output_db = db(output);
  result.anchor_detected_db = db(detected);
  result.anchor_inferred_output_db = db(infer_output_variance(detected, eta_hom));

  json summary{{"scan", name},
               {"anchor",
                {{"p", result.anchor_p},
                 {"lo_fwhm_nm", config.lo.fwhm_nm},
                 {"detected_squeezing_db", result.anchor_detected_db},
                 {"output_squeezing_db", result.anchor_output_db},
                 {"inferred_output_squeezing_db", result.anchor_inferred_output_db}}},
               {"eta_hom", eta_hom},
               {"escape_efficiency", escape_efficiency(config.cavity)},
               {"cutoff", basis.cutoff},
               {"per_mode", mode_table_json(basis, table)},
               {"provenance", config_json(config)}};

  if (options.format == OutputFormat::kJson) {
    summary["curve_columns"] = {"x", "squeezing_db", "antisqueezing_db"};
    summary["curve"] = curve_json(result.curve);
    result.files.push_back(emit(options, name + ".json", summary.dump(2) + "\n"));
    return result;
  }
  result.files.push_back(emit(options, name + ".csv", curve_csv(config, result.curve)));
  result.files.push_back(emit(options, name + ".json", summary.dump(2) + "\n"));
  emit_plot_script(options, name + ".gp", name + ".csv", xlabel, result.files);
  return result;
}

}  // namespace

ScanResult cmd_scan_pump(const ExperimentConfig& config, double p_min, double p_max, std::size_t n,
                         const RunOptions& options) {
  if (!(p_min >= 0.0 && p_max < 1.0 && (n == 1 || p_min < p_max))) {
    throw PreconditionError("scan-pump: need 0 <= p_min < p_max < 1");
  }
  const auto basis = build_basis(config);
  const auto lo = LOSpectrum::gaussian(basis.grid, config.lo.fwhm_nm, lo_center_offset(config));
  const auto ps = linspace(p_min, p_max, n);
  auto curve = scan_pump(ps, config.pump.threshold_mw, lo, basis, config.cavity, config.detection,
                         config.model.analysis_freq_mhz);
  return finish_scan(config, basis, std::move(curve), "scan_pump", "P / P_th", options);
}

ScanResult cmd_scan_lo(const ExperimentConfig& config, double w_min, double w_max, std::size_t n,
                       const RunOptions& options) {
  if (!(w_min > 0.0 && (n == 1 || w_min < w_max))) throw PreconditionError("scan-lo: need 0 < w_min < w_max");
  const auto basis = build_basis(config);
  const auto widths = linspace(w_min, w_max, n);
  auto curve = scan_lo_width(widths, config.pump, basis, config.cavity, config.detection,
                             config.model.analysis_freq_mhz, lo_center_offset(config));
  return finish_scan(config, basis, std::move(curve), "scan_lo", "LO FWHM (nm)", options);
}

std::filesystem::path vacuum_path_for(const std::filesystem::path& trace_path) {
  auto out = trace_path;
  out.replace_filename(trace_path.stem().string() + "_vacuum" + trace_path.extension().string());
  return out;
}

SimulateResult cmd_simulate_trace(const ExperimentConfig& config, const std::filesystem::path& out_path,
                                  bool write_csv) {
  config.validate();
  const double eta_hom = total_efficiency(config.detection);
  const SqueezedThermalState state{config.state.n_th, config.state.r};
  state.validate();
  const PhaseScanModel scan{config.state.theta0, 1.0, config.state.alpha};
  const auto model = [&](double theta) { return detected_variance(st_variance(state, theta), eta_hom); };

  const auto trace = synthesize_trace(model, scan, config.acquisition);
  const auto vacuum = shot_noise_trace(config.acquisition);

  SimulateResult result;
  result.trace_path = out_path;
  result.vacuum_path = vacuum_path_for(out_path);
  result.seed = config.acquisition.rng_seed;
  result.model_detected_min_db = db(model(0.0));
  result.model_detected_max_db = db(model(0.5 * std::numbers::pi));
  write_trace(result.trace_path, trace);
  write_trace(result.vacuum_path, vacuum);
  if (write_csv) {
    auto csv = out_path;
    write_trace_csv(csv.replace_extension(".csv"), trace);
  }
  return result;
}

AnalysisReport cmd_analyze_trace(const ExperimentConfig& config, const std::filesystem::path& trace_path,
                                 const std::filesystem::path& vacuum_path, const AnalyzeOptions& analyze,
                                 const RunOptions& options) {
  AnalysisReport report;
  report.eta_hom = analyze.eta_hom.value_or(total_efficiency(config.detection));
  if (!(report.eta_hom > 0.0 && report.eta_hom <= 1.0)) throw PreconditionError("analyze-trace: eta_hom must lie in (0, 1]");

  auto trace = read_trace(trace_path);
  const auto vacuum = read_trace(vacuum_path);
  trace.shot_calibration = sample_variance(vacuum.samples);
  if (config.acquisition.stride != 0) trace.spec.stride = config.acquisition.stride;

  const auto detected = moving_variance(trace, {.require_normalization = true, .stride = 0});
  report.n_points = detected.size();
  VarianceCurve output = detected;

  std::ostringstream curve_csv = csv_stream(config);
  curve_csv << "theta,detected_variance,output_variance\n";

  try {
    const auto det_extrema = extract_extrema(detected);
    report.squeezing_db = det_extrema.squeezing_db;
    report.antisqueezing_db = det_extrema.antisqueezing_db;
    report.theta_min = det_extrema.theta_min;
    for (auto& v : output.variances) v = infer_output_variance(v, report.eta_hom);
    const auto out_extrema = extract_extrema(output);
    report.output_squeezing_db = out_extrema.squeezing_db;
    report.output_antisqueezing_db = out_extrema.antisqueezing_db;

    FitOptions fit_options;
    fit_options.fit_alpha = analyze.fit_alpha;
    fit_options.weighting = analyze.weighting;
    fit_options.window_samples = static_cast<double>(trace.spec.window);
    report.fit = fit_squeezed_thermal(output, fit_options);
    report.purity = purity(report.fit->state);
    report.nonclassical_depth = nonclassical_depth(report.fit->state);
  } catch (const std::exception& e) {
    report.error = e.what();
  }

  for (std::size_t i = 0; i < detected.size(); ++i) {
    curve_csv << detected.thetas[i] << ',' << detected.variances[i] << ',' << output.variances[i] << '\n';
  }
  report.files.push_back(emit(options, "variance_curve.csv", curve_csv.str()));

  json doc{{"squeezing_dB", report.squeezing_db},
           {"antisqueezing_dB", report.antisqueezing_db},
           {"output_squeezing_dB", report.output_squeezing_db},
           {"output_antisqueezing_dB", report.output_antisqueezing_db},
           {"theta_min", report.theta_min},
           {"eta_hom", report.eta_hom},
           {"n_points", report.n_points},
           {"trace", trace_path.string()},
           {"vacuum", vacuum_path.string()},
           {"seed", trace.spec.rng_seed}};
  if (report.fit) {
    doc["n_th"] = report.fit->state.n_th;
    doc["r"] = report.fit->state.r;
    doc["alpha"] = report.fit->scan.alpha;
    doc["theta0"] = report.fit->scan.theta0;
    doc["fit_residual"] = report.fit->residual;
    doc["degenerate"] = report.fit->degenerate;
    doc["purity"] = report.purity;
    doc["nonclassical_depth"] = report.nonclassical_depth;

    const auto grid = wigner_grid(report.fit->state);
    std::ostringstream w;
    w << std::setprecision(10);
    w << "# " << json{{"x_min", grid.xs.front()},
                      {"x_max", grid.xs.back()},
                      {"p_min", grid.ps.front()},
                      {"p_max", grid.ps.back()},
                      {"n", grid.xs.size()},
                      {"layout", "row i is x[i], column j is p[j]"},
                      {"n_th", report.fit->state.n_th},
                      {"r", report.fit->state.r}}
                     .dump()
      << '\n';
    for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < grid.values.cols(); ++j) w << (j ? "," : "") << grid.values(i, j);
      w << '\n';
    }
    report.files.push_back(emit(options, "wigner.csv", w.str()));
  }
  if (!report.ok()) doc["error"] = report.error;
  report.files.push_back(emit(options, "report.json", doc.dump(2) + "\n"));
  return report;
}

CalibrationResult calibrate(const ExperimentConfig& config, double target_mode_fwhm_nm, double target_output_db) {
  config.validate();
  CalibrationResult result;
  const auto grid = config.grid.make();
  result.phasematch_fwhm_nm = calibrate_phasematch_fwhm(grid, config.model.pump_fwhm_nm, target_mode_fwhm_nm);

  ExperimentConfig tuned = config;
  tuned.model.phasematch_fwhm_nm = result.phasematch_fwhm_nm;
  const auto basis = build_basis(tuned);
  result.mode_fwhm_nm = mode_fwhm(basis, 0);
  const auto projection =
      project_lo(LOSpectrum::gaussian(basis.grid, tuned.lo.fwhm_nm, lo_center_offset(tuned)), basis);

  auto output_db = [&](double loss) {
    CavityParams cavity = tuned.cavity;
    cavity.intracavity_loss = loss;
    const auto table = mode_variance_table(basis, tuned.pump, cavity, tuned.model.analysis_freq_mhz);
    return db(spopo_variance(0.0, projection, table));
  };
  // Output squeezing deepens monotonically as the loss drops.
  auto objective = [&](double loss) { return output_db(loss) - target_output_db; };
  const double lo = 0.0;
  const double hi = 0.5;
  const double f_lo = objective(lo);
  const double f_hi = objective(hi);
  if (f_lo * f_hi > 0.0) {
    throw ConvergenceError("calibrate: target output squeezing not reachable for intracavity loss in [0, 0.5]",
                           std::min(std::abs(f_lo), std::abs(f_hi)));
  }
  std::uintmax_t max_iter = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(
      objective, lo, hi, f_lo, f_hi, [](double x, double y) { return std::abs(x - y) <= 1e-10; }, max_iter);
  result.intracavity_loss = 0.5 * (a + b);
  result.output_squeezing_db = output_db(result.intracavity_loss);
  CavityParams cavity = tuned.cavity;
  cavity.intracavity_loss = result.intracavity_loss;
  result.escape_efficiency = escape_efficiency(cavity);
  return result;
}

}  // namespace spopo

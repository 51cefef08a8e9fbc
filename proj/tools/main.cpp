#include <CLI11.hpp>
#include <boost/stacktrace.hpp>
#include <cstdlib>
#include <exception>
#include <cstdio>
#include <iostream>
#include <optional>

#include "spopo/commands.hpp"
#include "spopo/config.hpp"
#include "spopo/errors.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  bool verbose = false;
  bool plot_script = false;
};

spopo::ExperimentConfig load(const Common& c) {
  spopo::ExperimentConfig config = c.config_path.empty() ? spopo::ExperimentConfig{} : spopo::load_config(c.config_path);
  if (c.seed) config.acquisition.rng_seed = *c.seed;
  config.validate();
  return config;
}

spopo::RunOptions run_options(const Common& c) {
  return {c.out_dir, c.format == "json" ? spopo::OutputFormat::kJson : spopo::OutputFormat::kCsv, c.plot_script};
}

void list_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

[[noreturn]] void on_terminate() {
  if (const auto current = std::current_exception()) {
    try {
      std::rethrow_exception(current);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
    } catch (...) {
      std::cerr << "error: unknown exception\n";
    }
  }
  std::cerr << boost::stacktrace::stacktrace();
  std::_Exit(1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPOPO multimode squeezing simulation and homodyne analysis"};
  app.set_version_flag("--version", std::string(SPOPO_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "YAML experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Override acquisition.seed");
  app.add_option("--out-dir", common.out_dir, "Directory for output files");
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--plot-script", common.plot_script, "Also write a gnuplot script stub next to each curve");
  app.add_flag("-v,--verbose", common.verbose, "Report exception types on error");

  auto* modes = app.add_subcommand("modes", "Supermode gains, LO projections and per-mode squeezing");
  auto* budget = app.add_subcommand("budget", "Derived cavity and detection numbers");

  double p_min = 0.0, p_max = 0.5;
  std::size_t p_n = 51;
  auto* scan_pump = app.add_subcommand("scan-pump", "Detected squeezing versus normalized pump power");
  scan_pump->add_option("--p-min", p_min)->capture_default_str();
  scan_pump->add_option("--p-max", p_max)->capture_default_str();
  scan_pump->add_option("-n,--points", p_n)->capture_default_str();

  double w_min = 0.2, w_max = 3.0;
  std::size_t w_n = 57;
  auto* scan_lo = app.add_subcommand("scan-lo", "Detected squeezing versus LO spectral width");
  scan_lo->add_option("--w-min", w_min, "nm")->capture_default_str();
  scan_lo->add_option("--w-max", w_max, "nm")->capture_default_str();
  scan_lo->add_option("-n,--points", w_n)->capture_default_str();

  std::string trace_out = "trace.bin";
  bool trace_csv = false;
  auto* simulate = app.add_subcommand("simulate-trace", "Synthesize a phase-scanned homodyne trace and its vacuum record");
  simulate->add_option("-o,--output", trace_out, "Trace path (relative paths go under --out-dir)")->capture_default_str();
  simulate->add_flag("--csv", trace_csv, "Also export time_s,sample CSV");

  std::string trace_in, vacuum_in;
  bool no_alpha = false;
  bool chi_square = false;
  std::optional<double> eta_override;
  auto* analyze = app.add_subcommand("analyze-trace", "Moving variance, extrema and squeezed-thermal fit");
  analyze->add_option("trace", trace_in, "Trace file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--vacuum", vacuum_in, "Vacuum trace (default: <stem>_vacuum<ext>)");
  analyze->add_flag("--no-alpha", no_alpha, "Hold the phase nonlinearity at zero");
  analyze->add_flag("--chi-square", chi_square, "Weight residuals by the sample-variance variance");
  analyze->add_option("--eta-hom", eta_override, "Detection efficiency used for loss correction");

  double target_fwhm = 4.4, target_db = -5.7;
  auto* calib = app.add_subcommand("calibrate", "Fit phase-matching width and intracavity loss");
  calib->add_option("--mode-fwhm", target_fwhm, "Fundamental supermode FWHM, nm")->capture_default_str();
  calib->add_option("--output-db", target_db, "Output squeezing at the configured pump and LO")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  auto run = [&]() -> int {
    const auto config = load(common);
    const auto opts = run_options(common);
    if (*modes || *scan_pump || *scan_lo || *analyze) std::filesystem::create_directories(opts.out_dir);

    if (*budget) {
      std::cout << spopo::format_budget(spopo::cmd_budget(config), opts.format);
    } else if (*modes) {
      const auto r = spopo::cmd_modes(config, opts);
      std::cout << "cutoff k0 = " << r.cutoff << '\n';
      list_files(r.files);
    } else if (*scan_pump || *scan_lo) {
      const auto r = *scan_pump ? spopo::cmd_scan_pump(config, p_min, p_max, p_n, opts)
                                : spopo::cmd_scan_lo(config, w_min, w_max, w_n, opts);
      std::printf("P = %.3f: detected %.3f dB, output %.3f dB\n", r.anchor_p, r.anchor_detected_db,
                  r.anchor_output_db);
      list_files(r.files);
    } else if (*simulate) {
      std::filesystem::path out = trace_out;
      if (out.is_relative()) out = opts.out_dir / out;
      const auto r = spopo::cmd_simulate_trace(config, out, trace_csv);
      std::cout << "seed " << r.seed << '\n';
      std::printf("model detected variance: min %.3f dB, max %.3f dB\n", r.model_detected_min_db,
                  r.model_detected_max_db);
      std::cout << "wrote " << r.trace_path.string() << "\nwrote " << r.vacuum_path.string() << '\n';
    } else if (*analyze) {
      spopo::AnalyzeOptions a;
      a.fit_alpha = !no_alpha;
      a.eta_hom = eta_override;
      a.weighting = chi_square ? spopo::FitWeighting::kChiSquare : spopo::FitWeighting::kUniform;
      const std::filesystem::path vac = vacuum_in.empty() ? spopo::vacuum_path_for(trace_in) : std::filesystem::path(vacuum_in);
      const auto r = spopo::cmd_analyze_trace(config, trace_in, vac, a, opts);
      std::printf("squeezing %.3f dB, anti-squeezing %.3f dB (detected)\n", r.squeezing_db, r.antisqueezing_db);
      if (r.fit) {
        std::printf("n_th %.4f  r %.4f  alpha %.5f  purity %.3f  depth %.3f\n", r.fit->state.n_th, r.fit->state.r,
                    r.fit->scan.alpha, r.purity, r.nonclassical_depth);
      }
      list_files(r.files);
      if (!r.ok()) {
        std::cerr << "error: " << r.error << '\n';
        return 1;
      }
    } else if (*calib) {
      const auto r = spopo::calibrate(config, target_fwhm, target_db);
      std::printf("phasematch_fwhm_nm: %.10g\nintracavity_loss: %.10g\n", r.phasematch_fwhm_nm, r.intracavity_loss);
      std::printf("mode FWHM %.5f nm, output %.5f dB, escape efficiency %.5f\n", r.mode_fwhm_nm,
                  r.output_squeezing_db, r.escape_efficiency);
    }
    return 0;
  };

  if (common.verbose) {
    // Left uncaught, an exception reaches terminate before the stack unwinds,
    // so the trace below still shows the throw site.
    std::set_terminate(on_terminate);
    return run();
  }
  try {
    return run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

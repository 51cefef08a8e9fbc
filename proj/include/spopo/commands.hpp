#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spopo/config.hpp"
#include "spopo/homodyne.hpp"
#include "spopo/squeezing.hpp"
#include "spopo/state.hpp"
#include "spopo/supermodes.hpp"

namespace spopo {

enum class OutputFormat { kCsv, kJson };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  OutputFormat format = OutputFormat::kCsv;
  bool plot_script = false;
};

/// Supermode basis for the configured grid, widths, k_max and gain floor.
SupermodeBasis build_basis(const ExperimentConfig& config);

/// Offset of the configured LO center from the grid center, nm.
double lo_center_offset(const ExperimentConfig& config);

struct BudgetReport {
  double fsr_mhz = 0.0;
  double finesse = 0.0;
  double bandwidth_mhz = 0.0;
  double escape_efficiency = 0.0;
  double gdd_residual_fs2 = 0.0;
  double eta_hom = 0.0;
  double normalized_pump = 0.0;
  double parametric_gain = 0.0;
};

BudgetReport cmd_budget(const ExperimentConfig& config);
std::string format_budget(const BudgetReport& report, OutputFormat format);

struct ModeRow {
  std::size_t k = 0;
  double gain = 0.0;
  std::optional<double> fwhm_nm;  // empty for multi-lobed modes
  double squeezed_db = 0.0;
  double antisqueezed_db = 0.0;
  std::vector<double> weights;  // |M_k|^2, one per projection width
};

struct ModesResult {
  std::vector<double> widths_nm;
  std::vector<ModeRow> rows;
  std::vector<double> weight_sums;  // sum over the reported rows, per width
  std::size_t cutoff = 0;
  std::vector<std::filesystem::path> files;
};

/// modes.csv, projections.csv and per_mode_variance.csv.
ModesResult cmd_modes(const ExperimentConfig& config, const RunOptions& options);

struct ScanResult {
  std::vector<ScanPoint> curve;
  double anchor_p = 0.0;
  double anchor_detected_db = 0.0;
  double anchor_output_db = 0.0;           // model variance at the SPOPO output
  double anchor_inferred_output_db = 0.0;  // detected value corrected for eta_hom
  std::vector<std::filesystem::path> files;
};

/// Pump scan over n points evenly spaced in [p_min, p_max] (n == 1: p_min only).
ScanResult cmd_scan_pump(const ExperimentConfig& config, double p_min, double p_max, std::size_t n,
                         const RunOptions& options);

/// LO-width scan over n points evenly spaced in [w_min, w_max].
ScanResult cmd_scan_lo(const ExperimentConfig& config, double w_min, double w_max, std::size_t n,
                       const RunOptions& options);

struct SimulateResult {
  std::filesystem::path trace_path;
  std::filesystem::path vacuum_path;
  std::uint64_t seed = 0;
  double model_detected_min_db = 0.0;
  double model_detected_max_db = 0.0;
};

/// Vacuum companion path for a trace path: "<stem>_vacuum<ext>".
std::filesystem::path vacuum_path_for(const std::filesystem::path& trace_path);

SimulateResult cmd_simulate_trace(const ExperimentConfig& config, const std::filesystem::path& out_path,
                                  bool write_csv = false);

struct AnalyzeOptions {
  bool fit_alpha = true;
  std::optional<double> eta_hom;  // default: from the config's detection budget
  FitWeighting weighting = FitWeighting::kUniform;
};

struct AnalysisReport {
  double squeezing_db = 0.0;  // detected
  double antisqueezing_db = 0.0;
  double output_squeezing_db = 0.0;  // after loss correction
  double output_antisqueezing_db = 0.0;
  double theta_min = 0.0;
  double eta_hom = 1.0;
  std::optional<FitResult> fit;
  double purity = 0.0;
  double nonclassical_depth = 0.0;
  std::size_t n_points = 0;
  std::string error;  // non-empty when the analysis stopped early
  std::vector<std::filesystem::path> files;

  bool ok() const noexcept { return error.empty(); }
};

/// report.json, variance_curve.csv and wigner.csv. Never throws for a failed
/// fit; the report's error field is set instead.
AnalysisReport cmd_analyze_trace(const ExperimentConfig& config, const std::filesystem::path& trace_path,
                                 const std::filesystem::path& vacuum_path, const AnalyzeOptions& analyze,
                                 const RunOptions& options);

struct CalibrationResult {
  double phasematch_fwhm_nm = 0.0;
  double mode_fwhm_nm = 0.0;
  double intracavity_loss = 0.0;
  double output_squeezing_db = 0.0;
  double escape_efficiency = 0.0;
};

/// Fit the two free model knobs: phase-matching width against the
/// fundamental-mode FWHM, then intracavity loss against the output squeezing
/// of the configured pump and LO.
CalibrationResult calibrate(const ExperimentConfig& config, double target_mode_fwhm_nm, double target_output_db);

/// "# spopo <version> config_hash=<hex>"
std::string provenance_line(const ExperimentConfig& config);

}  // namespace spopo

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spopo/cavity.hpp"
#include "spopo/grid.hpp"
#include "spopo/homodyne.hpp"
#include "spopo/squeezing.hpp"
#include "spopo/state.hpp"

namespace spopo {

struct LoConfig {
  double center_nm = 1035.0;
  double fwhm_nm = 3.0;
  std::vector<double> projection_widths_nm{1.0, 2.0, 3.0};
};

struct GridConfig {
  double center_nm = FrequencyGrid::kDefaultCenterNm;
  double span_nm = FrequencyGrid::kDefaultSpanNm;
  std::size_t n_points = FrequencyGrid::kDefaultPoints;

  FrequencyGrid make() const { return {center_nm, span_nm, n_points}; }
};

struct ModelConfig {
  double analysis_freq_mhz = 0.5;
  std::size_t k_max = 120;
  double gain_floor = kDefaultGainFloor;
  double pump_fwhm_nm = 1.0;
  // Calibrated so the fundamental supermode is 4.4 nm FWHM on the default grid.
  double phasematch_fwhm_nm = 38.71610848;
  std::size_t report_modes = 40;
};

/// State synthesized by simulate-trace.
struct StateConfig {
  double n_th = 0.20;
  double r = 0.83;
  double alpha = 1.25e-2;
  double theta0 = 0.0;
};

/// Every parameter of a run. Defaults reproduce the reference operating point.
struct ExperimentConfig {
  CavityParams cavity;
  DetectionBudget detection;
  PumpSetting pump;
  LoConfig lo;
  GridConfig grid;
  ModelConfig model;
  AcquisitionSpec acquisition;
  StateConfig state;

  ExperimentConfig();
  void validate() const;
};

/// Parse YAML text. Unknown keys, wrong types and out-of-range values raise
/// ConfigError with the source name and line.
ExperimentConfig parse_config(std::string_view text, const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full-precision YAML; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a hash of serialize_config, for provenance headers.
std::uint64_t config_hash(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace spopo

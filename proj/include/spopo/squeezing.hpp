#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "spopo/cavity.hpp"
#include "spopo/grid.hpp"
#include "spopo/supermodes.hpp"

namespace spopo {

/// Below-threshold pump. P = power / threshold must lie in [0, 1).
struct PumpSetting {
  double power_mw = 40.0;
  double threshold_mw = 400.0 / 3.0;  // 40 mW <-> P = 0.3

  static PumpSetting from_normalized(double p, double threshold_mw);
  void validate() const;  // throws AboveThresholdError for P >= 1
  double normalized() const noexcept { return power_mw / threshold_mw; }
};

/// Local-oscillator spectral amplitude on a grid, unit norm under the grid
/// inner product (sum a_i^2 * step == 1).
struct LOSpectrum {
  FrequencyGrid grid;
  Eigen::VectorXd amplitude;
  Eigen::VectorXd phase;  // flat in this model; kept for shaped LOs
  double fwhm_nm = 0.0;   // intensity FWHM for Gaussian LOs, 0 otherwise

  /// Gaussian LO whose intensity spectrum |a|^2 has the given FWHM, centered
  /// at center_offset_nm from the grid center.
  static LOSpectrum gaussian(const FrequencyGrid& grid, double fwhm_nm, double center_offset_nm = 0.0);
  /// Arbitrary real amplitude; normalized on construction.
  static LOSpectrum from_amplitude(const FrequencyGrid& grid, Eigen::VectorXd amplitude);
};

struct ModeProjection {
  std::vector<double> overlaps;  // M_k, k = 0..cutoff
  std::vector<double> weights;   // |M_k|^2
  double residual = 1.0;         // 1 - sum |M_k|^2, the unprojected (vacuum) share
};

/// Quadrature variances of one supermode (shot noise = 1).
struct VariancePair {
  double squeezed = 1.0;
  double antisqueezed = 1.0;
};

struct ScanPoint {
  double x = 0.0;  // P for pump scans, LO FWHM (nm) for width scans
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
};

/// Output variances of supermode k for a below-threshold OPO with coupling
/// x_k = gain_k sqrt(P), escape efficiency eta and analysis frequency
/// normalized to the cavity half-width, W = 2 f / bandwidth:
///   squeezed     = 1 - eta 4 x / ((1 + x)^2 + W^2)
///   antisqueezed = 1 + eta 4 x / ((1 - x)^2 + W^2)
VariancePair mode_variances(std::size_t k, const SupermodeBasis& basis, const PumpSetting& pump,
                            const CavityParams& cavity, double analysis_freq_mhz);

/// mode_variances for k = 0..basis.cutoff.
std::vector<VariancePair> mode_variance_table(const SupermodeBasis& basis, const PumpSetting& pump,
                                              const CavityParams& cavity, double analysis_freq_mhz);

/// Single-pass gain 1 / (1 - sqrt(P))^2.
double parametric_gain(const PumpSetting& pump);

/// Overlaps of the LO with supermodes 0..basis.cutoff. Throws
/// PreconditionError when the grids differ.
ModeProjection project_lo(const LOSpectrum& lo, const SupermodeBasis& basis);

/// Weighted sum of the per-mode quadrature variances at LO phase theta plus
/// the unprojected vacuum share. theta = 0 is the squeezed quadrature.
double spopo_variance(double theta, const ModeProjection& projection, std::span<const VariancePair> per_mode);

/// Variance after detection with efficiency eta: 1 - eta (1 - v).
double detected_variance(double sigma2_spopo, double eta_hom);

/// Inverse of detected_variance. Throws InconsistentEfficiencyError when the
/// implied output variance is not positive.
double infer_output_variance(double sigma2_detected, double eta_hom);

/// Detected squeezing (theta = 0) and anti-squeezing (theta = pi/2) in dB for
/// each normalized pump power; output order follows input order.
std::vector<ScanPoint> scan_pump(std::span<const double> p_values, double threshold_mw, const LOSpectrum& lo,
                                 const SupermodeBasis& basis, const CavityParams& cavity,
                                 const DetectionBudget& budget, double analysis_freq_mhz);

/// As scan_pump, sweeping the FWHM of a Gaussian LO at fixed pump.
std::vector<ScanPoint> scan_lo_width(std::span<const double> widths_nm, const PumpSetting& pump,
                                     const SupermodeBasis& basis, const CavityParams& cavity,
                                     const DetectionBudget& budget, double analysis_freq_mhz,
                                     double lo_center_offset_nm = 0.0);

/// Copy of the basis with the summation cutoff moved to k0 (k0 < size()).
SupermodeBasis with_cutoff(SupermodeBasis basis, std::size_t k0);

}  // namespace spopo

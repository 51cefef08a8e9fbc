#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "spopo/grid.hpp"

namespace spopo {

/// Real, symmetric two-frequency gain kernel sampled on a grid, Frobenius norm 1.
struct JointSpectralKernel {
  FrequencyGrid grid;
  Eigen::MatrixXd matrix;
  double pump_fwhm = 0.0;        // nm
  double phasematch_fwhm = 0.0;  // nm
};

/// Orthonormal supermodes and their gains, normalized so that gains[0] == 1.
///
/// Modes are stored column-wise and carry unit norm under the grid inner
/// product sum_i a_i b_i * step, so overlaps with other spectra on the same
/// grid are plain weighted dot products.
struct SupermodeBasis {
  FrequencyGrid grid;
  Eigen::MatrixXd modes;                // n_points x k_max
  std::vector<double> gains;            // descending, gains[0] == 1
  std::vector<double> singular_values;  // unnormalized, full rank when available
  std::size_t cutoff = 0;               // largest k with gains[k] >= gain floor

  std::size_t size() const noexcept { return gains.size(); }
  auto mode(std::size_t k) const { return modes.col(static_cast<Eigen::Index>(k)); }
};

inline constexpr double kDefaultGainFloor = 1e-3;

/// Double-Gaussian kernel
///   K(d1, d2) = exp(-(d1 + d2)^2 / (4 sp^2)) * exp(-(d1 - d2)^2 / (4 sm^2))
/// with d the detuning from the grid center and s = FWHM / sqrt(8 ln 2).
/// Throws PreconditionError when a width is non-positive or the grid is too
/// narrow to hold the pump envelope or the resulting fundamental supermode.
JointSpectralKernel build_kernel(const FrequencyGrid& grid, double pump_fwhm, double phasematch_fwhm);

/// Top-k_max singular triplets of the kernel matrix.
SupermodeBasis decompose(const JointSpectralKernel& kernel, std::size_t k_max,
                         double gain_floor = kDefaultGainFloor);

/// Closed-form Schmidt decomposition of the double-Gaussian kernel, evaluated
/// on the grid. Independent of decompose(); used to validate it.
SupermodeBasis analytic_oracle(double pump_fwhm, double phasematch_fwhm, const FrequencyGrid& grid,
                               std::size_t k_max, double gain_floor = kDefaultGainFloor);

/// Geometric gain ratio mu of the analytic solution, gains[k] = mu^k.
double schmidt_ratio(double pump_fwhm, double phasematch_fwhm);

/// Amplitude width w (nm) of the analytic Hermite-Gauss supermodes.
double schmidt_mode_width(double pump_fwhm, double phasematch_fwhm);

/// Phase-matching FWHM for which the analytic fundamental mode has the given
/// intensity FWHM; used as the starting bracket for calibration.
double analytic_phasematch_for_mode_fwhm(double pump_fwhm, double target_mode_fwhm);

enum class FwhmKind {
  kStrict,    // error unless |psi|^2 is single-lobed
  kEnvelope,  // outermost half-maximum crossings, defined for any mode
};

/// FWHM (nm) of |psi_k|^2, with linear interpolation at the half-maximum
/// crossings. Throws IllDefinedFwhmError for multi-lobed modes under kStrict.
double mode_fwhm(const SupermodeBasis& basis, std::size_t k, FwhmKind kind = FwhmKind::kStrict);

/// Root-find the phase-matching FWHM so that the numerically decomposed
/// fundamental supermode has the target intensity FWHM.
double calibrate_phasematch_fwhm(const FrequencyGrid& grid, double pump_fwhm, double target_mode_fwhm,
                                 double tolerance_nm = 1e-6);

/// Flip sign so the value at the (first) grid point of maximum |v| is positive.
void orient_peak_positive(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace spopo

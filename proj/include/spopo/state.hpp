#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace spopo {

/// Gaussian squeezed-thermal state; shot-noise variance is 1.
struct SqueezedThermalState {
  double n_th = 0.0;
  double r = 0.0;

  void validate() const;
};

/// Maps a curve abscissa x onto the LO phase, theta0 + rate * x + alpha * x^2.
struct PhaseScanModel {
  double theta0 = 0.0;
  double rate = 1.0;
  double alpha = 0.0;

  double phase(double x) const noexcept { return theta0 + rate * x + alpha * x * x; }
};

/// Quadrature variance sampled against LO phase.
struct VarianceCurve {
  std::vector<double> thetas;
  std::vector<double> variances;
  std::vector<double> weights;  // empty means uniform

  std::size_t size() const noexcept { return thetas.size(); }
  void validate() const;
};

/// (1 + 2 n_th)(e^{-2r} cos^2 theta + e^{2r} sin^2 theta)
double st_variance(const SqueezedThermalState& state, double theta);

/// theta + alpha theta^2
double apply_phase_distortion(double theta, const PhaseScanModel& scan);

enum class FitWeighting {
  kUniform,
  kChiSquare,  // 1 / var(sample variance) = N / (2 v^4)
};

struct FitOptions {
  bool fit_alpha = true;
  FitWeighting weighting = FitWeighting::kUniform;
  double window_samples = 0.0;  // N for chi-square weights
  double rate = 1.0;            // fixed scan rate, rad per abscissa unit
  int max_iterations = 5000;
};

struct FitResult {
  SqueezedThermalState state;
  PhaseScanModel scan;
  double residual = 0.0;    // weighted sum of squared residuals
  bool degenerate = false;  // flat curve: n_th from the mean, r = 0
};

/// Least-squares fit of st_variance(state, scan.phase(x)) to the curve, with
/// derivative-free simplex minimization started from theta0 in
/// {0, pi/4, pi/2, 3pi/4}. Throws PreconditionError when the curve has fewer
/// than 50 points or spans less than a half period, ConvergenceError when no
/// start converges.
FitResult fit_squeezed_thermal(const VarianceCurve& curve, const FitOptions& options = {});

/// Gaussian Wigner function in the shot-noise-1 convention, so that the
/// marginal along theta has variance st_variance(state, theta).
double wigner(const SqueezedThermalState& state, double x, double p);

struct WignerGrid {
  std::vector<double> xs;
  std::vector<double> ps;
  Eigen::MatrixXd values;  // values(i, j) = W(xs[i], ps[j])
};

/// Square grid of n x n points spanning +-extent_sigmas of the wider quadrature.
WignerGrid wigner_grid(const SqueezedThermalState& state, std::size_t n = 101, double extent_sigmas = 4.0);

double nonclassical_depth(const SqueezedThermalState& state);
double purity(const SqueezedThermalState& state);

}  // namespace spopo

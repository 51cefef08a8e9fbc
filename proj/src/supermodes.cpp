#include "spopo/supermodes.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "spopo/errors.hpp"
#include "spopo/units.hpp"

namespace spopo {
namespace {

constexpr double kEnvelopeCoverage = 6.0;
// A mode counts as multi-lobed when a secondary maximum of |psi|^2 exceeds
// this fraction of the peak.
constexpr double kLobeThreshold = 1e-3;
constexpr double kPeakTieTolerance = 1e-6;

void check_widths(const FrequencyGrid& grid, double pump_fwhm, double phasematch_fwhm) {
  if (!(pump_fwhm > 0.0) || !std::isfinite(pump_fwhm)) {
    throw PreconditionError("pump envelope: FWHM must be positive, got " + std::to_string(pump_fwhm));
  }
  if (!(phasematch_fwhm > 0.0) || !std::isfinite(phasematch_fwhm)) {
    throw PreconditionError("phase-matching envelope: FWHM must be positive, got " +
                            std::to_string(phasematch_fwhm));
  }
  // The phase-matching envelope runs along the anti-diagonal and is cut by the
  // pump envelope; what the grid has to hold is the pump envelope and the
  // supermodes it produces, whose amplitude width is sqrt(sp * sm).
  const double sp = fwhm_to_sigma(pump_fwhm);
  if (grid.span() < kEnvelopeCoverage * sp) {
    throw PreconditionError("pump envelope: grid span " + std::to_string(grid.span()) +
                            " nm is narrower than 6 sigma = " + std::to_string(kEnvelopeCoverage * sp) + " nm");
  }
  const double w = schmidt_mode_width(pump_fwhm, phasematch_fwhm);
  if (grid.span() < kEnvelopeCoverage * w) {
    throw PreconditionError("supermode envelope: grid span " + std::to_string(grid.span()) +
                            " nm is narrower than 6 w = " + std::to_string(kEnvelopeCoverage * w) + " nm");
  }
}

std::size_t cutoff_for(const std::vector<double>& gains, double gain_floor) {
  std::size_t k0 = 0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    if (gains[k] >= gain_floor) k0 = k;
  }
  return k0;
}

void check_gain_floor(double gain_floor) {
  if (!(gain_floor >= 0.0 && gain_floor < 1.0)) {
    throw PreconditionError("gain_floor must lie in [0, 1), got " + std::to_string(gain_floor));
  }
}

}  // namespace

void orient_peak_positive(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= (1.0 - kPeakTieTolerance) * peak) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

JointSpectralKernel build_kernel(const FrequencyGrid& grid, double pump_fwhm, double phasematch_fwhm) {
  check_widths(grid, pump_fwhm, phasematch_fwhm);
  const double sp = fwhm_to_sigma(pump_fwhm);
  const double sm = fwhm_to_sigma(phasematch_fwhm);
  const double cp = 1.0 / (4.0 * sp * sp);
  const double cm = 1.0 / (4.0 * sm * sm);

  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d2 = grid.detuning(static_cast<std::size_t>(j));
    for (Eigen::Index i = j; i < n; ++i) {
      const double d1 = grid.detuning(static_cast<std::size_t>(i));
      const double sum = d1 + d2;
      const double diff = d1 - d2;
      const double value = std::exp(-cp * sum * sum - cm * diff * diff);
      k(i, j) = value;
      k(j, i) = value;
    }
  }
  k /= k.norm();
  return {grid, std::move(k), pump_fwhm, phasematch_fwhm};
}

SupermodeBasis decompose(const JointSpectralKernel& kernel, std::size_t k_max, double gain_floor) {
  const std::size_t n = kernel.grid.size();
  if (k_max < 1) throw PreconditionError("decompose: k_max must be at least 1");
  if (k_max > n) {
    throw PreconditionError("decompose: k_max = " + std::to_string(k_max) + " exceeds grid size " +
                            std::to_string(n));
  }
  check_gain_floor(gain_floor);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(kernel.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw ConvergenceError("decompose: SVD did not converge", std::nan(""));
  }
  const Eigen::VectorXd& s = svd.singularValues();
  const auto kk = static_cast<Eigen::Index>(k_max);
  const Eigen::MatrixXd u = svd.matrixU().leftCols(kk);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(kk);

  // K v_k = s_k u_k column by column; anything beyond round-off means the
  // iteration stalled.
  const double residual =
      (kernel.matrix * v - u * s.head(kk).asDiagonal()).colwise().norm().maxCoeff();
  const double tolerance = 1e-9 * std::max(s(0), 1.0);
  if (!(residual <= tolerance)) {
    throw ConvergenceError("decompose: singular-triplet residual above tolerance", residual);
  }
  if (!(s(0) > 0.0)) throw ConvergenceError("decompose: kernel has zero norm", 0.0);

  SupermodeBasis basis{kernel.grid, Eigen::MatrixXd(static_cast<Eigen::Index>(n), kk), {}, {}, 0};
  const double scale = 1.0 / std::sqrt(kernel.grid.step());
  for (Eigen::Index k = 0; k < kk; ++k) {
    basis.modes.col(k) = u.col(k) * scale;
    orient_peak_positive(basis.modes.col(k));
  }
  basis.gains.resize(k_max);
  for (std::size_t k = 0; k < k_max; ++k) basis.gains[k] = s(static_cast<Eigen::Index>(k)) / s(0);
  basis.gains[0] = 1.0;
  basis.singular_values.assign(s.data(), s.data() + s.size());
  basis.cutoff = cutoff_for(basis.gains, gain_floor);
  return basis;
}

// Closed-form Schmidt decomposition.
//
// Write a = sp, b = sm. Expanding the exponent,
//   K(x, y) = exp(-A (x^2 + y^2) - 2 B x y),
//   A = 1/(4a^2) + 1/(4b^2),  B = 1/(4a^2) - 1/(4b^2).
// Mehler's formula for the Hermite functions h_k(xi) = (2^k k! sqrt(pi))^(-1/2) H_k(xi) e^(-xi^2/2),
//   sum_k t^k h_k(xi) h_k(eta)
//     = (pi (1 - t^2))^(-1/2) exp(-[(1 + t^2)(xi^2 + eta^2) - 4 t xi eta] / (2 (1 - t^2))),
// matches K after the rescaling xi = x / w provided
//   A w^2 = (1 + t^2) / (2 (1 - t^2))   and   B w^2 = -t / (1 - t^2).
// The ratio gives 2t / (1 + t^2) = -B/A = (a^2 - b^2)/(a^2 + b^2), whose root
// inside the unit disc is t = (a - b)/(a + b). Substituting back,
//   (1 + t^2) / (2 (1 - t^2)) = (a^2 + b^2) / (4ab),  so  w^2 = ab.
// Hence K(x, y) is proportional to sum_k t^k psi_k(x) psi_k(y) with
// psi_k(x) = w^(-1/2) h_k(x / w), unit L2 norm in x. Singular values are
// |t|^k; the sign of t only alternates eigenvalue signs, which the SVD
// folds into the right singular vectors.
double schmidt_ratio(double pump_fwhm, double phasematch_fwhm) {
  const double a = fwhm_to_sigma(pump_fwhm);
  const double b = fwhm_to_sigma(phasematch_fwhm);
  return std::abs(a - b) / (a + b);
}

double schmidt_mode_width(double pump_fwhm, double phasematch_fwhm) {
  return std::sqrt(fwhm_to_sigma(pump_fwhm) * fwhm_to_sigma(phasematch_fwhm));
}

// |psi_0|^2 ~ exp(-x^2 / w^2) has FWHM 2 w sqrt(ln 2), so w^2 = F^2 / (4 ln 2).
double analytic_phasematch_for_mode_fwhm(double pump_fwhm, double target_mode_fwhm) {
  const double w2 = target_mode_fwhm * target_mode_fwhm / (4.0 * std::numbers::ln2);
  return sigma_to_fwhm(w2 / fwhm_to_sigma(pump_fwhm));
}

SupermodeBasis analytic_oracle(double pump_fwhm, double phasematch_fwhm, const FrequencyGrid& grid,
                               std::size_t k_max, double gain_floor) {
  check_widths(grid, pump_fwhm, phasematch_fwhm);
  if (k_max < 1) throw PreconditionError("analytic_oracle: k_max must be at least 1");
  if (k_max > grid.size()) throw PreconditionError("analytic_oracle: k_max exceeds grid size");
  check_gain_floor(gain_floor);

  const double mu = schmidt_ratio(pump_fwhm, phasematch_fwhm);
  const double w = schmidt_mode_width(pump_fwhm, phasematch_fwhm);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto kk = static_cast<Eigen::Index>(k_max);

  SupermodeBasis basis{grid, Eigen::MatrixXd(n, kk), std::vector<double>(k_max), {}, 0};
  // Three-term recurrence for normalized Hermite functions:
  //   h_{k+1} = sqrt(2/(k+1)) xi h_k - sqrt(k/(k+1)) h_{k-1}.
  const double norm = 1.0 / std::sqrt(w);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = grid.detuning(static_cast<std::size_t>(i)) / w;
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    for (Eigen::Index k = 0; k < kk; ++k) {
      basis.modes(i, k) = cur * norm;
      const double kd = static_cast<double>(k);
      const double next = std::sqrt(2.0 / (kd + 1.0)) * xi * cur - std::sqrt(kd / (kd + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
  }
  for (Eigen::Index k = 0; k < kk; ++k) orient_peak_positive(basis.modes.col(k));

  double power = 1.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    basis.gains[k] = power;
    power *= mu;
  }
  // Frobenius-normalized singular values of the continuum kernel: s_k = mu^k sqrt(1 - mu^2).
  basis.singular_values.resize(k_max);
  for (std::size_t k = 0; k < k_max; ++k) basis.singular_values[k] = basis.gains[k] * std::sqrt(1.0 - mu * mu);
  basis.cutoff = cutoff_for(basis.gains, gain_floor);
  return basis;
}

double mode_fwhm(const SupermodeBasis& basis, std::size_t k, FwhmKind kind) {
  if (k >= basis.size()) {
    throw PreconditionError("mode_fwhm: mode index " + std::to_string(k) + " out of range");
  }
  const auto psi = basis.mode(k);
  const auto n = psi.size();
  Eigen::VectorXd intensity = psi.array().square();

  Eigen::Index peak_index = 0;
  const double peak = intensity.maxCoeff(&peak_index);
  const double half = 0.5 * peak;

  // Walk out from the peak to the first half-maximum crossing on each side.
  Eigen::Index left = peak_index;
  while (left > 0 && intensity(left - 1) >= half) --left;
  Eigen::Index right = peak_index;
  while (right < n - 1 && intensity(right + 1) >= half) ++right;

  bool multi_lobed = false;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (i >= left && i <= right) continue;
    if (intensity(i) >= intensity(i - 1) && intensity(i) >= intensity(i + 1) &&
        intensity(i) > kLobeThreshold * peak) {
      multi_lobed = true;
      break;
    }
  }
  // Dips inside the half-maximum window also split the peak.
  for (Eigen::Index i = left + 1; i < right && !multi_lobed; ++i) {
    if (intensity(i) < intensity(i - 1) && intensity(i) < intensity(i + 1)) multi_lobed = true;
  }

  if (multi_lobed) {
    if (kind == FwhmKind::kStrict) {
      throw IllDefinedFwhmError("mode_fwhm: mode " + std::to_string(k) +
                                " is multi-lobed; request the envelope FWHM explicitly");
    }
    left = 0;
    while (left < n - 1 && intensity(left) < half) ++left;
    right = n - 1;
    while (right > 0 && intensity(right) < half) --right;
  }

  if (left == 0 || right == n - 1) {
    throw IllDefinedFwhmError("mode_fwhm: half-maximum crossing lies outside the grid");
  }
  const auto& grid = basis.grid;
  auto crossing = [&](Eigen::Index outside, Eigen::Index inside) {
    const double fo = intensity(outside);
    const double fi = intensity(inside);
    const double frac = (half - fo) / (fi - fo);
    const double xo = grid.detuning(static_cast<std::size_t>(outside));
    const double xi = grid.detuning(static_cast<std::size_t>(inside));
    return xo + frac * (xi - xo);
  };
  return crossing(right + 1, right) - crossing(left - 1, left);
}

double calibrate_phasematch_fwhm(const FrequencyGrid& grid, double pump_fwhm, double target_mode_fwhm,
                                 double tolerance_nm) {
  if (!(target_mode_fwhm > 0.0)) throw PreconditionError("calibrate: target FWHM must be positive");
  const double guess = analytic_phasematch_for_mode_fwhm(pump_fwhm, target_mode_fwhm);
  auto objective = [&](double phasematch) {
    const auto basis = decompose(build_kernel(grid, pump_fwhm, phasematch), 1);
    return mode_fwhm(basis, 0) - target_mode_fwhm;
  };
  // The analytic width is exact up to discretization, so a narrow bracket
  // usually holds the root; it is widened geometrically otherwise.
  double lo = 0.99 * guess;
  double hi = 1.01 * guess;
  double f_lo = objective(lo);
  double f_hi = objective(hi);
  for (int widen = 0; widen < 8 && f_lo * f_hi > 0.0; ++widen) {
    if (f_lo > 0.0) {
      lo *= 0.7;
      f_lo = objective(lo);
    } else {
      hi *= 1.4;
      f_hi = objective(hi);
    }
  }
  if (f_lo * f_hi > 0.0) {
    throw ConvergenceError("calibrate: could not bracket the target mode FWHM", std::min(std::abs(f_lo), std::abs(f_hi)));
  }
  std::uintmax_t max_iter = 60;
  auto tol = [tolerance_nm](double a, double b) { return std::abs(a - b) <= tolerance_nm; };
  const auto [a, b] = boost::math::tools::toms748_solve(objective, lo, hi, f_lo, f_hi, tol, max_iter);
  return 0.5 * (a + b);
}

}  // namespace spopo

#include "spopo/state.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>

#include "spopo/errors.hpp"

namespace spopo {

void SqueezedThermalState::validate() const {
  if (!(n_th >= 0.0)) throw PreconditionError("n_th must be non-negative");
  if (!(r >= 0.0)) throw PreconditionError("r must be non-negative");
}

void VarianceCurve::validate() const {
  if (variances.size() != thetas.size()) throw PreconditionError("variance curve: thetas and variances differ in length");
  if (!weights.empty() && weights.size() != thetas.size()) {
    throw PreconditionError("variance curve: weights differ in length");
  }
  for (double v : variances) {
    if (!(v > 0.0)) throw PreconditionError("variance curve: variances must be positive");
  }
}

double st_variance(const SqueezedThermalState& state, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return (1.0 + 2.0 * state.n_th) * (std::exp(-2.0 * state.r) * c * c + std::exp(2.0 * state.r) * s * s);
}

double apply_phase_distortion(double theta, const PhaseScanModel& scan) { return theta + scan.alpha * theta * theta; }

namespace {

constexpr std::size_t kMinFitPoints = 50;

struct Objective {
  const VarianceCurve* curve;
  std::vector<double> weights;
  double rate;
  bool fit_alpha;

  // p = (sqrt(n_th), r, theta0, alpha); signs of the first two are folded.
  double operator()(const double* p) const {
    const SqueezedThermalState state{p[0] * p[0], std::abs(p[1])};
    const PhaseScanModel scan{p[2], rate, fit_alpha ? p[3] : 0.0};
    double total = 0.0;
    for (std::size_t i = 0; i < curve->size(); ++i) {
      const double d = curve->variances[i] - st_variance(state, scan.phase(curve->thetas[i]));
      total += weights[i] * d * d;
    }
    return total;
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  return (*static_cast<const Objective*>(params))(v->data);
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter>;
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

struct LocalResult {
  std::array<double, 4> params{};
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

LocalResult simplex(const Objective& objective, std::array<double, 4> start, std::array<double, 4> step,
                    int max_iterations) {
  const std::size_t dim = objective.fit_alpha ? 4 : 3;
  gsl_multimin_function fn{&gsl_objective, dim, const_cast<Objective*>(&objective)};
  VectorPtr x(gsl_vector_alloc(dim));
  VectorPtr s(gsl_vector_alloc(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set(s.get(), i, step[i]);
  }
  MinimizerPtr m(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), s.get());

  LocalResult out;
  for (int it = 0; it < max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(m.get());
    if (gsl_multimin_test_size(size, 1e-10) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) out.params[i] = gsl_vector_get(m->x, i);
  out.value = m->fval;
  return out;
}

double wrap_half_period(double theta) {
  // Variance has period pi; keep theta0 in (-pi/2, pi/2].
  double t = std::fmod(theta, std::numbers::pi);
  if (t > 0.5 * std::numbers::pi) t -= std::numbers::pi;
  if (t <= -0.5 * std::numbers::pi) t += std::numbers::pi;
  return t;
}

}  // namespace

FitResult fit_squeezed_thermal(const VarianceCurve& curve, const FitOptions& options) {
  curve.validate();
  if (curve.size() < kMinFitPoints) {
    throw PreconditionError("fit: need at least 50 points, got " + std::to_string(curve.size()));
  }
  if (!(options.rate > 0.0)) throw PreconditionError("fit: scan rate must be positive");
  const auto [tmin, tmax] = std::minmax_element(curve.thetas.begin(), curve.thetas.end());
  if (options.rate * (*tmax - *tmin) < std::numbers::pi * (1.0 - 1e-9)) {
    throw PreconditionError("fit: curve spans less than one pi-period of phase");
  }

  Objective objective{&curve, {}, options.rate, options.fit_alpha};
  if (!curve.weights.empty()) {
    objective.weights = curve.weights;
  } else if (options.weighting == FitWeighting::kChiSquare) {
    if (!(options.window_samples > 0.0)) throw PreconditionError("fit: chi-square weights need window_samples > 0");
    objective.weights.resize(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double v = curve.variances[i];
      objective.weights[i] = options.window_samples / (2.0 * v * v * v * v);
    }
  } else {
    objective.weights.assign(curve.size(), 1.0);
  }

  const auto [vmin, vmax] = std::minmax_element(curve.variances.begin(), curve.variances.end());
  const double mean = std::accumulate(curve.variances.begin(), curve.variances.end(), 0.0) /
                      static_cast<double>(curve.size());
  if (*vmax - *vmin <= 1e-12 * mean) {
    FitResult flat;
    flat.state = {std::max(0.0, 0.5 * (mean - 1.0)), 0.0};
    flat.scan = {0.0, options.rate, 0.0};
    const std::array<double, 4> p{std::sqrt(flat.state.n_th), 0.0, 0.0, 0.0};
    flat.residual = objective(p.data());
    flat.degenerate = true;
    return flat;
  }

  gsl_set_error_handler_off();
  const double n0 = std::max(0.0, 0.5 * (std::sqrt(*vmin * *vmax) - 1.0));
  const double r0 = std::max(0.05, 0.25 * std::log(*vmax / *vmin));
  const std::array<double, 4> step{0.1, 0.1, std::numbers::pi / 8.0, 0.005};

  LocalResult best;     // best converged start
  LocalResult fallback; // best start overall, for the error report
  for (double theta0 : {0.0, 0.25 * std::numbers::pi, 0.5 * std::numbers::pi, 0.75 * std::numbers::pi}) {
    std::array<double, 4> start{std::sqrt(n0) + 0.05, r0, theta0, 0.0};
    LocalResult local = simplex(objective, start, step, options.max_iterations);
    // Restarting from the reported optimum guards against simplex collapse.
    for (int polish = 0; polish < 2; ++polish) {
      LocalResult again = simplex(objective, local.params, {0.02, 0.02, 0.05, 0.001}, options.max_iterations);
      if (again.value <= local.value) local = again;
    }
    if (local.converged && local.value < best.value) best = local;
    if (local.value < fallback.value) fallback = local;
  }
  if (!best.converged) throw ConvergenceError("fit: no start converged", fallback.value);

  FitResult out;
  out.state = {best.params[0] * best.params[0], std::abs(best.params[1])};
  out.scan = {wrap_half_period(best.params[2]), options.rate, options.fit_alpha ? best.params[3] : 0.0};
  out.residual = best.value;
  return out;
}

double wigner(const SqueezedThermalState& state, double x, double p) {
  const double scale = 1.0 + 2.0 * state.n_th;
  const double vx = scale * std::exp(-2.0 * state.r);
  const double vp = scale * std::exp(2.0 * state.r);
  return std::exp(-0.5 * x * x / vx - 0.5 * p * p / vp) / (2.0 * std::numbers::pi * std::sqrt(vx * vp));
}

WignerGrid wigner_grid(const SqueezedThermalState& state, std::size_t n, double extent_sigmas) {
  if (n < 2) throw PreconditionError("wigner_grid: need at least 2 points per axis");
  const double wide = std::sqrt((1.0 + 2.0 * state.n_th) * std::exp(2.0 * state.r));
  const double half = extent_sigmas * wide;
  WignerGrid grid;
  grid.xs.resize(n);
  for (std::size_t i = 0; i < n; ++i) grid.xs[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
  grid.ps = grid.xs;
  const auto ni = static_cast<Eigen::Index>(n);
  grid.values.resize(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) {
      grid.values(i, j) = wigner(state, grid.xs[static_cast<std::size_t>(i)], grid.ps[static_cast<std::size_t>(j)]);
    }
  }
  return grid;
}

double nonclassical_depth(const SqueezedThermalState& state) {
  const double vmin = (1.0 + 2.0 * state.n_th) * std::exp(-2.0 * state.r);
  return std::max(0.0, 0.5 * (1.0 - vmin));
}

double purity(const SqueezedThermalState& state) { return 1.0 / (1.0 + 2.0 * state.n_th); }

}  // namespace spopo

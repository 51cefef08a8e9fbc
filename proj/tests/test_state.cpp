#include <doctest.h>

#include <cmath>
#include <random>

#include "spopo/errors.hpp"
#include "spopo/state.hpp"
#include "spopo/units.hpp"

using namespace spopo;

namespace {

const SqueezedThermalState kReference{0.20, 0.83};

VarianceCurve synthetic(const SqueezedThermalState& s, double alpha, double theta0 = 0.0, std::size_t n = 100,
                        double scale = 1.0) {
  VarianceCurve c;
  const PhaseScanModel scan{theta0, 1.0, alpha};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    c.thetas.push_back(t * scale);
    c.variances.push_back(st_variance(s, scan.phase(t)));
  }
  return c;
}

}  // namespace

TEST_CASE("squeezed-thermal variance") {
  CHECK(st_variance({0.0, 0.0}, 1.234) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(st_variance(kReference, 0.0) == doctest::Approx(1.4 * std::exp(-1.66)).epsilon(1e-14));
  CHECK(st_variance(kReference, 0.0) == doctest::Approx(0.266).epsilon(1e-3));
  CHECK(db(st_variance(kReference, 0.0)) == doctest::Approx(-5.74).epsilon(0.01 / 5.74));
  CHECK(st_variance(kReference, M_PI / 2) == doctest::Approx(1.4 * std::exp(1.66)).epsilon(1e-14));
  CHECK(db(st_variance(kReference, M_PI / 2)) == doctest::Approx(8.67).epsilon(0.01 / 8.67));

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> n(0.0, 2.0), r(0.0, 2.0), t(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const SqueezedThermalState s{n(rng), r(rng)};
    const double th = t(rng);
    CHECK(st_variance(s, th + M_PI) == doctest::Approx(st_variance(s, th)).epsilon(1e-9));
    CHECK(st_variance(s, th) >= st_variance(s, 0.0) * (1 - 1e-12));
    CHECK(st_variance(s, th) <= st_variance(s, M_PI / 2) * (1 + 1e-12));
    CHECK(st_variance(s, 0.0) * st_variance(s, M_PI / 2) ==
          doctest::Approx((1 + 2 * s.n_th) * (1 + 2 * s.n_th)).epsilon(1e-12));
    CHECK((nonclassical_depth(s) > 0.0) == (st_variance(s, 0.0) < 1.0));
  }
  CHECK_THROWS_AS(SqueezedThermalState({-0.1, 0.0}).validate(), PreconditionError);
}

TEST_CASE("phase distortion") {
  CHECK(apply_phase_distortion(1.3, {}) == 1.3);
  const PhaseScanModel scan{0.0, 1.0, 1.25e-2};
  CHECK(apply_phase_distortion(M_PI, scan) - M_PI == doctest::Approx(0.1234).epsilon(1e-3));
  const PhaseScanModel edge{0.0, 1.0, 1.0 / (4 * M_PI)};
  double last = -1.0;
  for (double t = 0.0; t <= 2 * M_PI; t += 0.01) {
    const double v = apply_phase_distortion(t, edge);
    CHECK(v > last);
    last = v;
  }
}

TEST_CASE("purity and nonclassical depth") {
  CHECK(purity(kReference) == doctest::Approx(1 / 1.4).epsilon(1e-14));
  CHECK(purity(kReference) == doctest::Approx(0.714).epsilon(0.005 / 0.714));
  CHECK(purity({0.0, 0.5}) == 1.0);
  CHECK(purity({0.1, 0.0}) > purity({0.2, 0.0}));
  CHECK(nonclassical_depth(kReference) == doctest::Approx((1 - 1.4 * std::exp(-1.66)) / 2).epsilon(1e-13));
  CHECK(nonclassical_depth(kReference) == doctest::Approx(0.367).epsilon(0.001 / 0.367));
  CHECK(nonclassical_depth({0.0, 0.0}) == 0.0);
  CHECK(nonclassical_depth({0.5, 0.0}) == 0.0);
}

TEST_CASE("Wigner function") {
  CHECK(wigner(kReference, 0.0, 0.0) == doctest::Approx(1 / (2 * M_PI * 1.4)).epsilon(1e-13));
  CHECK(wigner(kReference, 0.0, 0.0) == doctest::Approx(0.1137).epsilon(1e-3));
  CHECK(wigner({0.0, 0.0}, 0.0, 0.0) == doctest::Approx(1 / (2 * M_PI)).epsilon(1e-14));

  const double sx = std::sqrt(1.4 * std::exp(-1.66)), sp = std::sqrt(1.4 * std::exp(1.66));
  const int n = 801;
  const double hx = 16 * sx / (n - 1), hp = 16 * sp / (n - 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) total += wigner(kReference, -8 * sx + i * hx, -8 * sp + j * hp);
  }
  CHECK(total * hx * hp == doctest::Approx(1.0).epsilon(1e-6));

  // x-marginal is a Gaussian of variance sx^2.
  double m0 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -8 * sx + i * hx;
    double marg = 0.0;
    for (int j = 0; j < n; ++j) marg += wigner(kReference, x, -8 * sp + j * hp) * hp;
    m0 += marg * hx;
    m2 += marg * x * x * hx;
  }
  CHECK(m2 / m0 == doctest::Approx(sx * sx).epsilon(1e-6));

  const auto grid = wigner_grid(kReference, 51);
  CHECK(grid.xs.size() == 51);
  CHECK(grid.values(25, 25) == doctest::Approx(wigner(kReference, 0.0, 0.0)));
  CHECK(grid.values.maxCoeff() == doctest::Approx(grid.values(25, 25)));
}

TEST_CASE("fit recovers a noiseless curve") {
  const auto curve = synthetic(kReference, 1.25e-2);
  const auto fit = fit_squeezed_thermal(curve);
  CHECK(std::abs(fit.state.n_th - 0.20) < 0.01);
  CHECK(std::abs(fit.state.r - 0.83) < 0.01);
  CHECK(std::abs(fit.scan.alpha - 1.25e-2) < 1e-3);
  CHECK(!fit.degenerate);
  CHECK(fit.residual < 1e-12);
}

TEST_CASE("fit recovers an offset phase") {
  for (double theta0 : {0.4, -1.0, 1.3}) {
    CAPTURE(theta0);
    const auto fit = fit_squeezed_thermal(synthetic({0.1, 0.6}, 0.0, theta0));
    CHECK(std::abs(fit.state.n_th - 0.1) < 1e-4);
    CHECK(std::abs(fit.state.r - 0.6) < 1e-4);
    const double d = std::remainder(fit.scan.theta0 - theta0, M_PI);
    CHECK(std::abs(d) < 1e-3);
  }
}

TEST_CASE("fit of a vacuum curve") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.01);
  VarianceCurve c = synthetic({0.0, 0.0}, 0.0);
  for (auto& v : c.variances) v += noise(rng);
  const auto fit = fit_squeezed_thermal(c);
  CHECK(fit.state.n_th < 0.01);
  CHECK(fit.state.r < 0.02);
}

TEST_CASE("flat curve is flagged degenerate") {
  VarianceCurve c = synthetic({0.0, 0.0}, 0.0);
  for (auto& v : c.variances) v = 1.3;
  const auto fit = fit_squeezed_thermal(c);
  CHECK(fit.degenerate);
  CHECK(fit.state.r == 0.0);
  CHECK(fit.state.n_th == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("fitting alpha lowers the residual on distorted data") {
  const auto curve = synthetic(kReference, 1.25e-2);
  FitOptions fixed;
  fixed.fit_alpha = false;
  const auto without = fit_squeezed_thermal(curve, fixed);
  const auto with = fit_squeezed_thermal(curve);
  CHECK(without.scan.alpha == 0.0);
  CHECK(with.residual < without.residual);
}

TEST_CASE("fit is scan-rate invariant") {
  const double c = 3.0;
  const auto curve = synthetic(kReference, 1.25e-2, 0.0, 100, c);
  FitOptions opts;
  opts.rate = 1.0 / c;
  const auto fit = fit_squeezed_thermal(curve, opts);
  CHECK(std::abs(fit.state.n_th - 0.20) < 0.01);
  CHECK(std::abs(fit.state.r - 0.83) < 0.01);
  CHECK(fit.scan.alpha == doctest::Approx(1.25e-2 / (c * c)).epsilon(1e-3));
}

TEST_CASE("chi-square weighting") {
  auto curve = synthetic(kReference, 1.25e-2);
  FitOptions opts;
  opts.weighting = FitWeighting::kChiSquare;
  opts.window_samples = 20000;
  const auto fit = fit_squeezed_thermal(curve, opts);
  CHECK(std::abs(fit.state.n_th - 0.20) < 0.01);
  CHECK(std::abs(fit.state.r - 0.83) < 0.01);
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit_squeezed_thermal(synthetic(kReference, 0.0, 0.0, 40)), PreconditionError);
  auto narrow = synthetic(kReference, 0.0, 0.0, 100, 0.4);
  CHECK_THROWS_AS(fit_squeezed_thermal(narrow), PreconditionError);
  auto bad = synthetic(kReference, 0.0);
  bad.variances[3] = -1.0;
  CHECK_THROWS_AS(fit_squeezed_thermal(bad), PreconditionError);
}

#include <doctest.h>

#include <algorithm>
#include <random>

#include "spopo/cavity.hpp"
#include "spopo/errors.hpp"

using namespace spopo;

namespace {
CavityParams measured() { return CavityParams{}; }
}  // namespace

TEST_CASE("free spectral range") {
  CavityParams c = measured();
  CHECK(free_spectral_range(c) == doctest::Approx(299.792458 / 3.23).epsilon(1e-14));
  CHECK(free_spectral_range(c) == doctest::Approx(92.81).epsilon(1e-4));
  c.length_m = 2.99792458;
  CHECK(free_spectral_range(c) == doctest::Approx(100.0).epsilon(1e-14));
  const double base = free_spectral_range(measured());
  c.length_m = 3.23 / 2;
  CHECK(free_spectral_range(c) == doctest::Approx(2 * base).epsilon(1e-14));
}

TEST_CASE("finesse and bandwidth") {
  CavityParams c = measured();
  CHECK(finesse(c) == doctest::Approx(2 * M_PI / 0.26).epsilon(1e-12));
  CHECK(finesse(c) == doctest::Approx(24.17).epsilon(1e-3));
  CHECK(cavity_bandwidth_fwhm(c) == doctest::Approx(3.84).epsilon(1e-3));
  CHECK(finesse(c) * cavity_bandwidth_fwhm(c) == doctest::Approx(free_spectral_range(c)).epsilon(1e-14));
  CHECK(0.6 < cavity_bandwidth_fwhm(c) / 2);

  CavityParams only_oc = c;
  only_oc.r_ic = 1.0;
  only_oc.intracavity_loss = 0.0;
  CHECK(finesse(only_oc) == doctest::Approx(2 * M_PI / 0.19).epsilon(1e-12));
  CHECK(finesse(only_oc) == doctest::Approx(33.07).epsilon(1e-3));

  double last = 0.0;
  for (double loss : {0.5, 0.2, 0.1, 0.01, 0.001}) {
    c.intracavity_loss = loss;
    CHECK(finesse(c) > last);
    last = finesse(c);
  }
  c.intracavity_loss = 0.9;
  CHECK_THROWS_AS(finesse(c), PreconditionError);
}

TEST_CASE("escape efficiency") {
  CavityParams c = measured();
  CHECK(escape_efficiency(c) == doctest::Approx(0.19 / 0.26).epsilon(1e-12));
  CavityParams lossless = c;
  lossless.r_ic = 1.0;
  lossless.intracavity_loss = 0.0;
  CHECK(escape_efficiency(lossless) == doctest::Approx(1.0).epsilon(1e-15));
  double last = 2.0;
  for (double loss = 0.0; loss < 0.5; loss += 0.05) {
    c.intracavity_loss = loss;
    const double eta = escape_efficiency(c);
    CHECK(eta < last);
    CHECK(eta > 0.0);
    CHECK(eta <= 1.0);
    last = eta;
  }
}

TEST_CASE("GDD residual") {
  CavityParams c = measured();
  CHECK(gdd_residual(c) == 0.0);
  c.gdd_contributions.clear();
  CHECK(gdd_residual(c) == 0.0);
  c.gdd_contributions = {{"prism", 123.5}};
  CHECK(gdd_residual(c) == 123.5);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> fs2(-1000.0, 1000.0);
  std::vector<GddContribution> list;
  for (int i = 0; i < 12; ++i) list.push_back({"e" + std::to_string(i), fs2(rng)});
  c.gdd_contributions = list;
  const double reference = gdd_residual(c);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(list.begin(), list.end(), rng);
    c.gdd_contributions = list;
    CHECK(gdd_residual(c) == reference);
  }
}

TEST_CASE("total detection efficiency") {
  const DetectionBudget b;
  CHECK(total_efficiency(b) == doctest::Approx(0.87 * 0.99 * 0.947 * 0.947 * 0.96).epsilon(1e-14));
  CHECK(total_efficiency(b) == doctest::Approx(0.742).epsilon(0.002 / 0.742));
  CHECK(total_efficiency({1.0, 1.0, 1.0, 1.0}) == 1.0);
  DetectionBudget v94 = b, v100 = b;
  v94.visibility = 0.94;
  v100.visibility = 1.0;
  CHECK(total_efficiency(v94) / total_efficiency(v100) == doctest::Approx(0.8836).epsilon(1e-12));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 100; ++i) {
    const DetectionBudget r{u(rng), u(rng), u(rng), u(rng)};
    const double eta = total_efficiency(r);
    CHECK(eta <= std::min({r.eta_pd, r.eta_opt, r.visibility * r.visibility, r.eta_bkg}));
    CHECK(eta > 0.0);
  }
}

TEST_CASE("parameter validation") {
  CavityParams c = measured();
  c.r_oc = 1.2;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = measured();
  c.intracavity_loss = -0.1;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c = measured();
  c.length_m = 0.0;
  CHECK_THROWS_AS(free_spectral_range(c), PreconditionError);
  DetectionBudget b;
  b.eta_pd = 0.0;
  CHECK_THROWS_AS(b.validate(), PreconditionError);
}

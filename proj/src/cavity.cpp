#include "spopo/cavity.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <vector>

#include "spopo/errors.hpp"
#include "spopo/units.hpp"

namespace spopo {
namespace {

void require_ratio(const char* name, double value, bool allow_zero) {
  const bool ok = allow_zero ? (value >= 0.0 && value < 1.0) : (value > 0.0 && value <= 1.0);
  if (!ok) {
    throw PreconditionError(std::string(name) + " out of range: " + std::to_string(value));
  }
}

double checked_loss(const CavityParams& cavity) {
  cavity.validate();
  const double delta = cavity.round_trip_loss();
  if (!(delta > 0.0)) throw PreconditionError("round-trip loss must be positive for a finite finesse");
  if (!(delta < 1.0)) {
    throw PreconditionError("round-trip loss " + std::to_string(delta) +
                            " >= 1: low-loss finesse model does not apply");
  }
  return delta;
}

}  // namespace

void CavityParams::validate() const {
  if (!(length_m > 0.0)) throw PreconditionError("cavity length must be positive");
  require_ratio("r_ic", r_ic, false);
  require_ratio("r_oc", r_oc, false);
  require_ratio("intracavity_loss", intracavity_loss, true);
}

void DetectionBudget::validate() const {
  require_ratio("eta_pd", eta_pd, false);
  require_ratio("eta_opt", eta_opt, false);
  require_ratio("visibility", visibility, false);
  require_ratio("eta_bkg", eta_bkg, false);
}

double free_spectral_range(const CavityParams& cavity) {
  if (!(cavity.length_m > 0.0)) throw PreconditionError("cavity length must be positive");
  return kSpeedOfLight / cavity.length_m * 1e-6;
}

double finesse(const CavityParams& cavity) { return 2.0 * std::numbers::pi / checked_loss(cavity); }

double cavity_bandwidth_fwhm(const CavityParams& cavity) {
  return free_spectral_range(cavity) / finesse(cavity);
}

double escape_efficiency(const CavityParams& cavity) {
  return (1.0 - cavity.r_oc) / checked_loss(cavity);
}

double gdd_residual(const CavityParams& cavity) {
  // Summed in sorted order so the result does not depend on list order.
  std::vector<double> values;
  values.reserve(cavity.gdd_contributions.size());
  for (const auto& c : cavity.gdd_contributions) values.push_back(c.fs2);
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

double total_efficiency(const DetectionBudget& budget) {
  budget.validate();
  return budget.eta_pd * budget.eta_opt * budget.visibility * budget.visibility * budget.eta_bkg;
}

}  // namespace spopo

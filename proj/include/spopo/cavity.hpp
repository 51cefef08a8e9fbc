#pragma once

#include <string>
#include <vector>

namespace spopo {

struct GddContribution {
  std::string label;
  double fs2 = 0.0;
};

/// Ring cavity description. Reflectivities and losses are power ratios.
struct CavityParams {
  double length_m = 3.23;
  double r_ic = 0.99;
  double r_oc = 0.81;
  double intracavity_loss = 0.06;  // reproduces the measured finesse of 24
  std::vector<GddContribution> gdd_contributions{
      {"crystal", 850.0}, {"air", 50.0}, {"chirped mirror", -900.0}};

  /// Throws PreconditionError if a field is out of range.
  void validate() const;
  /// (1 - R_ic) + (1 - R_oc) + intracavity loss.
  double round_trip_loss() const noexcept { return (1.0 - r_ic) + (1.0 - r_oc) + intracavity_loss; }
};

/// Homodyne detection efficiencies, each a ratio in (0, 1].
struct DetectionBudget {
  double eta_pd = 0.87;
  double eta_opt = 0.99;
  double visibility = 0.947;
  double eta_bkg = 0.96;  // includes the CMRR-limited background

  void validate() const;
};

double free_spectral_range(const CavityParams& cavity);  // MHz

/// Low-loss approximation F = 2 pi / delta. Throws PreconditionError when the
/// round-trip loss is outside (0, 1).
double finesse(const CavityParams& cavity);

double cavity_bandwidth_fwhm(const CavityParams& cavity);  // MHz

/// Fraction of the round-trip loss leaving through the output coupler.
double escape_efficiency(const CavityParams& cavity);

double gdd_residual(const CavityParams& cavity);  // fs^2

/// eta_pd * eta_opt * visibility^2 * eta_bkg.
double total_efficiency(const DetectionBudget& budget);

}  // namespace spopo

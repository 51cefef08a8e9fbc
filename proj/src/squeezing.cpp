#include "spopo/squeezing.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spopo/errors.hpp"
#include "spopo/units.hpp"

namespace spopo {

PumpSetting PumpSetting::from_normalized(double p, double threshold_mw) {
  PumpSetting pump{p * threshold_mw, threshold_mw};
  pump.validate();
  return pump;
}

void PumpSetting::validate() const {
  if (!(threshold_mw > 0.0)) throw PreconditionError("pump threshold must be positive");
  if (!(power_mw >= 0.0)) throw PreconditionError("pump power must be non-negative");
  if (!(normalized() < 1.0)) {
    throw AboveThresholdError("pump at P = " + std::to_string(normalized()) +
                              " is at or above threshold; only below-threshold operation is modeled");
  }
}

LOSpectrum LOSpectrum::gaussian(const FrequencyGrid& grid, double fwhm_nm, double center_offset_nm) {
  if (!(fwhm_nm > 0.0)) throw PreconditionError("LO FWHM must be positive, got " + std::to_string(fwhm_nm));
  // |a|^2 ~ exp(-d^2 / (2 s^2)) with s the intensity sigma, so a ~ exp(-d^2 / (4 s^2)).
  const double s = fwhm_to_sigma(fwhm_nm);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd a(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = grid.detuning(static_cast<std::size_t>(i)) - center_offset_nm;
    a(i) = std::exp(-d * d / (4.0 * s * s));
  }
  auto lo = from_amplitude(grid, std::move(a));
  lo.fwhm_nm = fwhm_nm;
  return lo;
}

LOSpectrum LOSpectrum::from_amplitude(const FrequencyGrid& grid, Eigen::VectorXd amplitude) {
  if (static_cast<std::size_t>(amplitude.size()) != grid.size()) {
    throw PreconditionError("LO amplitude length does not match the grid");
  }
  const double norm = std::sqrt(amplitude.squaredNorm() * grid.step());
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw PreconditionError("LO amplitude has zero norm on the grid (too narrow for the grid step?)");
  }
  amplitude /= norm;
  Eigen::VectorXd phase = Eigen::VectorXd::Zero(amplitude.size());
  return {grid, std::move(amplitude), std::move(phase), 0.0};
}

VariancePair mode_variances(std::size_t k, const SupermodeBasis& basis, const PumpSetting& pump,
                            const CavityParams& cavity, double analysis_freq_mhz) {
  pump.validate();
  if (k > basis.cutoff) {
    throw PreconditionError("mode_variances: mode " + std::to_string(k) + " is beyond the cutoff " +
                            std::to_string(basis.cutoff));
  }
  if (!(analysis_freq_mhz >= 0.0)) throw PreconditionError("analysis frequency must be non-negative");

  const double eta = escape_efficiency(cavity);
  const double w = 2.0 * analysis_freq_mhz / cavity_bandwidth_fwhm(cavity);
  const double x = basis.gains[k] * std::sqrt(pump.normalized());
  const double w2 = w * w;
  return {1.0 - eta * 4.0 * x / ((1.0 + x) * (1.0 + x) + w2),
          1.0 + eta * 4.0 * x / ((1.0 - x) * (1.0 - x) + w2)};
}

std::vector<VariancePair> mode_variance_table(const SupermodeBasis& basis, const PumpSetting& pump,
                                              const CavityParams& cavity, double analysis_freq_mhz) {
  std::vector<VariancePair> out;
  out.reserve(basis.cutoff + 1);
  for (std::size_t k = 0; k <= basis.cutoff; ++k) {
    out.push_back(mode_variances(k, basis, pump, cavity, analysis_freq_mhz));
  }
  return out;
}

double parametric_gain(const PumpSetting& pump) {
  pump.validate();
  const double d = 1.0 - std::sqrt(pump.normalized());
  return 1.0 / (d * d);
}

ModeProjection project_lo(const LOSpectrum& lo, const SupermodeBasis& basis) {
  if (!lo.grid.same_as(basis.grid)) throw PreconditionError("project_lo: LO and supermodes use different grids");
  ModeProjection out;
  const std::size_t count = basis.cutoff + 1;
  out.overlaps.resize(count);
  out.weights.resize(count);
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double m = lo.amplitude.dot(basis.mode(k)) * basis.grid.step();
    out.overlaps[k] = m;
    out.weights[k] = m * m;
    total += m * m;
  }
  out.residual = 1.0 - total;
  return out;
}

double spopo_variance(double theta, const ModeProjection& projection, std::span<const VariancePair> per_mode) {
  if (projection.weights.size() != per_mode.size()) {
    throw PreconditionError("spopo_variance: " + std::to_string(projection.weights.size()) + " projections vs " +
                            std::to_string(per_mode.size()) + " mode variances");
  }
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  double total = projection.residual;
  for (std::size_t k = 0; k < per_mode.size(); ++k) {
    total += projection.weights[k] * (per_mode[k].squeezed * c2 + per_mode[k].antisqueezed * s2);
  }
  return total;
}

double detected_variance(double sigma2_spopo, double eta_hom) {
  if (!(sigma2_spopo > 0.0)) throw PreconditionError("detected_variance: variance must be positive");
  if (!(eta_hom > 0.0 && eta_hom <= 1.0)) throw PreconditionError("detected_variance: eta must lie in (0, 1]");
  return 1.0 - eta_hom * (1.0 - sigma2_spopo);
}

double infer_output_variance(double sigma2_detected, double eta_hom) {
  if (!(eta_hom > 0.0 && eta_hom <= 1.0)) throw PreconditionError("infer_output_variance: eta must lie in (0, 1]");
  const double out = 1.0 - (1.0 - sigma2_detected) / eta_hom;
  if (!(out > 0.0)) {
    throw InconsistentEfficiencyError("detected variance " + std::to_string(sigma2_detected) +
                                      " implies a non-positive output variance at eta = " + std::to_string(eta_hom));
  }
  return out;
}

namespace {

ScanPoint evaluate(double x, const ModeProjection& projection, std::span<const VariancePair> per_mode,
                   double eta_hom) {
  const double sq = spopo_variance(0.0, projection, per_mode);
  const double anti = spopo_variance(0.5 * std::numbers::pi, projection, per_mode);
  return {x, db(detected_variance(sq, eta_hom)), db(detected_variance(anti, eta_hom))};
}

}  // namespace

std::vector<ScanPoint> scan_pump(std::span<const double> p_values, double threshold_mw, const LOSpectrum& lo,
                                 const SupermodeBasis& basis, const CavityParams& cavity,
                                 const DetectionBudget& budget, double analysis_freq_mhz) {
  const double eta_hom = total_efficiency(budget);
  const auto projection = project_lo(lo, basis);
  std::vector<ScanPoint> out;
  out.reserve(p_values.size());
  for (double p : p_values) {
    const auto pump = PumpSetting::from_normalized(p, threshold_mw);
    const auto table = mode_variance_table(basis, pump, cavity, analysis_freq_mhz);
    out.push_back(evaluate(p, projection, table, eta_hom));
  }
  return out;
}

std::vector<ScanPoint> scan_lo_width(std::span<const double> widths_nm, const PumpSetting& pump,
                                     const SupermodeBasis& basis, const CavityParams& cavity,
                                     const DetectionBudget& budget, double analysis_freq_mhz,
                                     double lo_center_offset_nm) {
  const double eta_hom = total_efficiency(budget);
  const auto table = mode_variance_table(basis, pump, cavity, analysis_freq_mhz);
  std::vector<ScanPoint> out;
  out.reserve(widths_nm.size());
  for (double w : widths_nm) {
    const auto lo = LOSpectrum::gaussian(basis.grid, w, lo_center_offset_nm);
    out.push_back(evaluate(w, project_lo(lo, basis), table, eta_hom));
  }
  return out;
}

SupermodeBasis with_cutoff(SupermodeBasis basis, std::size_t k0) {
  if (k0 >= basis.size()) {
    throw PreconditionError("with_cutoff: k0 = " + std::to_string(k0) + " needs at least " + std::to_string(k0 + 1) +
                            " modes, basis has " + std::to_string(basis.size()));
  }
  basis.cutoff = k0;
  return basis;
}

}  // namespace spopo

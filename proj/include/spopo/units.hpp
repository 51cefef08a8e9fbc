#pragma once

#include <numbers>

namespace spopo {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

/// sqrt(8 ln 2): Gaussian FWHM = kFwhmPerSigma * sigma.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

inline constexpr double fwhm_to_sigma(double fwhm) { return fwhm / kFwhmPerSigma; }
inline constexpr double sigma_to_fwhm(double sigma) { return sigma * kFwhmPerSigma; }

/// Variance ratio to decibels, 10 log10(v). Throws PreconditionError for v <= 0.
double db(double variance);

/// Inverse of db().
double db_inv(double decibels);

}  // namespace spopo

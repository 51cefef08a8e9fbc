#include "spopo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spopo/errors.hpp"

namespace spopo {

FrequencyGrid::FrequencyGrid(double center_nm, double span_nm, std::size_t n_points)
    : center_(center_nm), span_(span_nm), step_(0.0) {
  if (n_points < 2) {
    throw PreconditionError("FrequencyGrid: need at least 2 points, got " + std::to_string(n_points));
  }
  if (!(span_nm > 0.0) || !std::isfinite(span_nm)) {
    throw PreconditionError("FrequencyGrid: span must be positive and finite");
  }
  if (!std::isfinite(center_nm)) throw PreconditionError("FrequencyGrid: center must be finite");

  step_ = span_nm / static_cast<double>(n_points - 1);
  offsets_.resize(n_points);
  points_.resize(n_points);
  // Mirror the lower half so detunings are exactly antisymmetric about the center.
  const double half = 0.5 * span_nm;
  for (std::size_t i = 0; i < (n_points + 1) / 2; ++i) {
    const double offset = -half + step_ * static_cast<double>(i);
    offsets_[i] = offset;
    offsets_[n_points - 1 - i] = -offset;
  }
  if (n_points % 2 == 1) offsets_[n_points / 2] = 0.0;
  for (std::size_t i = 0; i < n_points; ++i) points_[i] = center_nm + offsets_[i];
}

bool FrequencyGrid::same_as(const FrequencyGrid& other) const noexcept {
  if (size() != other.size()) return false;
  const double tol = 1e-9 * std::max(std::abs(center_), span_);
  return std::abs(center_ - other.center_) <= tol && std::abs(span_ - other.span_) <= tol;
}

}  // namespace spopo

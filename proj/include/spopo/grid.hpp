#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spopo {

/// Uniform wavelength grid, symmetric about its center. All lengths in nm.
class FrequencyGrid {
 public:
  static constexpr double kDefaultCenterNm = 1035.0;
  static constexpr double kDefaultSpanNm = 40.0;
  static constexpr std::size_t kDefaultPoints = 1024;

  /// Throws PreconditionError for n_points < 2 or non-positive span.
  FrequencyGrid(double center_nm, double span_nm, std::size_t n_points);
  FrequencyGrid() : FrequencyGrid(kDefaultCenterNm, kDefaultSpanNm, kDefaultPoints) {}

  double center() const noexcept { return center_; }
  double span() const noexcept { return span_; }
  std::size_t size() const noexcept { return points_.size(); }
  double step() const noexcept { return step_; }

  std::span<const double> points() const noexcept { return points_; }
  double operator[](std::size_t i) const noexcept { return points_[i]; }
  double detuning(std::size_t i) const noexcept { return offsets_[i]; }
  std::span<const double> detunings() const noexcept { return offsets_; }

  /// Same center and span at the given resolution.
  FrequencyGrid with_points(std::size_t n_points) const { return {center_, span_, n_points}; }

  /// Two grids are interchangeable when their sample points coincide.
  bool same_as(const FrequencyGrid& other) const noexcept;

 private:
  double center_;
  double span_;
  double step_;
  std::vector<double> offsets_;
  std::vector<double> points_;
};

}  // namespace spopo

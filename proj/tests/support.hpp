#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "spopo/commands.hpp"
#include "spopo/config.hpp"

namespace testing {

// Calibrated default basis; decomposing it takes a couple of seconds, so it
// is built once per test binary.
inline const spopo::SupermodeBasis& default_basis() {
  static const spopo::SupermodeBasis basis = spopo::build_basis(spopo::ExperimentConfig{});
  return basis;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spopo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Normalized Hermite function h_k(x) from the explicit polynomial, not the
// recurrence used by the library.
inline double hermite_function(unsigned k, double x) {
  const double norm = std::sqrt(std::pow(2.0, k) * std::tgamma(k + 1.0) * std::sqrt(M_PI));
  return std::hermite(k, x) * std::exp(-0.5 * x * x) / norm;
}

inline bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

}  // namespace testing

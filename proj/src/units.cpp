#include "spopo/units.hpp"

#include <cmath>
#include <string>

#include "spopo/errors.hpp"

namespace spopo {

double db(double variance) {
  if (!(variance > 0.0)) {
    throw PreconditionError("db: variance must be positive, got " + std::to_string(variance));
  }
  return 10.0 * std::log10(variance);
}

double db_inv(double decibels) { return std::pow(10.0, decibels / 10.0); }

}  // namespace spopo

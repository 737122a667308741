#pragma once

#include <cmath>
#include <limits>

namespace evplan::grid {

// Maximum apparent power deliverable over a branch of impedance magnitude
// `z_mag` and angle `omega` to a load of angle `phi`, fed from `v_upstream`.
// Units follow the inputs (p.u. in, p.u. out). Returns +inf when the
// impedance vanishes or the cosine term degenerates.
inline double max_loadability(double v_upstream, double z_mag, double omega, double phi) {
  constexpr double kUnbounded = std::numeric_limits<double>::infinity();
  if (!(z_mag > 0.0)) return kUnbounded;
  const double c = std::cos(0.5 * (omega - phi));
  const double c2 = c * c;
  if (c2 < 1e-12) return kUnbounded;
  return v_upstream * v_upstream / (4.0 * z_mag * c2);
}

}  // namespace evplan::grid

#pragma once

#include <vector>

#include "evplan/grid/ieee33.hpp"
#include "oracles/newton_load_flow.hpp"

namespace testdata {

inline std::vector<oracle::Line> ieee33_lines() {
  std::vector<oracle::Line> out;
  for (const auto& r : evplan::grid::ieee33::kRows) out.push_back({r.from, r.to, r.r_ohm, r.x_ohm});
  return out;
}

// Newton solve of the IEEE 33-bus feeder with optional extra load at one bus.
inline oracle::NewtonResult ieee33_oracle(int extra_bus = 0, double extra_p_kw = 0.0, double extra_q_kvar = 0.0) {
  std::vector<double> p(33, 0.0), q(33, 0.0);
  for (const auto& r : evplan::grid::ieee33::kRows) {
    p[r.to - 1] = r.p_kw;
    q[r.to - 1] = r.q_kvar;
  }
  if (extra_bus > 0) {
    p[extra_bus - 1] += extra_p_kw;
    q[extra_bus - 1] += extra_q_kvar;
  }
  return oracle::newton_load_flow(33, ieee33_lines(), p, q, 12.66, 10.0);
}

}  // namespace testdata

#pragma once

#include "evplan/grid/network.hpp"

namespace evplan::grid {

// Exact series/shunt line model relating sending-end (n) to receiving-end (m)
// quantities:  [V_n; I_n] = [A B; C D] [V_m; I_m].
template <int P>
struct LineAbcd {
  CMatrix<P> a, b, c, d;
};

template <int P>
LineAbcd<P> line_abcd(const Branch<P>& branch) {
  const CMatrix<P>& z = branch.z_abc;
  const CMatrix<P>& y = branch.y_abc;
  const CMatrix<P> u = CMatrix<P>::Identity();
  LineAbcd<P> m;
  m.a = u + 0.5 * z * y;
  m.b = z;
  m.c = y + 0.25 * y * z * y;
  m.d = m.a;
  return m;
}

}  // namespace evplan::grid

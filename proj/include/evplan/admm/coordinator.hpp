#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "evplan/errors.hpp"

namespace evplan::admm {

using Vec = Eigen::VectorXd;
using Siting = std::vector<int>;  // x_j in {0, 1}

struct StoppingRule {
  double eps_prim = 1e-4;
  double eps_dual = 1e-4;
  int max_iter = 50;
  bool balance_rho = false;  // residual balancing: x2 / /2 when one residual exceeds 10x the other

  void validate() const {
    if (!(eps_prim > 0.0 && eps_dual > 0.0)) throw ValidationError("ADMM tolerances must be positive");
    if (max_iter < 1) throw ValidationError("ADMM needs at least one iteration");
  }
};

struct Residual {
  double r_prim = 0.0;
  double r_dual = 0.0;
  double rho = 1.0;
};

struct Iterate {
  Siting x;
  Vec z, w, u;
};

struct PlanState {
  Siting x;
  Vec z, w, u;
  double rho = 1.0;
  int k = 0;
  std::vector<Residual> history;
  std::vector<Iterate> iterates;  // iterates[0] is the initial state
};

struct CapacityBox {
  double iota_max = 2000.0;    // per node, same units as z
  double iota_tot = 10000.0;   // all nodes
};

// Scales z down so that its sum does not exceed iota_tot.
inline Vec enforce_total(Vec z, double iota_tot) {
  const double s = z.sum();
  if (s > iota_tot && s > 0.0) z *= iota_tot / s;
  return z;
}

inline Vec project_consensus(const Vec& z, const Vec& u, const Siting& x, double iota_max) {
  if (z.size() != u.size() || z.size() != static_cast<Eigen::Index>(x.size()))
    throw ValidationError("consensus projection dimension mismatch");
  Vec w(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j)
    w(j) = std::min(std::max(z(j) + u(j), 0.0), iota_max * x[static_cast<std::size_t>(j)]);
  return w;
}

inline Vec update_dual(const Vec& u, const Vec& z, const Vec& w, double rho) { return u + rho * (z - w); }

inline Residual residuals(const Vec& z, const Vec& w, const Vec& w_prev, double rho) {
  return {(z - w).norm(), rho * (w - w_prev).norm(), rho};
}

struct RunResult {
  PlanState state;
  bool converged = false;
  int best_iteration = 0;
};

// Consensus loop: x from `x_update(state)`, z from `z_update(x)`, then
// projection and dual ascent until both residuals meet the rule. Returns the
// best iterate seen (smallest r_prim + r_dual) with converged = false when the
// cap is reached first.
template <class XUpdate, class ZUpdate>
RunResult run(int n, const Siting& x0, XUpdate&& x_update, ZUpdate&& z_update, const CapacityBox& box,
              const StoppingRule& rule, double rho0 = 1.0) {
  rule.validate();
  if (static_cast<int>(x0.size()) != n) throw ValidationError("initial siting has the wrong dimension");
  PlanState s;
  s.x = x0;
  s.z = Vec::Zero(n);
  s.w = Vec::Zero(n);
  s.u = Vec::Zero(n);
  s.rho = rho0;
  s.iterates.push_back({s.x, s.z, s.w, s.u});
  RunResult best;
  double best_score = std::numeric_limits<double>::infinity();
  for (s.k = 1; s.k <= rule.max_iter; ++s.k) {
    try {
      s.x = x_update(static_cast<const PlanState&>(s));
      if (static_cast<int>(s.x.size()) != n) throw ValidationError("siting update returned the wrong dimension");
      s.z = enforce_total(z_update(static_cast<const Siting&>(s.x)), box.iota_tot);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("ADMM iteration " + std::to_string(s.k) + ": " + e.what());
    }
    const Vec w_prev = s.w;
    s.w = project_consensus(s.z, s.u, s.x, box.iota_max);
    s.u = update_dual(s.u, s.z, s.w, s.rho);
    const Residual r = residuals(s.z, s.w, w_prev, s.rho);
    s.history.push_back(r);
    s.iterates.push_back({s.x, s.z, s.w, s.u});
    const double score = r.r_prim + r.r_dual;
    if (score < best_score) {
      best_score = score;
      best.best_iteration = s.k;
    }
    if (r.r_prim <= rule.eps_prim && r.r_dual <= rule.eps_dual) {
      best.state = std::move(s);
      best.best_iteration = best.state.k;
      best.converged = true;
      return best;
    }
    if (rule.balance_rho) {
      if (r.r_prim > 10.0 * r.r_dual) s.rho *= 2.0;
      else if (r.r_dual > 10.0 * r.r_prim) s.rho /= 2.0;
    }
  }
  s.k = rule.max_iter;
  const Iterate& b = s.iterates[static_cast<std::size_t>(best.best_iteration)];
  s.x = b.x;
  s.z = b.z;
  s.w = b.w;
  s.u = b.u;
  best.state = std::move(s);
  return best;
}

}  // namespace evplan::admm

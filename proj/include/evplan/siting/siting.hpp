#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evplan/errors.hpp"
#include "evplan/transport/network.hpp"

namespace evplan::siting {

using transport::DistanceMatrix;
using transport::NodeId;

struct SitingInstance {
  DistanceMatrix dm;
  std::vector<std::vector<double>> xi;  // [period][node - 1], EV per hour
  double c_tc = 8.15;                   // $/h
  std::vector<double> v_avg_kmh{40.0};  // per period; a single value applies to all
  int psi = 5;
  std::set<NodeId> fixed_open;          // forced-open sites, counted in psi
  std::vector<NodeId> candidates;       // empty = every node
  double r_s_km = 10.0;
  double d_ev_km = 100.0;
  double varsigma = 0.3;
  bool coverage_limit = true;           // false turns the problem into a plain p-median
  bool spacing_check = true;

  int nodes() const { return dm.size(); }
  int periods() const { return static_cast<int>(xi.size()); }
  double speed(int t) const { return v_avg_kmh.size() == 1 ? v_avg_kmh[0] : v_avg_kmh[t]; }
  double reach_km() const {
    return coverage_limit ? varsigma * d_ev_km : std::numeric_limits<double>::infinity();
  }

  std::vector<NodeId> candidate_list() const {
    if (!candidates.empty()) {
      std::vector<NodeId> c = candidates;
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      return c;
    }
    std::vector<NodeId> all(nodes());
    for (int j = 0; j < nodes(); ++j) all[j] = j + 1;
    return all;
  }

  void validate() const {
    if (psi < static_cast<int>(fixed_open.size()))
      throw ValidationError("psi = " + std::to_string(psi) + " is smaller than the fixed station count " +
                            std::to_string(fixed_open.size()));
    if (!(varsigma > 0.0 && varsigma <= 1.0)) throw ValidationError("psychological factor must lie in (0, 1]");
    if (r_s_km > d_ev_km) throw ValidationError("service radius exceeds EV range");
    if (xi.empty()) throw ValidationError("siting instance has no demand periods");
    for (const auto& row : xi)
      if (static_cast<int>(row.size()) != nodes()) throw ValidationError("demand width differs from node count");
    if (v_avg_kmh.size() != 1 && static_cast<int>(v_avg_kmh.size()) != periods())
      throw ValidationError("need one average speed or one per period");
    for (double v : v_avg_kmh)
      if (!(v > 0.0)) throw ValidationError("average speed must be positive");
    const auto cand = candidate_list();
    if (psi > static_cast<int>(cand.size())) throw ValidationError("psi exceeds the number of candidate sites");
    for (NodeId k : fixed_open)
      if (!std::binary_search(cand.begin(), cand.end(), k))
        throw ValidationError("fixed station " + std::to_string(k) + " is not a candidate site");
    for (NodeId j : cand)
      if (j < 1 || j > nodes()) throw ValidationError("candidate " + std::to_string(j) + " is not a transport node");
  }
};

struct SitingDecision {
  std::vector<std::vector<NodeId>> open;       // [period] sorted open sites
  std::vector<std::vector<NodeId>> assigned;   // [period][node - 1] -> station
  std::vector<std::vector<double>> node_cost;  // [period][node - 1] travel cost, $/h
  double objective = 0.0;                      // $/h summed over periods

  bool x(int t, NodeId j) const { return std::binary_search(open[t].begin(), open[t].end(), j); }
  bool v(int t, NodeId i, NodeId j) const { return assigned[t][i - 1] == j; }
};

struct Uncovered : InfeasibleError {
  Uncovered(NodeId node, const std::string& w) : InfeasibleError(w), node(node) {}
  NodeId node;
};

struct Assignment {
  std::vector<std::vector<char>> y;  // [i - 1][j - 1] coverage
  std::vector<NodeId> v;             // [i - 1] assigned station
};

// Coverage and nearest-station assignment for a fixed open set.
inline Assignment assign_demand(const std::vector<NodeId>& open, const DistanceMatrix& dm, const SitingInstance& inst) {
  const int n = dm.size();
  const double reach = inst.reach_km();
  Assignment a;
  a.y.assign(n, std::vector<char>(n, 0));
  a.v.assign(n, 0);
  std::vector<NodeId> sorted = open;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 1; i <= n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (NodeId j : sorted) {
      const double d = dm(i, j);
      if (d > reach) continue;
      a.y[i - 1][j - 1] = 1;
      if (d < best) {
        best = d;
        a.v[i - 1] = j;
      }
    }
    if (a.v[i - 1] == 0)
      throw Uncovered(i, "demand node " + std::to_string(i) + " is outside every open station's reach");
  }
  return a;
}

struct SpacingVerdict {
  bool pass = true;
  NodeId a = 0, b = 0;
  double distance_km = 0.0;
};

// Mutually nearest open stations must sit between the service radius and the EV range.
inline SpacingVerdict check_spacing(const std::vector<NodeId>& open, const DistanceMatrix& dm,
                                    const SitingInstance& inst) {
  std::vector<NodeId> s = open;
  std::sort(s.begin(), s.end());
  auto nearest = [&](NodeId j) {
    NodeId best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (NodeId k : s)
      if (k != j && dm(j, k) < bd) {
        bd = dm(j, k);
        best = k;
      }
    return best;
  };
  for (NodeId j : s) {
    NodeId k = nearest(j);
    if (k == 0 || k < j || nearest(k) != j) continue;
    const double d = dm(j, k);
    if (d < inst.r_s_km || d > inst.d_ev_km) return {false, j, k, d};
  }
  return {};
}

namespace detail {

// Exact per-period search over psi-subsets containing the fixed sites.
class SubsetSearch {
 public:
  SubsetSearch(const SitingInstance& inst, int t) : inst_(inst) {
    n_ = inst.nodes();
    reach_ = inst.reach_km();
    weight_.resize(n_);
    for (int i = 0; i < n_; ++i) weight_[i] = inst.c_tc * inst.xi[t][i] / inst.speed(t);
    for (NodeId j : inst.candidate_list())
      if (!inst.fixed_open.count(j)) free_.push_back(j);
    chosen_.assign(inst.fixed_open.begin(), inst.fixed_open.end());
    picks_ = inst.psi - static_cast<int>(inst.fixed_open.size());
  }

  std::optional<std::vector<NodeId>> run() {
    dfs(0, picks_);
    return best_set_;
  }

 private:
  double bound(std::size_t pos) const {
    double lb = 0.0;
    for (int i = 1; i <= n_; ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (NodeId j : chosen_)
        if (inst_.dm(i, j) <= reach_) m = std::min(m, inst_.dm(i, j));
      for (std::size_t q = pos; q < free_.size(); ++q)
        if (inst_.dm(i, free_[q]) <= reach_) m = std::min(m, inst_.dm(i, free_[q]));
      if (m == std::numeric_limits<double>::infinity()) return m;
      lb += weight_[i - 1] * m;
    }
    return lb;
  }

  void leaf() {
    std::vector<NodeId> s = chosen_;
    std::sort(s.begin(), s.end());
    if (inst_.spacing_check && !check_spacing(s, inst_.dm, inst_).pass) return;
    const double obj = bound(free_.size());
    if (!std::isfinite(obj)) return;
    const double tol = 1e-9 * std::max(1.0, std::abs(best_));
    if (!best_set_ || obj < best_ - tol || (obj <= best_ + tol && s < *best_set_)) {
      best_ = obj;
      best_set_ = s;
    }
  }

  void dfs(std::size_t pos, int remaining) {
    if (remaining == 0) {
      leaf();
      return;
    }
    if (free_.size() - pos < static_cast<std::size_t>(remaining)) return;
    const double lb = bound(pos);
    if (!std::isfinite(lb)) return;
    if (best_set_ && lb > best_ + 1e-9 * std::max(1.0, std::abs(best_))) return;
    chosen_.push_back(free_[pos]);
    dfs(pos + 1, remaining - 1);
    chosen_.pop_back();
    dfs(pos + 1, remaining);
  }

  const SitingInstance& inst_;
  int n_ = 0;
  double reach_ = 0.0;
  std::vector<double> weight_;
  std::vector<NodeId> free_;
  std::vector<NodeId> chosen_;
  int picks_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  std::optional<std::vector<NodeId>> best_set_;
};

}  // namespace detail

// Fills assignment and costs of a decision for fixed open sets.
inline SitingDecision evaluate_open_sets(const SitingInstance& inst, std::vector<std::vector<NodeId>> open) {
  SitingDecision dec;
  dec.open = std::move(open);
  for (int t = 0; t < inst.periods(); ++t) {
    auto a = assign_demand(dec.open[t], inst.dm, inst);
    std::vector<double> cost(inst.nodes());
    for (int i = 1; i <= inst.nodes(); ++i) {
      cost[i - 1] = inst.c_tc * inst.xi[t][i - 1] * inst.dm(i, a.v[i - 1]) / inst.speed(t);
      dec.objective += cost[i - 1];
    }
    dec.assigned.push_back(std::move(a.v));
    dec.node_cost.push_back(std::move(cost));
  }
  return dec;
}

inline SitingDecision solve_siting(const SitingInstance& inst) {
  inst.validate();
  std::vector<std::vector<NodeId>> open;
  for (int t = 0; t < inst.periods(); ++t) {
    auto best = detail::SubsetSearch(inst, t).run();
    if (!best)
      throw InfeasibleError("no set of " + std::to_string(inst.psi) +
                            " stations containing the fixed sites covers all demand in period " +
                            std::to_string(t + 1));
    open.push_back(std::move(*best));
  }
  return evaluate_open_sets(inst, std::move(open));
}

// Checks the location model's constraint families on a decision; returns one
// message per violation.
inline std::vector<std::string> validate_decision(const SitingDecision& dec, const SitingInstance& inst) {
  std::vector<std::string> bad;
  const int n = inst.nodes();
  const double reach = inst.reach_km();
  for (int t = 0; t < inst.periods(); ++t) {
    const std::string tag = " (period " + std::to_string(t + 1) + ")";
    if (static_cast<int>(dec.open[t].size()) != inst.psi) bad.push_back("open count differs from psi" + tag);
    for (NodeId k : inst.fixed_open)
      if (!dec.x(t, k)) bad.push_back("fixed station " + std::to_string(k) + " closed" + tag);
    for (int i = 1; i <= n; ++i) {
      int assigned = 0;
      for (int j = 1; j <= n; ++j) {
        const bool x = dec.x(t, j);
        const bool y = x && inst.dm(i, j) <= reach;
        const bool v = dec.v(t, i, j);
        if (v && !y) bad.push_back("assignment " + std::to_string(i) + "->" + std::to_string(j) + " not covered" + tag);
        assigned += v;
      }
      if (assigned != 1) bad.push_back("node " + std::to_string(i) + " assigned " + std::to_string(assigned) + " times" + tag);
    }
    if (inst.spacing_check && !check_spacing(dec.open[t], inst.dm, inst).pass) bad.push_back("spacing violated" + tag);
  }
  return bad;
}

}  // namespace evplan::siting

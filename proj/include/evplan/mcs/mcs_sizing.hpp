#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "evplan/mcs/queueing.hpp"
#include "evplan/transport/network.hpp"

namespace evplan::mcs {

struct CapacityBounds {
  double iota_min = 0.0;   // units per site
  double iota_max = 20.0;  // units per site
  double unit_kw = 100.0;  // one unit = one charger of this rating

  double max_kw() const { return iota_max * unit_kw; }
  double min_kw() const { return iota_min * unit_kw; }
};

struct CapacityBoundViolated : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

inline double capacity_from_chargers(int chargers, double rate_kw, const CapacityBounds& b = {}) {
  if (chargers < 0) throw ValidationError("charger count must be non-negative");
  const double kw = chargers * rate_kw;
  if (kw > b.max_kw() + 1e-9 || kw < b.min_kw() - 1e-9)
    throw CapacityBoundViolated(std::to_string(chargers) + " chargers (" + std::to_string(kw) +
                                " kW) fall outside the per-site capacity bounds [" + std::to_string(b.min_kw()) +
                                ", " + std::to_string(b.max_kw()) + "] kW");
  return kw;
}

struct McsParams {
  double mu = 4.0;                // EV per hour per charger
  double tw_limit_h = 1.0 / 6.0;
  double c_mo_unit = 0.9;         // $/h per MCS
  double c_mo_budget = 90.0;      // $/h
  double c_tc = 8.15;             // $/h
  int chargers_per_mcs = 4;
  double charger_kw = 100.0;
  CapacityBounds bounds;
};

struct McsSite {
  transport::NodeId node = 0;
  double lambda = 0.0;
  int chargers = 0;
};

struct McsSiteResult {
  McsSite site;
  int n_mcs = 0;
  double capacity_kw = 0.0;
  QueueMetrics q;
  double operation_cost = 0.0;  // $/h
  double waiting_cost = 0.0;    // $/h
};

struct McsSizingResult {
  std::vector<McsSiteResult> sites;
  int n_mcs = 0;
  double operation_cost = 0.0;  // $/h
  double waiting_cost = 0.0;    // $/h
  double total() const { return operation_cost + waiting_cost; }
};

struct BudgetExceeded : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

inline int mcs_units(int chargers, int per_mcs) { return (chargers + per_mcs - 1) / per_mcs; }

// Operating plus waiting-time cost of a set of MCS sites with fixed charger counts.
inline McsSizingResult mcs_cost(const std::vector<McsSite>& sites, const McsParams& p) {
  McsSizingResult r;
  for (const auto& s : sites) {
    McsSiteResult sr;
    sr.site = s;
    sr.q = erlang_metrics({s.lambda, p.mu, s.chargers});
    sr.n_mcs = mcs_units(s.chargers, p.chargers_per_mcs);
    sr.capacity_kw = s.chargers * p.charger_kw;
    sr.operation_cost = p.c_mo_unit * sr.n_mcs;
    sr.waiting_cost = p.c_tc * s.lambda * sr.q.tw;
    r.n_mcs += sr.n_mcs;
    r.operation_cost += sr.operation_cost;
    r.waiting_cost += sr.waiting_cost;
    r.sites.push_back(sr);
  }
  if (r.operation_cost > p.c_mo_budget + 1e-9)
    throw BudgetExceeded("MCS operation cost " + std::to_string(r.operation_cost) + " $/h exceeds the limit of " +
                         std::to_string(p.c_mo_budget) + " $/h");
  return r;
}

// Sizes each site with the fewest chargers meeting the wait limit, then prices the fleet.
inline McsSizingResult size_mcs(const std::vector<std::pair<transport::NodeId, double>>& site_lambda,
                                const McsParams& p) {
  std::vector<McsSite> sites;
  const int c_max = static_cast<int>(std::floor(p.bounds.max_kw() / p.charger_kw + 1e-9));
  for (const auto& [node, lambda] : site_lambda) {
    const int c = min_servers(lambda, p.mu, p.tw_limit_h, c_max);
    capacity_from_chargers(c, p.charger_kw, p.bounds);
    sites.push_back({node, lambda, c});
  }
  return mcs_cost(sites, p);
}

}  // namespace evplan::mcs

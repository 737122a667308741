#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "evplan/errors.hpp"
#include "evplan/transport/network.hpp"

namespace evplan::transport {

// EV charging demand per period (rows) and transport node (columns).
struct DemandProfile {
  std::vector<std::vector<double>> xi;        // EV arrivals per hour
  std::vector<std::vector<double>> kwh_arr;   // aggregate energy on arrival
  std::vector<std::vector<double>> kwh_dep;   // aggregate energy on departure

  int periods() const { return static_cast<int>(xi.size()); }
  int nodes() const { return xi.empty() ? 0 : static_cast<int>(xi.front().size()); }

  double arrivals(int t, NodeId i) const { return xi[t][i - 1]; }

  // Energy that has to be delivered in period t, kWh.
  double energy_demand_kwh(int t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < xi[t].size(); ++i) s += kwh_dep[t][i] - kwh_arr[t][i];
    return s;
  }

  void validate() const {
    if (kwh_arr.size() != xi.size() || kwh_dep.size() != xi.size())
      throw ValidationError("demand profile period count mismatch");
    for (std::size_t t = 0; t < xi.size(); ++t) {
      if (xi[t].size() != xi.front().size() || kwh_arr[t].size() != xi[t].size() ||
          kwh_dep[t].size() != xi[t].size())
        throw ValidationError("demand profile node count mismatch in period " + std::to_string(t + 1));
      for (std::size_t i = 0; i < xi[t].size(); ++i) {
        if (xi[t][i] < 0.0) throw ValidationError("negative demand at node " + std::to_string(i + 1));
        if (kwh_dep[t][i] < kwh_arr[t][i])
          throw ValidationError("departure energy below arrival energy at node " + std::to_string(i + 1));
      }
    }
  }

  static DemandProfile zeros(int periods, int nodes) {
    DemandProfile d;
    d.xi.assign(periods, std::vector<double>(nodes, 0.0));
    d.kwh_arr = d.xi;
    d.kwh_dep = d.xi;
    return d;
  }
};

// Synthetic demand: arrivals per node and period are Poisson(intensity); each
// arriving EV carries a battery of `battery_kwh` and arrives / departs at a
// state of charge drawn uniformly from the given ranges.
struct DemandGenerator {
  double intensity = 2.0;  // EV per hour per node
  double battery_kwh = 60.0;
  double soc_arr_lo = 0.2, soc_arr_hi = 0.4;
  double soc_dep_lo = 0.8, soc_dep_hi = 0.9;
};

inline DemandProfile synthesize_demand(std::uint64_t seed, int nodes, int periods, const DemandGenerator& g = {}) {
  if (g.intensity < 0.0) throw ValidationError("demand intensity must be non-negative");
  DemandProfile d = DemandProfile::zeros(periods, nodes);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arr(g.soc_arr_lo, g.soc_arr_hi), dep(g.soc_dep_lo, g.soc_dep_hi);
  for (int t = 0; t < periods; ++t)
    for (int i = 0; i < nodes; ++i) {
      int count = 0;
      if (g.intensity > 0.0) count = std::poisson_distribution<int>(g.intensity)(rng);
      d.xi[t][i] = count;
      for (int e = 0; e < count; ++e) {
        d.kwh_arr[t][i] += arr(rng) * g.battery_kwh;
        d.kwh_dep[t][i] += dep(rng) * g.battery_kwh;
      }
    }
  return d;
}

}  // namespace evplan::transport

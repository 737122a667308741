#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "evplan/errors.hpp"

namespace evplan::transport {

using NodeId = int;  // 1-based

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double length_km = 0.0;
};

// Undirected road graph with an optional transport-node -> distribution-bus map.
struct TransportNetwork {
  int node_count = 0;
  std::vector<Edge> edges;
  std::map<NodeId, int> coupling;  // transport node -> distribution bus

  void validate() const {
    if (node_count < 1) throw ValidationError("transport network needs at least one node");
    for (const auto& e : edges) {
      for (NodeId n : {e.u, e.v})
        if (n < 1 || n > node_count)
          throw ValidationError("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                " references missing transport node " + std::to_string(n));
      if (!(e.length_km > 0.0))
        throw ValidationError("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                              " has non-positive length");
    }
    std::set<int> buses;
    for (const auto& [node, bus] : coupling) {
      if (node < 1 || node > node_count)
        throw ValidationError("coupling references missing transport node " + std::to_string(node));
      if (!buses.insert(bus).second)
        throw ValidationError("coupling maps two transport nodes to bus " + std::to_string(bus));
    }
  }

  // Transport node coupled to `bus`, or 0.
  NodeId node_for_bus(int bus) const {
    for (const auto& [node, b] : coupling)
      if (b == bus) return node;
    return 0;
  }
};

// Shortest road distances in km, indexed by node - 1.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(Eigen::MatrixXd d) : d_(std::move(d)) {}

  double operator()(NodeId i, NodeId j) const { return d_(i - 1, j - 1); }
  int size() const { return static_cast<int>(d_.rows()); }
  const Eigen::MatrixXd& matrix() const { return d_; }

 private:
  Eigen::MatrixXd d_;
};

struct Disconnected : ValidationError {
  using ValidationError::ValidationError;
};

// Floyd-Warshall over the road graph.
inline DistanceMatrix all_pairs_shortest(const TransportNetwork& net) {
  net.validate();
  const int n = net.node_count;
  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const auto& e : net.edges) {
    const int a = e.u - 1, b = e.v - 1;
    d(a, b) = std::min(d(a, b), e.length_km);
    d(b, a) = d(a, b);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (d(i, k) == inf) continue;
      for (int j = 0; j < n; ++j)
        if (d(i, k) + d(k, j) < d(i, j)) d(i, j) = d(i, k) + d(k, j);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (d(i, j) == inf)
        throw Disconnected("transport nodes " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                           " are not connected");
  return DistanceMatrix(std::move(d));
}

// Value of an hour of driving time from resident income.
inline double time_cost_rate(double annual_income, double annual_hours) {
  if (!(annual_hours > 0.0)) throw ValidationError("annual working hours must be positive");
  return annual_income / annual_hours;
}

}  // namespace evplan::transport

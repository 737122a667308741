#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "evplan/errors.hpp"

namespace evplan::grid {

using Complex = std::complex<double>;

template <int P>
using CMatrix = Eigen::Matrix<Complex, P, P>;
template <int P>
using CVector = Eigen::Matrix<Complex, P, 1>;
template <int P>
using RVector = Eigen::Matrix<double, P, 1>;

// 1-based bus index as used in case files.
using BusId = int;

enum class PhaseId { a = 0, b = 1, c = 2 };

// P = 3 is the full three-phase model. P = 1 is one phase of a balanced
// system: voltages are line-to-neutral, loads are per phase and totals are
// scaled back up by 3.
template <int P>
inline constexpr double kPhaseMultiplicity = 3.0 / P;

template <int P>
struct Branch {
  BusId from = 0;
  BusId to = 0;
  CMatrix<P> z_abc = CMatrix<P>::Zero();  // series impedance, ohm
  CMatrix<P> y_abc = CMatrix<P>::Zero();  // total shunt admittance, S
  double ampacity_a = std::numeric_limits<double>::infinity();
};

template <int P>
struct BusLoad {
  RVector<P> p_kw = RVector<P>::Zero();    // per phase
  RVector<P> q_kvar = RVector<P>::Zero();  // per phase
  std::string category;

  // Spreads a three-phase total evenly over the modelled phases.
  static BusLoad balanced(double p_total_kw, double q_total_kvar, std::string cat = {}) {
    BusLoad l;
    l.p_kw.setConstant(p_total_kw / 3.0);
    l.q_kvar.setConstant(q_total_kvar / 3.0);
    l.category = std::move(cat);
    return l;
  }

  double total_p_kw() const { return p_kw.sum() * kPhaseMultiplicity<P>; }
  double total_q_kvar() const { return q_kvar.sum() * kPhaseMultiplicity<P>; }
};

template <int P>
using LoadSet = std::vector<BusLoad<P>>;  // indexed by bus - 1

// Balanced branch from per-phase series R, X (ohm) and total line charging B (uS).
template <int P>
Branch<P> balanced_branch(BusId from, BusId to, double r_ohm, double x_ohm, double b_us = 0.0,
                          double ampacity_a = std::numeric_limits<double>::infinity()) {
  Branch<P> br;
  br.from = from;
  br.to = to;
  br.z_abc = CMatrix<P>::Identity() * Complex(r_ohm, x_ohm);
  br.y_abc = CMatrix<P>::Identity() * Complex(0.0, b_us * 1e-6);
  br.ampacity_a = ampacity_a;
  return br;
}

struct Bases {
  double v_base_kv_ll = 12.66;
  double s_base_mva = 10.0;

  double v_base_ln_volts() const { return v_base_kv_ll * 1000.0 / std::sqrt(3.0); }
};

// Radial feeder rooted at the slack bus. Branch orientation is normalised at
// construction so that every branch points away from the slack.
template <int P>
class DistributionNetwork {
 public:
  DistributionNetwork(int bus_count, BusId slack, std::vector<Branch<P>> branches, Bases bases = {},
                      double slack_voltage_pu = 1.0)
      : bus_count_(bus_count),
        slack_(slack),
        branches_(std::move(branches)),
        bases_(bases),
        slack_voltage_pu_(slack_voltage_pu) {
    build_topology();
  }

  int bus_count() const { return bus_count_; }
  BusId slack() const { return slack_; }
  const Bases& bases() const { return bases_; }
  double slack_voltage_pu() const { return slack_voltage_pu_; }
  const std::vector<Branch<P>>& branches() const { return branches_; }

  // Buses in breadth-first order from the slack.
  const std::vector<BusId>& order() const { return order_; }
  // Index of the branch feeding `bus`, -1 for the slack.
  int parent_branch(BusId bus) const { return parent_branch_[bus - 1]; }
  BusId upstream(int branch) const { return upstream_[branch]; }
  BusId downstream(int branch) const { return downstream_[branch]; }
  const std::vector<int>& child_branches(BusId bus) const { return children_[bus - 1]; }

  // Branch indices on the path slack -> bus, slack side first.
  std::vector<int> path_from_slack(BusId bus) const {
    std::vector<int> path;
    for (int br = parent_branch(bus); br >= 0; br = parent_branch(upstream_[br])) path.push_back(br);
    return {path.rbegin(), path.rend()};
  }

  LoadSet<P> empty_loads() const { return LoadSet<P>(static_cast<std::size_t>(bus_count_)); }

 private:
  void build_topology() {
    if (bus_count_ < 1) throw ValidationError("network needs at least one bus");
    if (slack_ < 1 || slack_ > bus_count_)
      throw ValidationError("slack bus " + std::to_string(slack_) + " is not a bus of the network");
    if (static_cast<int>(branches_.size()) != bus_count_ - 1)
      throw NotRadial("radial network needs bus count = branch count + 1 (" + std::to_string(bus_count_) +
                      " buses, " + std::to_string(branches_.size()) + " branches)");

    std::vector<std::vector<int>> incident(bus_count_);
    for (std::size_t k = 0; k < branches_.size(); ++k) {
      const auto& br = branches_[k];
      for (BusId b : {br.from, br.to})
        if (b < 1 || b > bus_count_)
          throw ValidationError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                                " references missing bus " + std::to_string(b));
      if (br.from == br.to) throw NotRadial("self-loop at bus " + std::to_string(br.from));
      incident[br.from - 1].push_back(static_cast<int>(k));
      incident[br.to - 1].push_back(static_cast<int>(k));
    }

    parent_branch_.assign(bus_count_, -1);
    children_.assign(bus_count_, {});
    upstream_.assign(branches_.size(), 0);
    downstream_.assign(branches_.size(), 0);
    std::vector<bool> seen(bus_count_, false);
    std::queue<BusId> frontier;
    frontier.push(slack_);
    seen[slack_ - 1] = true;
    while (!frontier.empty()) {
      BusId bus = frontier.front();
      frontier.pop();
      order_.push_back(bus);
      for (int k : incident[bus - 1]) {
        if (k == parent_branch_[bus - 1]) continue;
        const auto& br = branches_[k];
        BusId other = br.from == bus ? br.to : br.from;
        if (seen[other - 1]) throw NotRadial("cycle through bus " + std::to_string(other));
        seen[other - 1] = true;
        parent_branch_[other - 1] = k;
        upstream_[k] = bus;
        downstream_[k] = other;
        children_[bus - 1].push_back(k);
        frontier.push(other);
      }
    }
    for (int b = 1; b <= bus_count_; ++b)
      if (!seen[b - 1]) throw NotRadial("bus " + std::to_string(b) + " is disconnected from the slack");
  }

  int bus_count_;
  BusId slack_;
  std::vector<Branch<P>> branches_;
  Bases bases_;
  double slack_voltage_pu_;

  std::vector<BusId> order_;
  std::vector<int> parent_branch_;
  std::vector<std::vector<int>> children_;
  std::vector<BusId> upstream_;
  std::vector<BusId> downstream_;
};

// Slack phasors: a at 0, b at -120 deg, c at +120 deg.
template <int P>
CVector<P> slack_phasors(double magnitude) {
  CVector<P> v;
  for (int p = 0; p < P; ++p) v(p) = std::polar(magnitude, -2.0 * std::numbers::pi * p / 3.0);
  return v;
}

}  // namespace evplan::grid

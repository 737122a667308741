#pragma once

#include <map>
#include <string>
#include <vector>

#include "evplan/admm/coordinator.hpp"
#include "evplan/fcs/fcs_sizing.hpp"
#include "evplan/mcs/mcs_sizing.hpp"
#include "evplan/siting/siting.hpp"

namespace evplan::admm {

using transport::NodeId;

// Everything the joint FCS-MCS planning loop needs for one FCS location.
template <int P>
struct JointInputs {
  const grid::DistributionNetwork<P>* net = nullptr;
  grid::LoadSet<P> base_loads;
  siting::SitingInstance siting;  // single period of average demand; fixed_open holds the FCS node
  transport::DemandProfile demand;
  NodeId fcs_node = 0;
  grid::BusId fcs_bus = 0;
  double fcs_hc_kw = 0.0;
  double mcs_share = 0.2;  // share of demand at MCS-served nodes that uses the MCS
  mcs::McsParams mcs;
  fcs::CostParams cost;
  fcs::FcsOptions fcs_options;
  double iota_tot_units = 100.0;
  StoppingRule rule;
  double rho = 1.0;

  CapacityBox box() const { return {mcs.bounds.max_kw(), iota_tot_units * mcs.bounds.unit_kw}; }
};

struct CapacityPlan {
  std::vector<NodeId> open;
  std::vector<NodeId> assigned;                 // [node - 1] station serving the node
  std::map<NodeId, double> lambda;              // EV per hour at each open site
  std::map<NodeId, int> chargers;               // MCS sites only
  double s_lower_kw = 0.0;                      // FCS queueing lower bound
  fcs::FcsSizingResult fcs;
  Vec z;                                        // kW per node
};

struct JointPlan {
  RunResult admm;
  CapacityPlan capacity;
  siting::SitingDecision siting;
  mcs::McsSizingResult mcs;
  NodeId fcs_node = 0;
  grid::BusId fcs_bus = 0;
};

inline std::vector<NodeId> open_sites(const Siting& x) {
  std::vector<NodeId> o;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j]) o.push_back(static_cast<NodeId>(j + 1));
  return o;
}

inline Siting to_siting(const std::vector<NodeId>& open, int n) {
  Siting x(static_cast<std::size_t>(n), 0);
  for (NodeId j : open) x[static_cast<std::size_t>(j - 1)] = 1;
  return x;
}

// Siting block: the location model with the fixed FCS and every node holding
// consensus capacity forced open.
template <int P>
Siting update_siting(const PlanState& s, const JointInputs<P>& in) {
  auto inst = in.siting;
  for (Eigen::Index j = 0; j < s.w.size(); ++j)
    if (s.w(j) > 0.0) inst.fixed_open.insert(static_cast<NodeId>(j + 1));
  const auto dec = siting::solve_siting(inst);
  return to_siting(dec.open.front(), inst.nodes());
}

// Capacity block for a fixed siting: queueing-sized MCS sites and the
// cost-optimal FCS; closed nodes get zero.
template <int P>
CapacityPlan update_capacity(const Siting& x, const JointInputs<P>& in) {
  constexpr int kUncapped = 100000;
  const int n = in.siting.nodes();
  CapacityPlan c;
  c.open = open_sites(x);
  c.assigned = siting::assign_demand(c.open, in.siting.dm, in.siting).v;
  for (NodeId j : c.open) c.lambda[j] = 0.0;
  const auto& xi = in.siting.xi.front();
  for (int i = 1; i <= n; ++i) {
    const NodeId g = c.assigned[i - 1];
    if (g == in.fcs_node) {
      c.lambda[in.fcs_node] += xi[i - 1];
    } else {
      c.lambda[g] += in.mcs_share * xi[i - 1];
      c.lambda[in.fcs_node] += (1.0 - in.mcs_share) * xi[i - 1];
    }
  }
  c.z = Vec::Zero(n);
  double mcs_kw = 0.0;
  for (NodeId j : c.open) {
    if (j == in.fcs_node) continue;
    const int chargers = mcs::min_servers(c.lambda[j], in.mcs.mu, in.mcs.tw_limit_h, kUncapped);
    c.chargers[j] = chargers;
    c.z(j - 1) = chargers * in.mcs.charger_kw;
    mcs_kw += c.z(j - 1);
  }
  c.s_lower_kw =
      mcs::min_servers(c.lambda[in.fcs_node], in.mcs.mu, in.mcs.tw_limit_h, kUncapped) * in.mcs.charger_kw;
  auto opt = in.fcs_options;
  opt.s_cap_kw = std::min(opt.s_cap_kw, in.mcs.bounds.max_kw());
  const std::vector<double> mcs_supply(static_cast<std::size_t>(in.demand.periods()),
                                       mcs_kw * opt.period_h);
  c.fcs = fcs::size_fcs(*in.net, in.base_loads, {{in.fcs_bus, in.fcs_hc_kw, c.s_lower_kw}}, in.demand, mcs_supply,
                        in.cost, opt);
  c.z(in.fcs_node - 1) = c.fcs.sites.front().s_kw;
  return c;
}

template <int P>
JointPlan plan_joint(const JointInputs<P>& in) {
  if (!in.net) throw ValidationError("joint planning needs a distribution network");
  if (in.siting.periods() != 1) throw ValidationError("joint planning expects one period of average demand");
  if (!in.siting.fixed_open.count(in.fcs_node))
    throw ValidationError("FCS node " + std::to_string(in.fcs_node) + " must be a fixed site");
  const int n = in.siting.nodes();
  const auto x0 = to_siting(siting::solve_siting(in.siting).open.front(), n);
  std::map<Siting, CapacityPlan> cache;
  auto capacity = [&](const Siting& x) -> const CapacityPlan& {
    auto it = cache.find(x);
    if (it == cache.end()) it = cache.emplace(x, update_capacity(x, in)).first;
    return it->second;
  };
  JointPlan out;
  out.admm = run(
      n, x0, [&](const PlanState& s) { return update_siting(s, in); },
      [&](const Siting& x) { return capacity(x).z; }, in.box(), in.rule, in.rho);
  out.capacity = capacity(out.admm.state.x);
  out.siting = siting::evaluate_open_sets(in.siting, {out.capacity.open});
  std::vector<mcs::McsSite> sites;
  for (const auto& [node, chargers] : out.capacity.chargers)
    sites.push_back({node, out.capacity.lambda.at(node), chargers});
  out.mcs = mcs::mcs_cost(sites, in.mcs);
  out.fcs_node = in.fcs_node;
  out.fcs_bus = in.fcs_bus;
  return out;
}

}  // namespace evplan::admm

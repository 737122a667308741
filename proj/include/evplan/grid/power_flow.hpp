#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "evplan/grid/line_model.hpp"
#include "evplan/grid/network.hpp"

namespace evplan::grid {

struct PowerFlowOptions {
  double tolerance_pu = 1e-6;
  int max_sweeps = 100;
  // Any bus magnitude below this is treated as voltage collapse.
  double collapse_pu = 0.2;
};

template <int P>
struct PowerFlowResult {
  std::vector<CVector<P>> v_pu;  // per bus (index bus - 1)
  std::vector<CVector<P>> i_a;   // per branch, receiving-end current flowing away from the slack
  double p_loss_kw = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_mismatch_pu = 0.0;

  double magnitude(BusId bus, int phase) const { return std::abs(v_pu[bus - 1](phase)); }

  // Mean phase magnitude at a bus.
  double mean_magnitude(BusId bus) const { return v_pu[bus - 1].cwiseAbs().mean(); }

  double min_magnitude() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : v_pu) m = std::min(m, v.cwiseAbs().minCoeff());
    return m;
  }
  double max_magnitude() const {
    double m = 0.0;
    for (const auto& v : v_pu) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
  }
};

// Forward/backward sweep on a radial feeder with constant-PQ loads. Never
// throws on divergence; inspect `converged`. `warm_start` (optional) seeds the
// bus voltages in p.u.
template <int P>
PowerFlowResult<P> sweep(const DistributionNetwork<P>& net, const LoadSet<P>& loads,
                         const PowerFlowOptions& opt = {},
                         const std::vector<CVector<P>>* warm_start = nullptr) {
  if (static_cast<int>(loads.size()) != net.bus_count())
    throw ValidationError("load set size " + std::to_string(loads.size()) + " does not match bus count " +
                          std::to_string(net.bus_count()));

  const double vbase = net.bases().v_base_ln_volts();
  const std::size_t nb = static_cast<std::size_t>(net.bus_count());
  const auto& branches = net.branches();

  std::vector<LineAbcd<P>> abcd;
  std::vector<CMatrix<P>> a_inv;
  abcd.reserve(branches.size());
  a_inv.reserve(branches.size());
  for (const auto& br : branches) {
    abcd.push_back(line_abcd(br));
    a_inv.push_back(abcd.back().a.inverse());
  }

  std::vector<CVector<P>> s_va(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    s_va[b] = (loads[b].p_kw.template cast<Complex>() + Complex(0, 1) * loads[b].q_kvar.template cast<Complex>()) *
              1000.0;
  }

  const CVector<P> v_slack = slack_phasors<P>(net.slack_voltage_pu() * vbase);
  std::vector<CVector<P>> v(nb, v_slack);
  if (warm_start && warm_start->size() == nb)
    for (std::size_t b = 0; b < nb; ++b) v[b] = (*warm_start)[b] * vbase;
  v[net.slack() - 1] = v_slack;

  std::vector<CVector<P>> i_recv(branches.size(), CVector<P>::Zero());
  std::vector<CVector<P>> i_send(branches.size(), CVector<P>::Zero());

  PowerFlowResult<P> res;
  const auto& order = net.order();
  for (int it = 1; it <= opt.max_sweeps; ++it) {
    // Backward: accumulate currents from the leaves toward the slack.
    for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
      BusId bus = *rit;
      int br = net.parent_branch(bus);
      if (br < 0) continue;
      CVector<P> i = (s_va[bus - 1].array() / v[bus - 1].array()).conjugate().matrix();
      for (int child : net.child_branches(bus)) i += i_send[child];
      i_recv[br] = i;
      i_send[br] = abcd[br].c * v[bus - 1] + abcd[br].d * i;
    }
    // Forward: propagate voltage drops away from the slack.
    double mismatch = 0.0;
    bool finite = true;
    for (BusId bus : order) {
      int br = net.parent_branch(bus);
      if (br < 0) continue;
      CVector<P> vn = a_inv[br] * (v[net.upstream(br) - 1] - abcd[br].b * i_recv[br]);
      mismatch = std::max(mismatch, (vn - v[bus - 1]).cwiseAbs().maxCoeff() / vbase);
      if (!vn.allFinite() || vn.cwiseAbs().minCoeff() < opt.collapse_pu * vbase) finite = false;
      v[bus - 1] = vn;
    }
    res.iterations = it;
    res.final_mismatch_pu = mismatch;
    if (!finite) break;
    if (mismatch <= opt.tolerance_pu) {
      res.converged = true;
      break;
    }
  }

  // Currents consistent with the final voltages.
  for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
    BusId bus = *rit;
    int br = net.parent_branch(bus);
    if (br < 0) continue;
    CVector<P> i = (s_va[bus - 1].array() / v[bus - 1].array()).conjugate().matrix();
    for (int child : net.child_branches(bus)) i += i_send[child];
    i_recv[br] = i;
    i_send[br] = abcd[br].c * v[bus - 1] + abcd[br].d * i;
  }

  double loss_w = 0.0;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const CVector<P>& vs = v[net.upstream(static_cast<int>(k)) - 1];
    const CVector<P>& vr = v[net.downstream(static_cast<int>(k)) - 1];
    loss_w += (vs.array() * i_send[k].conjugate().array() - vr.array() * i_recv[k].conjugate().array()).real().sum();
  }
  res.p_loss_kw = std::max(0.0, loss_w * 1e-3 * kPhaseMultiplicity<P>);
  res.v_pu.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) res.v_pu[b] = v[b] / vbase;
  res.i_a = std::move(i_recv);
  return res;
}

// Same as `sweep` but raises NotConverged instead of returning a flag.
template <int P>
PowerFlowResult<P> run_power_flow(const DistributionNetwork<P>& net, const LoadSet<P>& loads,
                                  const PowerFlowOptions& opt = {}) {
  auto res = sweep(net, loads, opt);
  if (!res.converged)
    throw NotConverged("power flow did not converge after " + std::to_string(res.iterations) +
                       " sweeps (mismatch " + std::to_string(res.final_mismatch_pu) + " p.u.)");
  return res;
}

}  // namespace evplan::grid

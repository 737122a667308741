#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "evplan/assessment/capacity_assessment.hpp"
#include "evplan/fcs/costs.hpp"
#include "evplan/transport/demand.hpp"

namespace evplan::fcs {

using grid::BusId;

struct GridViolation : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

struct FcsCandidate {
  BusId bus = 0;
  double hc_kw = 0.0;     // upper bound from the hosting-capacity assessment
  double s_lower_kw = 0.0;
};

struct FcsOptions {
  assessment::AssessmentLimits limits;  // voltage, current and EV power bounds
  double s_cap_kw = std::numeric_limits<double>::infinity();  // per-site unit cap
  double sigma = 1.0;                   // purchase-to-capacity ratio
  double period_h = 1.0;
  double feasibility_tol_kw = 1e-3;
};

// C_loss prices the loss the stations add over the base case.
struct CostLedger {
  double c_cons = 0.0;
  double c_om = 0.0;
  double c_loss = 0.0;
  double r_f = 0.0;
  double net() const { return c_cons + c_om + c_loss - r_f; }
};

struct FcsSite {
  BusId bus = 0;
  double s_lower_kw = 0.0;
  double s_upper_kw = 0.0;  // after grid-feasibility screening
  double s_kw = 0.0;
};

struct FcsSizingResult {
  std::vector<FcsSite> sites;
  CostLedger ledger;
  double min_voltage_pu = 0.0;
  double max_voltage_pu = 0.0;
  double max_current_ratio = 0.0;  // worst branch current over its limit
  double p_loss_kw = 0.0;       // with the stations
  double base_loss_kw = 0.0;    // without them
  std::vector<double> coverage_margin_kwh;  // per period, supply minus demand
  double total_kw() const {
    double s = 0.0;
    for (const auto& x : sites) s += x.s_kw;
    return s;
  }
};

namespace detail {

template <int P>
grid::LoadSet<P> with_stations(const grid::LoadSet<P>& base, const std::vector<FcsSite>& sites, double pf) {
  auto l = base;
  for (const auto& s : sites)
    if (s.s_kw > 0.0) l = assessment::with_ev_load(l, s.bus, s.s_kw, pf);
  return l;
}

template <int P>
bool grid_ok(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& loads, const FcsOptions& o) {
  const auto res = grid::sweep(net, loads);
  return assessment::check_operating_limits(net, res, o.limits, 0.0) == assessment::Binding::none;
}

}  // namespace detail

// Annual net cost of one site of capacity `s_kw` on top of `loads`. The loss
// term counts total feeder loss; the constant base-case share does not move
// the argmin.
template <int P>
double site_objective(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& loads, BusId bus, double s_kw,
                      const CostParams& p, double pf) {
  const auto res = grid::run_power_flow(net, assessment::with_ev_load(loads, bus, s_kw, pf));
  return construction_cost(s_kw, p) + om_cost(s_kw, p) + loss_cost_kw(res.p_loss_kw, p) - net_revenue(s_kw, p);
}

template <int P>
FcsSizingResult size_fcs(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& base_loads,
                         const std::vector<FcsCandidate>& candidates, const transport::DemandProfile& demand,
                         const std::vector<double>& mcs_supply_kwh, const CostParams& p, const FcsOptions& o = {}) {
  p.validate();
  o.limits.validate();
  if (candidates.empty()) throw ValidationError("no FCS candidates to size");
  const double pf = o.limits.effective_pf();
  const double tan_phi = pf > 0.0 ? std::tan(std::acos(pf)) : 0.0;
  auto mcs_at = [&](int t) { return t < static_cast<int>(mcs_supply_kwh.size()) ? mcs_supply_kwh[t] : 0.0; };

  // Supply coverage must be attainable at the upper bounds.
  double hc_sum = 0.0;
  for (const auto& c : candidates) hc_sum += std::min(c.hc_kw, o.s_cap_kw);
  for (int t = 0; t < demand.periods(); ++t)
    if (o.sigma * hc_sum * o.period_h + mcs_at(t) < demand.energy_demand_kwh(t) - 1e-9)
      throw InfeasibleError("period " + std::to_string(t + 1) + " demand of " +
                            std::to_string(demand.energy_demand_kwh(t)) +
                            " kWh exceeds the combined FCS and MCS supply");

  FcsSizingResult r;
  std::vector<FcsSite> placed;
  for (const auto& c : candidates) {
    if (c.s_lower_kw < 0.0) throw ValidationError("negative lower bound at bus " + std::to_string(c.bus));
    double hi = std::min({c.hc_kw, o.s_cap_kw, o.limits.p_ev_max_kw});
    if (std::isfinite(o.limits.q_ev_max_kvar) && tan_phi > 0.0) hi = std::min(hi, o.limits.q_ev_max_kvar / tan_phi);
    const double lo = std::max(c.s_lower_kw, o.limits.p_ev_min_kw);
    if (hi < lo)
      throw InfeasibleError("capacity bounds at bus " + std::to_string(c.bus) + " are empty: lower " +
                            std::to_string(lo) + " kW exceeds upper " + std::to_string(hi) + " kW");
    const auto loads = detail::with_stations(base_loads, placed, pf);
    auto feasible = [&](double s) { return detail::grid_ok(net, assessment::with_ev_load(loads, c.bus, s, pf), o); };
    if (!feasible(lo))
      throw GridViolation("bus " + std::to_string(c.bus) + " violates voltage or current limits at its lower bound " +
                          std::to_string(lo) + " kW");
    if (!feasible(hi)) {
      double a = lo, b = hi;
      while (b - a > o.feasibility_tol_kw) {
        const double m = 0.5 * (a + b);
        (feasible(m) ? a : b) = m;
      }
      hi = a;
    }
    auto f = [&](double s) { return site_objective(net, loads, c.bus, s, p, pf); };
    double best_s = lo, best_f = f(lo);
    if (hi > lo) {
      const double f_hi = f(hi);
      if (f_hi < best_f) best_s = hi, best_f = f_hi;
      const auto [s_in, f_in] = boost::math::tools::brent_find_minima(f, lo, hi, 40);
      if (f_in < best_f) best_s = s_in, best_f = f_in;
    }
    placed.push_back({c.bus, lo, hi, best_s});
  }

  // Raise capacities in candidate order until every period is covered.
  auto shortfall = [&]() {
    double total = 0.0, worst = 0.0;
    for (const auto& s : placed) total += s.s_kw;
    for (int t = 0; t < demand.periods(); ++t)
      worst = std::max(worst, demand.energy_demand_kwh(t) - mcs_at(t) - o.sigma * total * o.period_h);
    return worst;
  };
  for (double gap = shortfall(); gap > 1e-9; gap = shortfall()) {
    auto it = std::find_if(placed.begin(), placed.end(), [](const FcsSite& s) { return s.s_kw < s.s_upper_kw; });
    if (it == placed.end())
      throw InfeasibleError("charging demand cannot be covered within the grid-feasible FCS capacities");
    it->s_kw = std::min(it->s_upper_kw, it->s_kw + gap / (o.sigma * o.period_h));
  }

  const auto final_loads = detail::with_stations(base_loads, placed, pf);
  const auto res = grid::run_power_flow(net, final_loads);
  if (assessment::check_operating_limits(net, res, o.limits, 0.0) != assessment::Binding::none)
    throw GridViolation("combined FCS sizing violates voltage or current limits");

  r.sites = placed;
  for (const auto& s : placed) {
    r.ledger.c_cons += construction_cost(s.s_kw, p);
    r.ledger.c_om += om_cost(s.s_kw, p);
    r.ledger.r_f += net_revenue(s.s_kw, p);
  }
  r.p_loss_kw = res.p_loss_kw;
  r.base_loss_kw = grid::run_power_flow(net, base_loads).p_loss_kw;
  r.ledger.c_loss = loss_cost_kw(r.p_loss_kw - r.base_loss_kw, p);
  r.min_voltage_pu = res.min_magnitude();
  r.max_voltage_pu = res.max_magnitude();
  const auto& brs = net.branches();
  for (std::size_t k = 0; k < brs.size(); ++k)
    r.max_current_ratio = std::max(
        r.max_current_ratio, res.i_a[k].cwiseAbs().maxCoeff() / o.limits.i_max_a.value_or(brs[k].ampacity_a));
  const double total = r.total_kw();
  for (int t = 0; t < demand.periods(); ++t)
    r.coverage_margin_kwh.push_back(o.sigma * total * o.period_h + mcs_at(t) - demand.energy_demand_kwh(t));
  return r;
}

}  // namespace evplan::fcs

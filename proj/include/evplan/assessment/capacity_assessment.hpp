#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evplan/grid/power_flow.hpp"

namespace evplan::assessment {

using grid::BusId;

// Voltage lower limit that applies while the added EV load is at most `upto_kw`.
struct VoltageStage {
  double upto_kw;
  double v_min;
};

struct AssessmentLimits {
  double v_min = 0.90;
  double v_max = 1.10;
  std::vector<VoltageStage> v_min_stages;  // checked in order before falling back to v_min
  double gamma = 0.03;
  std::optional<double> i_max_a;  // overrides branch ampacity when set
  double p_ev_min_kw = 0.0;
  double p_ev_max_kw = std::numeric_limits<double>::infinity();
  double q_ev_min_kvar = -std::numeric_limits<double>::infinity();
  double q_ev_max_kvar = std::numeric_limits<double>::infinity();
  double pf = 0.95;  // lagging
  double pf_min = 0.0;
  double pf_max = 1.0;
  long n_ev_max = std::numeric_limits<long>::max();
  double step_kw = 5.0;
  double margin = 0.85;

  void validate() const {
    if (!(v_min < v_max)) throw ValidationError("assessment limits need v_min < v_max");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("unbalance bound gamma must lie in (0, 1)");
    if (!(margin > 0.0 && margin <= 1.0)) throw ValidationError("safety margin must lie in (0, 1]");
    if (!(step_kw > 0.0)) throw ValidationError("hosting-capacity step must be positive");
    if (!(pf_min <= pf_max)) throw ValidationError("power-factor bounds are inverted");
  }

  double v_min_at(double ev_kw) const {
    for (const auto& s : v_min_stages)
      if (ev_kw <= s.upto_kw) return s.v_min;
    return v_min;
  }

  double effective_pf() const { return std::clamp(pf, pf_min, pf_max); }
};

enum class Binding {
  none,
  voltage_low,
  voltage_high,
  unbalance,
  current,
  active_power,
  reactive_power,
  ev_count,
  not_converged,
};

inline const char* to_string(Binding b) {
  switch (b) {
    case Binding::none: return "none";
    case Binding::voltage_low: return "voltage_low";
    case Binding::voltage_high: return "voltage_high";
    case Binding::unbalance: return "unbalance";
    case Binding::current: return "current";
    case Binding::active_power: return "active_power";
    case Binding::reactive_power: return "reactive_power";
    case Binding::ev_count: return "ev_count";
    case Binding::not_converged: return "not_converged";
  }
  return "unknown";
}

struct NodeAssessment {
  BusId bus = 0;
  double vsf = 0.0;    // p.u. per kW
  double hc_kw = 0.0;  // after margin
  Binding binding = Binding::none;
};

struct BaseCaseInfeasible : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

// Largest relative deviation of a phase magnitude from the three-phase mean.
inline double unbalance(const std::array<double, 3>& mag) {
  const double avg = (mag[0] + mag[1] + mag[2]) / 3.0;
  double worst = 0.0;
  for (double m : mag) worst = std::max(worst, std::abs((m - avg) / avg));
  return worst;
}

template <int P>
double unbalance_at(const grid::PowerFlowResult<P>& res, BusId bus) {
  if constexpr (P == 3) {
    const auto& v = res.v_pu[bus - 1];
    return unbalance({std::abs(v(0)), std::abs(v(1)), std::abs(v(2))});
  } else {
    return 0.0;
  }
}

// First violated operating limit of a solved flow, given `ev_kw` of added EV load.
template <int P>
Binding check_operating_limits(const grid::DistributionNetwork<P>& net, const grid::PowerFlowResult<P>& res,
                               const AssessmentLimits& lim, double ev_kw) {
  if (!res.converged) return Binding::not_converged;
  const double vlo = lim.v_min_at(ev_kw);
  for (BusId b = 1; b <= net.bus_count(); ++b) {
    const auto mags = res.v_pu[b - 1].cwiseAbs();
    if (mags.minCoeff() < vlo) return Binding::voltage_low;
    if (mags.maxCoeff() > lim.v_max) return Binding::voltage_high;
  }
  for (BusId b = 1; b <= net.bus_count(); ++b)
    if (unbalance_at(res, b) > lim.gamma) return Binding::unbalance;
  const auto& brs = net.branches();
  for (std::size_t k = 0; k < brs.size(); ++k) {
    const double limit = lim.i_max_a.value_or(brs[k].ampacity_a);
    if (res.i_a[k].cwiseAbs().maxCoeff() > limit) return Binding::current;
  }
  return Binding::none;
}

// Adds a balanced EV load of `p_kw` at the configured power factor.
template <int P>
grid::LoadSet<P> with_ev_load(grid::LoadSet<P> loads, BusId bus, double p_kw, double pf) {
  const double q_kvar = p_kw * std::tan(std::acos(pf));
  auto& l = loads[bus - 1];
  l.p_kw.array() += p_kw / 3.0;
  l.q_kvar.array() += q_kvar / 3.0;
  return loads;
}

// |dV/dP| at `bus` by central difference of two tight power-flow solves, with
// V the mean phase magnitude and dp in kW of added active load.
template <int P>
double vsf(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& loads, BusId bus, double dp_kw = 0.01) {
  if (bus == net.slack()) return 0.0;
  const grid::PowerFlowOptions tight{1e-13, 1000};
  auto solve = [&](double dp) {
    auto l = loads;
    l[bus - 1].p_kw.array() += dp / 3.0;
    return grid::run_power_flow(net, l, tight).mean_magnitude(bus);
  };
  return std::abs((solve(dp_kw) - solve(-dp_kw)) / (2.0 * dp_kw));
}

template <int P>
NodeAssessment hosting_capacity(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& loads, BusId bus,
                                const AssessmentLimits& lim) {
  lim.validate();
  const auto base = grid::sweep(net, loads);
  if (Binding b = check_operating_limits(net, base, lim, 0.0); b != Binding::none)
    throw BaseCaseInfeasible("base case violates " + std::string(to_string(b)) + " before any EV load at bus " +
                             std::to_string(bus));

  const double pf = lim.effective_pf();
  const double tan_phi = std::tan(std::acos(pf));
  NodeAssessment out;
  out.bus = bus;
  std::vector<grid::CVector<P>> warm = base.v_pu;
  long feasible_steps = 0;
  for (long k = 1;; ++k) {
    const double p = static_cast<double>(k) * lim.step_kw;
    const double q = p * tan_phi;
    if (k > lim.n_ev_max) {
      out.binding = Binding::ev_count;
      break;
    }
    if (p > lim.p_ev_max_kw) {
      out.binding = Binding::active_power;
      break;
    }
    if (q > lim.q_ev_max_kvar || q < lim.q_ev_min_kvar) {
      out.binding = Binding::reactive_power;
      break;
    }
    auto res = grid::sweep(net, with_ev_load(loads, bus, p, pf), {}, &warm);
    if (Binding b = check_operating_limits(net, res, lim, p); b != Binding::none) {
      out.binding = b;
      break;
    }
    warm = std::move(res.v_pu);
    feasible_steps = k;
  }
  const double feasible_kw = static_cast<double>(feasible_steps) * lim.step_kw;
  out.hc_kw = feasible_kw < lim.p_ev_min_kw ? 0.0 : feasible_kw * lim.margin;
  return out;
}

// Hosting capacity and VSF for every non-slack bus.
template <int P>
std::vector<NodeAssessment> assess_all(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& loads,
                                       const AssessmentLimits& lim, double dp_kw = 0.01) {
  std::vector<NodeAssessment> out;
  for (BusId b = 1; b <= net.bus_count(); ++b) {
    if (b == net.slack()) continue;
    auto a = hosting_capacity(net, loads, b, lim);
    a.vsf = vsf(net, loads, b, dp_kw);
    out.push_back(a);
  }
  return out;
}

// Highest hosting capacity first; ties by lower VSF, then lower bus id.
inline std::vector<BusId> rank_candidates(std::vector<NodeAssessment> list, std::size_t k) {
  if (k > list.size())
    throw ValidationError("cannot rank " + std::to_string(k) + " candidates out of " + std::to_string(list.size()));
  std::sort(list.begin(), list.end(), [](const NodeAssessment& a, const NodeAssessment& b) {
    if (a.hc_kw != b.hc_kw) return a.hc_kw > b.hc_kw;
    if (a.vsf != b.vsf) return a.vsf < b.vsf;
    return a.bus < b.bus;
  });
  std::vector<BusId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(list[i].bus);
  return out;
}

}  // namespace evplan::assessment

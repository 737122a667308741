#pragma once

#include <cmath>

#include "evplan/errors.hpp"
#include "evplan/grid/power_flow.hpp"

namespace evplan::fcs {

struct CostParams {
  double h = 0.07;            // discount rate
  double eps = 10.0;          // depreciation years
  double c_base = 288000.0;   // $ per station
  double c_inve = 197.0;      // $/kW
  double c_om = 32.9;         // $/kW-yr
  double c_pb = 0.078;        // $/kWh bought from the grid
  double c_ps = 0.13;         // $/kWh sold to EVs
  double c_cs = 0.11;         // $/kWh service fee
  double c_bf = 69.8;         // $/kW-yr base-demand charge
  double r_xp = 0.13;         // electricity tax rate
  double r_xs = 0.06;         // service tax rate
  double t_om = 8.0 * 365.0;  // utilisation h/yr

  void validate() const {
    if (!(h > 0.0 && h < 1.0)) throw ValidationError("discount rate h must lie in (0, 1)");
    if (!(eps >= 1.0)) throw ValidationError("depreciation years eps must be at least 1");
    for (double v : {c_base, c_inve, c_om, c_pb, c_ps, c_cs, c_bf, r_xp, r_xs, t_om})
      if (!(v >= 0.0)) throw ValidationError("cost parameters must be non-negative");
  }

  double c_tax() const { return r_xp * (c_ps - c_pb) + r_xs * c_cs; }
};

inline double crf(double h, double eps) {
  const double g = std::pow(1.0 + h, eps);
  return h * g / (g - 1.0);
}

inline double construction_cost(double s_kw, const CostParams& p) {
  return crf(p.h, p.eps) * (p.c_base + p.c_inve * s_kw);
}

inline double om_cost(double s_kw, const CostParams& p) { return p.c_om * s_kw; }

inline double net_revenue(double s_kw, const CostParams& p) {
  return p.t_om * s_kw * (p.c_ps + p.c_cs - p.c_pb - p.c_tax()) - p.c_bf * s_kw;
}

inline double loss_cost_kw(double p_loss_kw, const CostParams& p) { return p.t_om * p.c_pb * p_loss_kw; }

template <int P>
double loss_cost(const grid::DistributionNetwork<P>& net, const grid::LoadSet<P>& loads, const CostParams& p) {
  return loss_cost_kw(grid::run_power_flow(net, loads).p_loss_kw, p);
}

}  // namespace evplan::fcs

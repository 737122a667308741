#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "evplan/errors.hpp"

namespace evplan::ems {

enum class Tou { valley, flat, peak };

inline const char* to_string(Tou t) {
  switch (t) {
    case Tou::valley: return "valley";
    case Tou::flat: return "flat";
    case Tou::peak: return "peak";
  }
  return "?";
}

inline Tou parse_tou(const std::string& s) {
  if (s == "valley") return Tou::valley;
  if (s == "flat") return Tou::flat;
  if (s == "peak") return Tou::peak;
  throw ValidationError("unknown time-of-use label '" + s + "'");
}

struct TouSchedule {
  std::array<Tou, 24> label{};
  std::array<double, 3> target_factor{1.0, 1.0, 1.0};  // grid schedule multiplier per label

  double factor(int hour) const { return target_factor[static_cast<std::size_t>(label[hour])]; }

  // Generic urban schedule: valley 23-7, peak 10-12 and 18-21, flat otherwise.
  static TouSchedule urban() {
    TouSchedule s;
    for (int h = 0; h < 24; ++h) {
      if (h >= 23 || h < 7) s.label[h] = Tou::valley;
      else if ((h >= 10 && h < 12) || (h >= 18 && h < 21)) s.label[h] = Tou::peak;
      else s.label[h] = Tou::flat;
    }
    return s;
  }
};

struct HourlyPower {
  double p_grid = 0.0;
  double p_pv = 0.0;
  double p_mcs = 0.0;
  double p_vg = 0.0;
  double p_ev = 0.0;
  double p_load = 0.0;
};

inline double net_power(const HourlyPower& h) {
  return h.p_grid + h.p_pv + h.p_mcs + h.p_vg - h.p_ev - h.p_load;
}

struct Mcs {
  double soc_kwh = 570.0;
  double capacity_kwh = 600.0;
  double limit_kw = 400.0;
};

struct EssParams {
  double capacity_kwh = 1000.0;
  double soc_min = 0.1;
  double soc_max = 0.9;
  double power_kw = 250.0;
  double round_trip = 0.95;
  double initial_soc = 0.5;
};

struct EmsParams {
  EssParams ess;
  double v2g_soc_min = 0.60;
  double v2g_soc_max = 0.95;
  double grid_import_cap_kw = std::numeric_limits<double>::infinity();
  bool mcs_recharge = true;

  void validate() const {
    if (!(ess.capacity_kwh >= 0.0 && ess.power_kw >= 0.0)) throw ValidationError("ESS size must be non-negative");
    if (!(0.0 <= ess.soc_min && ess.soc_min <= ess.initial_soc && ess.initial_soc <= ess.soc_max &&
          ess.soc_max <= 1.0))
      throw ValidationError("ESS state-of-charge bounds must satisfy 0 <= min <= initial <= max <= 1");
    if (!(ess.round_trip > 0.0 && ess.round_trip <= 1.0)) throw ValidationError("ESS efficiency must lie in (0, 1]");
    if (!(0.0 <= v2g_soc_min && v2g_soc_min < v2g_soc_max && v2g_soc_max <= 1.0))
      throw ValidationError("V2G state-of-charge window must satisfy 0 <= min < max <= 1");
  }
};

struct EmsState {
  int t = 0;
  double ess_soc_kwh = 500.0;
  std::vector<Mcs> fleet;
};

inline EmsState initial_state(const EmsParams& p, int n_mcs, double mcs_kwh = 600.0, double mcs_kw = 400.0) {
  EmsState s;
  s.ess_soc_kwh = p.ess.initial_soc * p.ess.capacity_kwh;
  s.fleet.assign(static_cast<std::size_t>(n_mcs), Mcs{p.v2g_soc_max * mcs_kwh, mcs_kwh, mcs_kw});
  return s;
}

// Inputs of one hour: demand side plus PV and EV-side V2G.
struct HourInput {
  double load_kw = 0.0;
  double pv_kw = 0.0;
  double ev_kw = 0.0;
  double vg_kw = 0.0;

  double demand_kw() const { return load_kw + ev_kw - pv_kw - vg_kw; }
};

struct DispatchRecord {
  int hour = 0;
  Tou tou = Tou::flat;
  HourlyPower power;           // p_grid is the actual import after dispatch
  double demand_kw = 0.0;      // grid import without the EMS
  double target_kw = 0.0;      // scheduled grid supply
  double net_kw = 0.0;         // power balance at the scheduled grid supply
  double ess_charge_kw = 0.0;  // drawn by the ESS
  double ess_discharge_kw = 0.0;
  double mcs_charge_kw = 0.0;
  int dispatched = 0;          // MCS units discharging this hour
  double ess_soc_kwh = 0.0;
  double mcs_energy_kwh = 0.0;
  double loss_kwh = 0.0;       // conversion loss in the ESS
  double balance_kwh = 0.0;    // supplied - consumed - stored - lost
};

struct InfeasibleHour : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

// One hour of dispatch against a scheduled grid supply of `target_kw`; grid
// import never exceeds `ceiling_kw` through charging.
inline DispatchRecord step(EmsState& s, const HourInput& in, Tou tou, double target_kw, double ceiling_kw,
                           const EmsParams& p) {
  const double eta = std::sqrt(p.ess.round_trip);
  const double lo = p.ess.soc_min * p.ess.capacity_kwh, hi = p.ess.soc_max * p.ess.capacity_kwh;
  DispatchRecord r;
  r.hour = s.t;
  r.tou = tou;
  r.demand_kw = in.demand_kw();
  r.target_kw = target_kw;
  r.power = {target_kw, in.pv_kw, 0.0, in.vg_kw, in.ev_kw, in.load_kw};
  r.net_kw = net_power(r.power);
  double before = s.ess_soc_kwh;
  for (const auto& m : s.fleet) before += m.soc_kwh;

  if (r.net_kw > 0.0) {
    double room = std::max(0.0, std::min(r.net_kw, ceiling_kw - r.demand_kw));
    r.ess_charge_kw = std::min({room, p.ess.power_kw, std::max(0.0, hi - s.ess_soc_kwh) / eta});
    s.ess_soc_kwh = std::min(hi, s.ess_soc_kwh + r.ess_charge_kw * eta);
    room -= r.ess_charge_kw;
    if (p.mcs_recharge) {
      std::vector<std::size_t> order(s.fleet.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.fleet[a].soc_kwh < s.fleet[b].soc_kwh; });
      for (std::size_t k : order) {
        if (room <= 0.0) break;
        auto& m = s.fleet[k];
        const double take = std::min({room, m.limit_kw, std::max(0.0, p.v2g_soc_max * m.capacity_kwh - m.soc_kwh)});
        m.soc_kwh += take;
        r.mcs_charge_kw += take;
        room -= take;
      }
    }
  } else if (r.net_kw < 0.0) {
    double deficit = -r.net_kw;
    r.ess_discharge_kw = std::min({deficit, p.ess.power_kw, std::max(0.0, s.ess_soc_kwh - lo) * eta});
    s.ess_soc_kwh = std::max(lo, s.ess_soc_kwh - r.ess_discharge_kw / eta);
    deficit -= r.ess_discharge_kw;
    std::vector<std::size_t> order(s.fleet.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.fleet[a].soc_kwh > s.fleet[b].soc_kwh; });
    for (std::size_t k : order) {
      if (deficit <= 0.0) break;
      auto& m = s.fleet[k];
      const double give = std::min({deficit, m.limit_kw, std::max(0.0, m.soc_kwh - p.v2g_soc_min * m.capacity_kwh)});
      if (give <= 0.0) continue;
      m.soc_kwh -= give;
      r.power.p_mcs += give;
      deficit -= give;
      ++r.dispatched;
    }
  }
  r.power.p_grid = r.demand_kw + r.ess_charge_kw + r.mcs_charge_kw - r.ess_discharge_kw - r.power.p_mcs;
  if (r.power.p_grid > p.grid_import_cap_kw + 1e-9)
    throw InfeasibleHour("hour " + std::to_string(s.t) + " needs " + std::to_string(r.power.p_grid) +
                         " kW from the grid, above the import cap of " + std::to_string(p.grid_import_cap_kw) + " kW");
  r.loss_kwh = r.ess_charge_kw * (1.0 - eta) + r.ess_discharge_kw * (1.0 / eta - 1.0);
  r.ess_soc_kwh = s.ess_soc_kwh;
  double after = s.ess_soc_kwh;
  for (const auto& m : s.fleet) after += m.soc_kwh;
  r.mcs_energy_kwh = after - s.ess_soc_kwh;
  const double supplied = r.power.p_grid + r.power.p_pv + r.power.p_vg;
  const double consumed = r.power.p_load + r.power.p_ev;
  r.balance_kwh = supplied - consumed - (after - before) - r.loss_kwh;
  ++s.t;
  return r;
}

struct DayMetrics {
  double peak_before_kw = 0.0;
  double peak_after_kw = 0.0;
  double peak_ratio = 1.0;  // after / before
  double v2g_energy_kwh = 0.0;
  double dispatchable_v2g_kwh = 0.0;
  double peak_excess_kwh = 0.0;
  std::optional<double> regulation_ratio;  // dispatchable V2G over peak-hour excess
  int max_dispatched = 0;
  int dispatch_hours = 0;
  double max_balance_residual_kwh = 0.0;
};

struct DayResult {
  std::vector<DispatchRecord> trajectory;
  DayMetrics metrics;
};

inline DayResult simulate_day(const std::vector<HourInput>& profile, const TouSchedule& tou, EmsState state,
                              const EmsParams& p) {
  p.validate();
  if (profile.size() != 24) throw ValidationError("EMS profile needs 24 hourly rows, got " +
                                                   std::to_string(profile.size()));
  for (const auto& h : profile)
    if (!(h.load_kw >= 0.0 && h.pv_kw >= 0.0 && h.ev_kw >= 0.0 && std::isfinite(h.vg_kw)))
      throw ValidationError("EMS profile powers must be finite and non-negative");
  DayResult out;
  auto& m = out.metrics;
  double total = 0.0;
  for (const auto& h : profile) {
    total += h.demand_kw();
    m.peak_before_kw = std::max(m.peak_before_kw, h.demand_kw());
  }
  const double mean = total / 24.0;
  for (const auto& f : state.fleet) m.dispatchable_v2g_kwh += std::max(0.0, f.soc_kwh - p.v2g_soc_min * f.capacity_kwh);
  state.t = 0;
  for (int h = 0; h < 24; ++h) {
    const double target = mean * tou.factor(h);
    auto r = step(state, profile[h], tou.label[h], target, m.peak_before_kw, p);
    m.peak_after_kw = std::max(m.peak_after_kw, r.power.p_grid);
    m.v2g_energy_kwh += r.power.p_mcs;
    if (tou.label[h] == Tou::peak) m.peak_excess_kwh += std::max(0.0, r.demand_kw - target);
    m.max_dispatched = std::max(m.max_dispatched, r.dispatched);
    if (r.dispatched > 0) ++m.dispatch_hours;
    m.max_balance_residual_kwh = std::max(m.max_balance_residual_kwh, std::abs(r.balance_kwh));
    out.trajectory.push_back(r);
  }
  m.peak_ratio = m.peak_before_kw > 0.0 ? m.peak_after_kw / m.peak_before_kw : 1.0;
  if (m.peak_excess_kwh > 0.0) m.regulation_ratio = m.dispatchable_v2g_kwh / m.peak_excess_kwh;
  return out;
}

}  // namespace evplan::ems

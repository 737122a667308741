#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evplan/io/csv.hpp"

namespace evplan::io {

using nlohmann::json;

struct AssessmentRow {
  int bus = 0;
  int node = 0;  // coupled transport node, 0 if none
  double hc_kw = 0.0;
  double vsf = 0.0;
  std::string binding;
  bool operator==(const AssessmentRow&) const = default;
};

struct AssessmentSection {
  std::vector<AssessmentRow> nodes;
  std::vector<int> top_k;       // buses by rank
  std::vector<int> candidates;  // highest-ranked coupled buses
  bool operator==(const AssessmentSection&) const = default;
};

struct PathsSection {
  std::vector<std::vector<double>> distance_km;
  bool operator==(const PathsSection&) const = default;
};

struct SitingPeriod {
  int period = 0;
  std::vector<int> open;
  std::vector<int> assigned;
  double objective = 0.0;
  bool operator==(const SitingPeriod&) const = default;
};

struct SitingSection {
  int fcs_node = 0;
  double objective = 0.0;
  std::vector<SitingPeriod> periods;
  bool operator==(const SitingSection&) const = default;
};

struct McsRow {
  int node = 0;
  double lambda = 0.0;
  int chargers = 0;
  int n_mcs = 0;
  double capacity_kw = 0.0;
  double p0 = 0.0;
  double lq = 0.0;
  double tw_h = 0.0;
  double operation_cost = 0.0;
  double waiting_cost = 0.0;
  bool operator==(const McsRow&) const = default;
};

struct McsSection {
  std::vector<McsRow> sites;
  int n_mcs = 0;
  double operation_cost = 0.0;
  double waiting_cost = 0.0;
  bool operator==(const McsSection&) const = default;
};

struct FcsRow {
  int bus = 0;
  double s_lower_kw = 0.0;
  double s_upper_kw = 0.0;
  double s_kw = 0.0;
  bool operator==(const FcsRow&) const = default;
};

struct FcsSection {
  std::vector<FcsRow> sites;
  double c_cons = 0.0;
  double c_om = 0.0;
  double c_loss = 0.0;
  double r_f = 0.0;
  double net_cost = 0.0;
  double min_voltage_pu = 0.0;
  double max_voltage_pu = 0.0;
  double max_current_ratio = 0.0;
  double p_loss_kw = 0.0;
  double base_loss_kw = 0.0;
  bool operator==(const FcsSection&) const = default;
};

struct AdmmRow {
  int k = 0;
  double r_prim = 0.0;
  double r_dual = 0.0;
  double rho = 0.0;
  bool operator==(const AdmmRow&) const = default;
};

struct AdmmSection {
  int fcs_node = 0;
  int fcs_bus = 0;
  bool converged = false;
  int iterations = 0;
  int best_iteration = 0;
  std::vector<int> open;
  std::vector<double> z_kw;
  std::vector<AdmmRow> history;
  bool operator==(const AdmmSection&) const = default;
};

struct EmsHour {
  int hour = 0;
  std::string tou;
  double demand_kw = 0.0;
  double target_kw = 0.0;
  double p_grid_kw = 0.0;
  double p_pv_kw = 0.0;
  double p_ev_kw = 0.0;
  double p_load_kw = 0.0;
  double p_vg_kw = 0.0;
  double p_mcs_kw = 0.0;
  double ess_charge_kw = 0.0;
  double ess_discharge_kw = 0.0;
  double mcs_charge_kw = 0.0;
  int dispatched = 0;
  double ess_soc_kwh = 0.0;
  double mcs_energy_kwh = 0.0;
  double balance_kwh = 0.0;
  bool operator==(const EmsHour&) const = default;
};

struct EmsSection {
  int n_mcs = 0;
  double peak_before_kw = 0.0;
  double peak_after_kw = 0.0;
  double peak_ratio = 1.0;
  double v2g_energy_kwh = 0.0;
  double dispatchable_v2g_kwh = 0.0;
  double peak_excess_kwh = 0.0;
  std::optional<double> regulation_ratio;
  int max_dispatched = 0;
  int dispatch_hours = 0;
  double max_balance_residual_kwh = 0.0;
  std::vector<EmsHour> hours;
  bool operator==(const EmsSection&) const = default;
};

struct McsPlacement {
  int node = 0;
  int n_mcs = 0;
  bool operator==(const McsPlacement&) const = default;
};

// One planning case per candidate FCS location.
struct CaseRow {
  int case_id = 0;
  int fcs_bus = 0;
  int fcs_node = 0;
  double fcs_kw = 0.0;
  std::vector<McsPlacement> mcs;
  int n_mcs = 0;
  double annual_net_revenue = 0.0;  // $/yr
  double mcs_operation_cost = 0.0;  // $/h
  double waiting_cost = 0.0;        // $/h
  double driving_distance_km = 0.0;
  bool converged = false;
  bool operator==(const CaseRow&) const = default;
};

// Flexible capacity per horizon: residual HC (long), plan (medium), EMS (short).
struct FlexibilityRow {
  int case_id = 0;
  int fcs_bus = 0;
  double hc_kw = 0.0;
  double capacity_potential_kw = 0.0;
  double fcs_kw = 0.0;
  double mcs_energy_kwh = 0.0;
  std::optional<double> regulation_ratio;
  bool operator==(const FlexibilityRow&) const = default;
};

struct ScenarioStation {
  int bus = 0;
  int node = 0;
  double s_kw = 0.0;
  double hc_kw = 0.0;
  bool operator==(const ScenarioStation&) const = default;
};

struct ScenarioRow {
  std::string scenario;
  double total_fixed_capacity_kw = 0.0;
  double basic_investment = 0.0;  // $
  double flexible_energy_kwh = 0.0;
  double expansion_potential_kw = 0.0;
  double driving_distance_km = 0.0;
  std::vector<ScenarioStation> stations;
  double min_voltage_pu = 0.0;
  bool operator==(const ScenarioRow&) const = default;
};

struct CompareSection {
  std::vector<CaseRow> cases;
  std::vector<FlexibilityRow> flexibility;
  std::vector<ScenarioRow> scenarios;
  bool operator==(const CompareSection&) const = default;
};

struct PlanReport {
  std::string case_name;
  std::uint64_t seed = 0;
  int phases = 3;
  std::optional<AssessmentSection> assessment;
  std::optional<PathsSection> paths;
  std::optional<SitingSection> siting;
  std::optional<McsSection> mcs;
  std::optional<FcsSection> fcs;
  std::optional<AdmmSection> admm;
  std::optional<EmsSection> ems;
  std::optional<CompareSection> compare;
  bool operator==(const PlanReport&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AssessmentRow, bus, node, hc_kw, vsf, binding)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AssessmentSection, nodes, top_k, candidates)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PathsSection, distance_km)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SitingPeriod, period, open, assigned, objective)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SitingSection, fcs_node, objective, periods)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(McsRow, node, lambda, chargers, n_mcs, capacity_kw, p0, lq, tw_h, operation_cost,
                                   waiting_cost)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(McsSection, sites, n_mcs, operation_cost, waiting_cost)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FcsRow, bus, s_lower_kw, s_upper_kw, s_kw)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FcsSection, sites, c_cons, c_om, c_loss, r_f, net_cost, min_voltage_pu,
                                   max_voltage_pu, max_current_ratio, p_loss_kw, base_loss_kw)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AdmmRow, k, r_prim, r_dual, rho)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AdmmSection, fcs_node, fcs_bus, converged, iterations, best_iteration, open, z_kw,
                                   history)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EmsHour, hour, tou, demand_kw, target_kw, p_grid_kw, p_pv_kw, p_ev_kw, p_load_kw,
                                   p_vg_kw, p_mcs_kw, ess_charge_kw, ess_discharge_kw, mcs_charge_kw, dispatched,
                                   ess_soc_kwh, mcs_energy_kwh, balance_kwh)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(McsPlacement, node, n_mcs)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CaseRow, case_id, fcs_bus, fcs_node, fcs_kw, mcs, n_mcs, annual_net_revenue,
                                   mcs_operation_cost, waiting_cost, driving_distance_km, converged)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScenarioStation, bus, node, s_kw, hc_kw)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScenarioRow, scenario, total_fixed_capacity_kw, basic_investment,
                                   flexible_energy_kwh, expansion_potential_kw, driving_distance_km, stations,
                                   min_voltage_pu)

namespace detail {

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class T>
void get_opt(const json& j, const char* key, std::optional<T>& v) {
  if (auto it = j.find(key); it != j.end()) v = it->template get<T>();
  else v.reset();
}

}  // namespace detail

inline void to_json(json& j, const EmsSection& s) {
  j = json{{"n_mcs", s.n_mcs},
           {"peak_before_kw", s.peak_before_kw},
           {"peak_after_kw", s.peak_after_kw},
           {"peak_ratio", s.peak_ratio},
           {"v2g_energy_kwh", s.v2g_energy_kwh},
           {"dispatchable_v2g_kwh", s.dispatchable_v2g_kwh},
           {"peak_excess_kwh", s.peak_excess_kwh},
           {"max_dispatched", s.max_dispatched},
           {"dispatch_hours", s.dispatch_hours},
           {"max_balance_residual_kwh", s.max_balance_residual_kwh},
           {"hours", s.hours}};
  detail::put_opt(j, "regulation_ratio", s.regulation_ratio);
}

inline void from_json(const json& j, EmsSection& s) {
  j.at("n_mcs").get_to(s.n_mcs);
  j.at("peak_before_kw").get_to(s.peak_before_kw);
  j.at("peak_after_kw").get_to(s.peak_after_kw);
  j.at("peak_ratio").get_to(s.peak_ratio);
  j.at("v2g_energy_kwh").get_to(s.v2g_energy_kwh);
  j.at("dispatchable_v2g_kwh").get_to(s.dispatchable_v2g_kwh);
  j.at("peak_excess_kwh").get_to(s.peak_excess_kwh);
  j.at("max_dispatched").get_to(s.max_dispatched);
  j.at("dispatch_hours").get_to(s.dispatch_hours);
  j.at("max_balance_residual_kwh").get_to(s.max_balance_residual_kwh);
  j.at("hours").get_to(s.hours);
  detail::get_opt(j, "regulation_ratio", s.regulation_ratio);
}

inline void to_json(json& j, const FlexibilityRow& r) {
  j = json{{"case_id", r.case_id},
           {"fcs_bus", r.fcs_bus},
           {"hc_kw", r.hc_kw},
           {"capacity_potential_kw", r.capacity_potential_kw},
           {"fcs_kw", r.fcs_kw},
           {"mcs_energy_kwh", r.mcs_energy_kwh}};
  detail::put_opt(j, "regulation_ratio", r.regulation_ratio);
}

inline void from_json(const json& j, FlexibilityRow& r) {
  j.at("case_id").get_to(r.case_id);
  j.at("fcs_bus").get_to(r.fcs_bus);
  j.at("hc_kw").get_to(r.hc_kw);
  j.at("capacity_potential_kw").get_to(r.capacity_potential_kw);
  j.at("fcs_kw").get_to(r.fcs_kw);
  j.at("mcs_energy_kwh").get_to(r.mcs_energy_kwh);
  detail::get_opt(j, "regulation_ratio", r.regulation_ratio);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CompareSection, cases, flexibility, scenarios)

inline void to_json(json& j, const PlanReport& r) {
  j = json{{"case", r.case_name}, {"seed", r.seed}, {"phases", r.phases}};
  detail::put_opt(j, "assessment", r.assessment);
  detail::put_opt(j, "paths", r.paths);
  detail::put_opt(j, "siting", r.siting);
  detail::put_opt(j, "mcs", r.mcs);
  detail::put_opt(j, "fcs", r.fcs);
  detail::put_opt(j, "admm", r.admm);
  detail::put_opt(j, "ems", r.ems);
  detail::put_opt(j, "compare", r.compare);
}

inline void from_json(const json& j, PlanReport& r) {
  j.at("case").get_to(r.case_name);
  j.at("seed").get_to(r.seed);
  j.at("phases").get_to(r.phases);
  detail::get_opt(j, "assessment", r.assessment);
  detail::get_opt(j, "paths", r.paths);
  detail::get_opt(j, "siting", r.siting);
  detail::get_opt(j, "mcs", r.mcs);
  detail::get_opt(j, "fcs", r.fcs);
  detail::get_opt(j, "admm", r.admm);
  detail::get_opt(j, "ems", r.ems);
  detail::get_opt(j, "compare", r.compare);
}

inline std::string to_json_text(const PlanReport& r) { return json(r).dump(2) + "\n"; }

inline PlanReport parse_report(const std::string& text) {
  try {
    return json::parse(text).get<PlanReport>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
}

// One CSV document per present section, keyed by file name.
inline std::map<std::string, std::string> to_csv(const PlanReport& r) {
  std::map<std::string, std::string> out;
  const auto f = fmt6;
  const auto i = [](auto v) { return std::to_string(v); };
  auto opt = [&](const std::optional<double>& v) { return v ? f(*v) : std::string(); };

  if (const auto& a = r.assessment) {
    CsvWriter w({"bus", "node", "hc_kW", "vsf_pu_per_kW", "binding", "rank", "candidate"});
    for (const auto& n : a->nodes) {
      std::string rank, cand;
      for (std::size_t k = 0; k < a->top_k.size(); ++k)
        if (a->top_k[k] == n.bus) rank = i(k + 1);
      for (std::size_t k = 0; k < a->candidates.size(); ++k)
        if (a->candidates[k] == n.bus) cand = i(k + 1);
      w.row({i(n.bus), n.node ? i(n.node) : "", f(n.hc_kw), f(n.vsf), n.binding, rank, cand});
    }
    out["assessment.csv"] = w.str();
  }
  if (const auto& p = r.paths) {
    CsvWriter w({"from", "to", "distance_km"});
    for (std::size_t a = 0; a < p->distance_km.size(); ++a)
      for (std::size_t b = 0; b < p->distance_km[a].size(); ++b) w.row({i(a + 1), i(b + 1), f(p->distance_km[a][b])});
    out["paths.csv"] = w.str();
  }
  if (const auto& s = r.siting) {
    CsvWriter w({"period", "node", "station", "open"});
    for (const auto& per : s->periods)
      for (std::size_t n = 0; n < per.assigned.size(); ++n) {
        const int node = static_cast<int>(n + 1);
        const bool open = std::find(per.open.begin(), per.open.end(), node) != per.open.end();
        w.row({i(per.period), i(node), i(per.assigned[n]), open ? "1" : "0"});
      }
    out["siting.csv"] = w.str();
  }
  if (const auto& m = r.mcs) {
    CsvWriter w({"node", "lambda_per_h", "chargers", "n_mcs", "capacity_kW", "p0", "lq", "tw_h", "operation_cost_per_h",
                 "waiting_cost_per_h"});
    for (const auto& s : m->sites)
      w.row({i(s.node), f(s.lambda), i(s.chargers), i(s.n_mcs), f(s.capacity_kw), f(s.p0), f(s.lq), f(s.tw_h),
             f(s.operation_cost), f(s.waiting_cost)});
    out["mcs.csv"] = w.str();
  }
  if (const auto& c = r.fcs) {
    CsvWriter w({"bus", "s_lower_kW", "s_upper_kW", "s_kW"});
    for (const auto& s : c->sites) w.row({i(s.bus), f(s.s_lower_kw), f(s.s_upper_kw), f(s.s_kw)});
    out["fcs.csv"] = w.str();
    CsvWriter l({"item", "value"});
    l.row({"c_cons_per_yr", f(c->c_cons)});
    l.row({"c_om_per_yr", f(c->c_om)});
    l.row({"c_loss_per_yr", f(c->c_loss)});
    l.row({"r_f_per_yr", f(c->r_f)});
    l.row({"net_cost_per_yr", f(c->net_cost)});
    l.row({"min_voltage_pu", f(c->min_voltage_pu)});
    l.row({"max_voltage_pu", f(c->max_voltage_pu)});
    l.row({"max_current_ratio", f(c->max_current_ratio)});
    l.row({"p_loss_kW", f(c->p_loss_kw)});
    l.row({"base_loss_kW", f(c->base_loss_kw)});
    out["fcs_ledger.csv"] = l.str();
  }
  if (const auto& a = r.admm) {
    CsvWriter w({"iteration", "r_prim", "r_dual", "rho"});
    for (const auto& h : a->history) w.row({i(h.k), f(h.r_prim), f(h.r_dual), f(h.rho)});
    out["admm.csv"] = w.str();
    CsvWriter z({"node", "open", "z_kW"});
    for (std::size_t n = 0; n < a->z_kw.size(); ++n) {
      const int node = static_cast<int>(n + 1);
      const bool open = std::find(a->open.begin(), a->open.end(), node) != a->open.end();
      z.row({i(node), open ? "1" : "0", f(a->z_kw[n])});
    }
    out["admm_capacity.csv"] = z.str();
  }
  if (const auto& e = r.ems) {
    CsvWriter w({"hour", "tou", "demand_kW", "target_kW", "p_grid_kW", "p_pv_kW", "p_ev_kW", "p_load_kW", "p_vg_kW",
                 "p_mcs_kW", "ess_charge_kW", "ess_discharge_kW", "mcs_charge_kW", "dispatched", "ess_soc_kWh",
                 "mcs_energy_kWh", "balance_kWh"});
    for (const auto& h : e->hours)
      w.row({i(h.hour), h.tou, f(h.demand_kw), f(h.target_kw), f(h.p_grid_kw), f(h.p_pv_kw), f(h.p_ev_kw),
             f(h.p_load_kw), f(h.p_vg_kw), f(h.p_mcs_kw), f(h.ess_charge_kw), f(h.ess_discharge_kw),
             f(h.mcs_charge_kw), i(h.dispatched), f(h.ess_soc_kwh), f(h.mcs_energy_kwh), f(h.balance_kwh)});
    out["ems.csv"] = w.str();
    CsvWriter m({"metric", "value"});
    m.row({"n_mcs", i(e->n_mcs)});
    m.row({"peak_before_kW", f(e->peak_before_kw)});
    m.row({"peak_after_kW", f(e->peak_after_kw)});
    m.row({"peak_ratio", f(e->peak_ratio)});
    m.row({"v2g_energy_kWh", f(e->v2g_energy_kwh)});
    m.row({"dispatchable_v2g_kWh", f(e->dispatchable_v2g_kwh)});
    m.row({"peak_excess_kWh", f(e->peak_excess_kwh)});
    m.row({"regulation_ratio", opt(e->regulation_ratio)});
    m.row({"max_dispatched", i(e->max_dispatched)});
    m.row({"dispatch_hours", i(e->dispatch_hours)});
    m.row({"max_balance_residual_kWh", f(e->max_balance_residual_kwh)});
    out["ems_metrics.csv"] = m.str();
  }
  if (const auto& c = r.compare) {
    CsvWriter w({"case", "fcs_bus", "fcs_node", "fcs_capacity_kW", "mcs_nodes", "n_mcs", "annual_net_revenue",
                 "mcs_operation_cost_per_h", "waiting_cost_per_h", "driving_distance_km", "converged"});
    for (const auto& k : c->cases) {
      std::string nodes;
      for (const auto& m : k.mcs) nodes += (nodes.empty() ? "" : " ") + i(m.node) + "(" + i(m.n_mcs) + ")";
      w.row({i(k.case_id), i(k.fcs_bus), i(k.fcs_node), f(k.fcs_kw), nodes, i(k.n_mcs), f(k.annual_net_revenue),
             f(k.mcs_operation_cost), f(k.waiting_cost), f(k.driving_distance_km), k.converged ? "1" : "0"});
    }
    out["compare_cases.csv"] = w.str();
    CsvWriter x({"case", "fcs_bus", "hc_kW", "capacity_potential_kW", "fcs_capacity_kW", "mcs_energy_kWh",
                 "regulation_ratio"});
    for (const auto& k : c->flexibility)
      x.row({i(k.case_id), i(k.fcs_bus), f(k.hc_kw), f(k.capacity_potential_kw), f(k.fcs_kw), f(k.mcs_energy_kwh),
             opt(k.regulation_ratio)});
    out["compare_flexibility.csv"] = x.str();
    CsvWriter s({"scenario", "total_fixed_capacity_kW", "basic_investment", "flexible_energy_kWh",
                 "capacity_expansion_potential_kW", "total_driving_distance_km"});
    CsvWriter st({"scenario", "bus", "node", "s_kW", "hc_kW"});
    for (const auto& k : c->scenarios) {
      s.row({k.scenario, f(k.total_fixed_capacity_kw), f(k.basic_investment), f(k.flexible_energy_kwh),
             f(k.expansion_potential_kw), f(k.driving_distance_km)});
      for (const auto& t : k.stations) st.row({k.scenario, i(t.bus), i(t.node), f(t.s_kw), f(t.hc_kw)});
    }
    out["compare_scenarios.csv"] = s.str();
    out["compare_stations.csv"] = st.str();
  }
  return out;
}

}  // namespace evplan::io

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evplan/admm/joint_planning.hpp"
#include "evplan/assessment/capacity_assessment.hpp"
#include "evplan/ems/simulator.hpp"
#include "evplan/io/case.hpp"
#include "evplan/io/report.hpp"

namespace evplan::io {

enum class Stage { assess, paths, site, size_mcs, size_fcs, plan, simulate, compare, report };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::assess: return "assess";
    case Stage::paths: return "paths";
    case Stage::site: return "site";
    case Stage::size_mcs: return "size-mcs";
    case Stage::size_fcs: return "size-fcs";
    case Stage::plan: return "plan";
    case Stage::simulate: return "simulate-ems";
    case Stage::compare: return "compare";
    case Stage::report: return "report";
  }
  return "unknown";
}

// Re-raises a module error with the stage name prefixed, keeping its kind.
template <class F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), stage + ": " + e.what());
  }
}

// Road distance summed over periods: every EV drives to its nearest station.
inline double driving_distance_km(const transport::DemandProfile& d, const transport::DistanceMatrix& dm,
                                  const std::vector<transport::NodeId>& stations) {
  double total = 0.0;
  for (int t = 0; t < d.periods(); ++t)
    for (int i = 1; i <= d.nodes(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (auto j : stations) best = std::min(best, dm(i, j));
      total += d.xi[t][i - 1] * best;
    }
  return total;
}

template <int P>
class Pipeline {
 public:
  explicit Pipeline(const CaseBundle<P>& b) : b_(b) {}

  const std::vector<assessment::NodeAssessment>& assessment() {
    if (!assess_)
      assess_ = in_stage("assess", [&] {
        return assessment::assess_all(b_.net, b_.loads, b_.params.limits, b_.params.vsf_dp_kw);
      });
    return *assess_;
  }

  double hc_at(grid::BusId bus) {
    for (const auto& a : assessment())
      if (a.bus == bus) return a.hc_kw;
    return 0.0;
  }

  // Coupled buses in ranking order, at most `cases`.
  std::vector<grid::BusId> candidates() {
    const auto& list = assessment();
    const auto ranked = assessment::rank_candidates(list, list.size());
    std::vector<grid::BusId> out;
    for (auto bus : ranked)
      if (b_.transport.node_for_bus(bus) && static_cast<int>(out.size()) < b_.params.compare.cases)
        out.push_back(bus);
    if (out.empty()) throw InfeasibleError("assess: no coupled bus can host an FCS");
    return out;
  }

  std::vector<double> mean_demand() const {
    std::vector<double> m(static_cast<std::size_t>(b_.demand.nodes()), 0.0);
    for (int t = 0; t < b_.demand.periods(); ++t)
      for (int i = 0; i < b_.demand.nodes(); ++i) m[i] += b_.demand.xi[t][i];
    for (double& v : m) v /= b_.demand.periods();
    return m;
  }

  siting::SitingInstance siting_instance(transport::NodeId fcs_node, bool average) const {
    const auto& p = b_.params;
    siting::SitingInstance s;
    s.dm = b_.dm;
    s.xi = average ? std::vector<std::vector<double>>{mean_demand()} : b_.demand.xi;
    s.c_tc = p.c_tc;
    s.v_avg_kmh = {p.v_aver_kmh};
    s.psi = p.psi;
    if (fcs_node) s.fixed_open = {fcs_node};
    s.r_s_km = p.r_s_km;
    s.d_ev_km = p.d_ev_km;
    s.varsigma = p.varsigma;
    return s;
  }

  admm::JointInputs<P> joint_inputs(grid::BusId bus) {
    const auto& p = b_.params;
    admm::JointInputs<P> in;
    in.net = &b_.net;
    in.base_loads = b_.loads;
    in.fcs_bus = bus;
    in.fcs_node = b_.transport.node_for_bus(bus);
    in.siting = siting_instance(in.fcs_node, true);
    in.demand = b_.demand;
    in.fcs_hc_kw = hc_at(bus);
    in.mcs_share = p.mcs_share;
    in.mcs = p.mcs;
    in.cost = p.cost;
    in.fcs_options.limits = p.limits;
    in.fcs_options.sigma = p.sigma;
    in.iota_tot_units = p.iota_tot_units;
    in.rule = p.rule;
    in.rho = p.rho;
    return in;
  }

  const admm::JointPlan& plan(grid::BusId bus) {
    auto it = plans_.find(bus);
    if (it == plans_.end())
      it = plans_.emplace(bus, in_stage("plan", [&] { return admm::plan_joint(joint_inputs(bus)); })).first;
    return it->second;
  }

  std::optional<ems::DayResult> simulate(int n_mcs) {
    if (b_.ems_profile.empty()) return std::nullopt;
    const auto& p = b_.params;
    return in_stage("simulate-ems", [&] {
      return ems::simulate_day(b_.ems_profile, p.tou,
                               ems::initial_state(p.ems, n_mcs, p.mcs_battery_kwh,
                                                  p.mcs.chargers_per_mcs * p.mcs.charger_kw),
                               p.ems);
    });
  }

  AssessmentSection assessment_section() {
    AssessmentSection s;
    for (const auto& a : assessment())
      s.nodes.push_back({a.bus, b_.transport.node_for_bus(a.bus), a.hc_kw, a.vsf, assessment::to_string(a.binding)});
    const int k = std::min<int>(b_.params.rank_k, static_cast<int>(assessment().size()));
    s.top_k = assessment::rank_candidates(assessment(), static_cast<std::size_t>(k));
    s.candidates = candidates();
    return s;
  }

  PathsSection paths_section() const {
    PathsSection s;
    const auto& m = b_.dm.matrix();
    s.distance_km.assign(static_cast<std::size_t>(m.rows()), {});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) s.distance_km[i].push_back(m(i, j));
    return s;
  }

  SitingSection siting_section() {
    const auto node = b_.transport.node_for_bus(candidates().front());
    const auto dec = in_stage("site", [&] { return siting::solve_siting(siting_instance(node, false)); });
    SitingSection s;
    s.fcs_node = node;
    s.objective = dec.objective;
    for (std::size_t t = 0; t < dec.open.size(); ++t) {
      double obj = 0.0;
      for (double c : dec.node_cost[t]) obj += c;
      s.periods.push_back({static_cast<int>(t + 1), dec.open[t], dec.assigned[t], obj});
    }
    return s;
  }

  // Capacity block on the plain siting of the top candidate.
  admm::CapacityPlan sized_capacity(const char* stage) {
    const auto in = joint_inputs(candidates().front());
    return in_stage(stage, [&] {
      const auto dec = siting::solve_siting(in.siting);
      return admm::update_capacity(admm::to_siting(dec.open.front(), in.siting.nodes()), in);
    });
  }

  McsSection mcs_section_standalone() {
    const auto cap = sized_capacity("size-mcs");
    std::vector<std::pair<transport::NodeId, double>> sites;
    for (const auto& [node, chargers] : cap.chargers) sites.emplace_back(node, cap.lambda.at(node));
    return mcs_section(in_stage("size-mcs", [&] { return mcs::size_mcs(sites, b_.params.mcs); }));
  }

  FcsSection fcs_section_standalone() { return fcs_section(sized_capacity("size-fcs").fcs); }

  static McsSection mcs_section(const mcs::McsSizingResult& r) {
    McsSection s;
    for (const auto& x : r.sites)
      s.sites.push_back({x.site.node, x.site.lambda, x.site.chargers, x.n_mcs, x.capacity_kw, x.q.p0, x.q.lq, x.q.tw,
                         x.operation_cost, x.waiting_cost});
    s.n_mcs = r.n_mcs;
    s.operation_cost = r.operation_cost;
    s.waiting_cost = r.waiting_cost;
    return s;
  }

  static FcsSection fcs_section(const fcs::FcsSizingResult& r) {
    FcsSection s;
    for (const auto& x : r.sites) s.sites.push_back({x.bus, x.s_lower_kw, x.s_upper_kw, x.s_kw});
    s.c_cons = r.ledger.c_cons;
    s.c_om = r.ledger.c_om;
    s.c_loss = r.ledger.c_loss;
    s.r_f = r.ledger.r_f;
    s.net_cost = r.ledger.net();
    s.min_voltage_pu = r.min_voltage_pu;
    s.max_voltage_pu = r.max_voltage_pu;
    s.max_current_ratio = r.max_current_ratio;
    s.p_loss_kw = r.p_loss_kw;
    s.base_loss_kw = r.base_loss_kw;
    return s;
  }

  static AdmmSection admm_section(const admm::JointPlan& jp) {
    AdmmSection s;
    s.fcs_node = jp.fcs_node;
    s.fcs_bus = jp.fcs_bus;
    s.converged = jp.admm.converged;
    s.iterations = static_cast<int>(jp.admm.state.history.size());
    s.best_iteration = jp.admm.best_iteration;
    s.open = jp.capacity.open;
    s.z_kw.assign(jp.capacity.z.data(), jp.capacity.z.data() + jp.capacity.z.size());
    for (std::size_t k = 0; k < jp.admm.state.history.size(); ++k) {
      const auto& h = jp.admm.state.history[k];
      s.history.push_back({static_cast<int>(k + 1), h.r_prim, h.r_dual, h.rho});
    }
    return s;
  }

  static EmsSection ems_section(const ems::DayResult& d, int n_mcs) {
    EmsSection s;
    const auto& m = d.metrics;
    s.n_mcs = n_mcs;
    s.peak_before_kw = m.peak_before_kw;
    s.peak_after_kw = m.peak_after_kw;
    s.peak_ratio = m.peak_ratio;
    s.v2g_energy_kwh = m.v2g_energy_kwh;
    s.dispatchable_v2g_kwh = m.dispatchable_v2g_kwh;
    s.peak_excess_kwh = m.peak_excess_kwh;
    s.regulation_ratio = m.regulation_ratio;
    s.max_dispatched = m.max_dispatched;
    s.dispatch_hours = m.dispatch_hours;
    s.max_balance_residual_kwh = m.max_balance_residual_kwh;
    for (const auto& r : d.trajectory)
      s.hours.push_back({r.hour, ems::to_string(r.tou), r.demand_kw, r.target_kw, r.power.p_grid, r.power.p_pv,
                         r.power.p_ev, r.power.p_load, r.power.p_vg, r.power.p_mcs, r.ess_charge_kw,
                         r.ess_discharge_kw, r.mcs_charge_kw, r.dispatched, r.ess_soc_kwh, r.mcs_energy_kwh,
                         r.balance_kwh});
    return s;
  }

  CompareSection compare_section() {
    const auto& p = b_.params;
    CompareSection out;
    const auto cands = candidates();
    int best = 0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const auto& jp = plan(cands[c]);
      const double fcs_kw = jp.capacity.fcs.total_kw();
      CaseRow row;
      row.case_id = static_cast<int>(c + 1);
      row.fcs_bus = jp.fcs_bus;
      row.fcs_node = jp.fcs_node;
      row.fcs_kw = fcs_kw;
      for (const auto& s : jp.mcs.sites) row.mcs.push_back({s.site.node, s.n_mcs});
      row.n_mcs = jp.mcs.n_mcs;
      row.annual_net_revenue = -jp.capacity.fcs.ledger.net();
      row.mcs_operation_cost = jp.mcs.operation_cost;
      row.waiting_cost = jp.mcs.waiting_cost;
      row.driving_distance_km = driving_distance_km(b_.demand, b_.dm, jp.capacity.open);
      row.converged = jp.admm.converged;
      out.cases.push_back(row);

      FlexibilityRow flex;
      flex.case_id = row.case_id;
      flex.fcs_bus = row.fcs_bus;
      flex.hc_kw = hc_at(row.fcs_bus);
      flex.capacity_potential_kw = flex.hc_kw - fcs_kw;
      flex.fcs_kw = fcs_kw;
      flex.mcs_energy_kwh = row.n_mcs * p.mcs_battery_kwh;
      if (auto day = simulate(row.n_mcs)) flex.regulation_ratio = day->metrics.regulation_ratio;
      out.flexibility.push_back(flex);
      if (row.annual_net_revenue > out.cases[best].annual_net_revenue) best = static_cast<int>(c);
    }

    const auto& joint = plan(cands[best]);
    const double target = joint.capacity.fcs.total_kw();
    ScenarioRow j;
    j.scenario = "joint";
    j.total_fixed_capacity_kw = target;
    j.basic_investment = p.cost.c_base + p.cost.c_inve * target;
    j.flexible_energy_kwh = joint.mcs.n_mcs * p.mcs_battery_kwh;
    j.stations.push_back({joint.fcs_bus, joint.fcs_node, target, hc_at(joint.fcs_bus)});
    j.expansion_potential_kw = hc_at(joint.fcs_bus) - target;
    j.driving_distance_km = out.cases[best].driving_distance_km;
    j.min_voltage_pu = joint.capacity.fcs.min_voltage_pu;
    out.scenarios.push_back(j);
    out.scenarios.push_back(in_stage("compare", [&] { return scenario_p_median(target); }));
    out.scenarios.push_back(in_stage("compare", [&] { return scenario_hc(target, cands); }));
    return out;
  }

  // Scenario 1: p-median sites over the coupling nodes, grown in equal steps.
  ScenarioRow scenario_p_median(double target_kw) {
    const auto& p = b_.params;
    auto inst = siting_instance(0, true);
    inst.coverage_limit = false;
    inst.spacing_check = false;
    for (const auto& [node, bus] : b_.transport.coupling) inst.candidates.push_back(node);
    const auto open = siting::solve_siting(inst).open.front();

    auto lim = p.limits;
    lim.v_min_stages = {{p.compare.v_min_low_upto_kw, p.compare.v_min_low}};
    const double pf = lim.effective_pf();
    std::vector<double> s(open.size(), 0.0);
    std::vector<char> active(open.size(), 1);
    auto total = [&] {
      double t = 0.0;
      for (double v : s) t += v;
      return t;
    };
    auto loads_for = [&](const std::vector<double>& sizes) {
      auto l = b_.loads;
      for (std::size_t k = 0; k < open.size(); ++k)
        if (sizes[k] > 0.0) l = assessment::with_ev_load(l, b_.transport.coupling.at(open[k]), sizes[k], pf);
      return l;
    };
    while (total() < target_kw && std::find(active.begin(), active.end(), 1) != active.end()) {
      for (std::size_t k = 0; k < open.size(); ++k) {
        if (!active[k]) continue;
        auto trial = s;
        trial[k] += p.compare.step_kw;
        const auto res = grid::sweep(b_.net, loads_for(trial));
        if (assessment::check_operating_limits(b_.net, res, lim, trial[k]) != assessment::Binding::none)
          active[k] = 0;
        else
          s = std::move(trial);
      }
    }
    std::vector<grid::BusId> buses;
    for (auto node : open) buses.push_back(b_.transport.coupling.at(node));
    return scenario_row("p-median", buses, open, s);
  }

  // Scenario 2: the highest-HC coupled buses, equal rounded capacities.
  ScenarioRow scenario_hc(double target_kw, const std::vector<grid::BusId>& buses) {
    const auto& c = b_.params.compare;
    const double each = std::ceil(target_kw / buses.size() / c.round_kw) * c.round_kw;
    std::vector<transport::NodeId> nodes;
    for (auto bus : buses) nodes.push_back(b_.transport.node_for_bus(bus));
    return scenario_row("hosting-capacity", buses, nodes, std::vector<double>(buses.size(), each));
  }

  ScenarioRow scenario_row(const std::string& name, const std::vector<grid::BusId>& buses,
                           const std::vector<transport::NodeId>& nodes, const std::vector<double>& sizes) {
    const auto& p = b_.params;
    ScenarioRow r;
    r.scenario = name;
    auto loads = b_.loads;
    for (std::size_t k = 0; k < buses.size(); ++k) {
      const double hc = hc_at(buses[k]);
      r.stations.push_back({buses[k], nodes[k], sizes[k], hc});
      r.total_fixed_capacity_kw += sizes[k];
      r.expansion_potential_kw += hc - sizes[k];
      if (sizes[k] > 0.0) loads = assessment::with_ev_load(loads, buses[k], sizes[k], p.limits.effective_pf());
    }
    r.basic_investment = buses.size() * p.cost.c_base + p.cost.c_inve * r.total_fixed_capacity_kw;
    r.driving_distance_km = driving_distance_km(b_.demand, b_.dm, nodes);
    const auto res = grid::sweep(b_.net, loads);
    r.min_voltage_pu = res.converged ? res.min_magnitude() : 0.0;
    return r;
  }

  PlanReport run(Stage stage) {
    PlanReport r;
    r.case_name = b_.name;
    r.seed = b_.params.seed;
    r.phases = P;
    auto plan_sections = [&] {
      const auto& jp = plan(candidates().front());
      r.siting = siting_section_from(jp);
      r.mcs = mcs_section(jp.mcs);
      r.fcs = fcs_section(jp.capacity.fcs);
      r.admm = admm_section(jp);
      return &jp;
    };
    switch (stage) {
      case Stage::assess: r.assessment = assessment_section(); break;
      case Stage::paths: r.paths = paths_section(); break;
      case Stage::site: r.siting = siting_section(); break;
      case Stage::size_mcs: r.mcs = mcs_section_standalone(); break;
      case Stage::size_fcs: r.fcs = fcs_section_standalone(); break;
      case Stage::plan: plan_sections(); break;
      case Stage::simulate: {
        const auto* jp = plan_sections();
        const auto day = simulate(jp->mcs.n_mcs);
        if (!day) throw ValidationError("simulate-ems: case " + b_.name + " has no EMS profile");
        r.ems = ems_section(*day, jp->mcs.n_mcs);
        break;
      }
      case Stage::compare: r.compare = compare_section(); break;
      case Stage::report: {
        r.assessment = assessment_section();
        r.paths = paths_section();
        const auto* jp = plan_sections();
        if (auto day = simulate(jp->mcs.n_mcs)) r.ems = ems_section(*day, jp->mcs.n_mcs);
        r.compare = compare_section();
        break;
      }
    }
    return r;
  }

 private:
  SitingSection siting_section_from(const admm::JointPlan& jp) const {
    SitingSection s;
    s.fcs_node = jp.fcs_node;
    s.objective = jp.siting.objective;
    s.periods.push_back({1, jp.siting.open.front(), jp.siting.assigned.front(), jp.siting.objective});
    return s;
  }

  const CaseBundle<P>& b_;
  std::optional<std::vector<assessment::NodeAssessment>> assess_;
  std::map<grid::BusId, admm::JointPlan> plans_;
};

template <int P>
PlanReport run_pipeline(const CaseBundle<P>& b, Stage stage) {
  return Pipeline<P>(b).run(stage);
}

}  // namespace evplan::io

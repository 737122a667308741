#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "evplan/admm/coordinator.hpp"
#include "evplan/assessment/capacity_assessment.hpp"
#include "evplan/ems/simulator.hpp"
#include "evplan/fcs/costs.hpp"
#include "evplan/io/csv.hpp"
#include "evplan/mcs/mcs_sizing.hpp"
#include "evplan/transport/demand.hpp"

namespace evplan::io {

// Symbols of the case-study parameter table; each must be present in a case config.
inline const std::vector<std::string>& table_symbols() {
  static const std::vector<std::string> s{
      "grid.I_mn_max_A",     "grid.phi_EV",          "grid.gamma",         "grid.V_f_min_pu",
      "grid.V_f_max_pu",     "transport.v_aver_kmh", "transport.psi",      "transport.R_s_km",
      "transport.d_EV_km",   "transport.varsigma",   "transport.c_tc_per_h", "mcs.T_w_max_h",
      "mcs.mu_per_h",        "mcs.iota_min",         "mcs.iota_max",       "mcs.c_mo_per_h",
      "mcs.C_mo_max_per_h",  "fcs.C_base",           "fcs.C_inve_per_kW",  "fcs.C_land_per_kW",
      "fcs.c_om_per_kW",     "fcs.r",                "fcs.n",              "fcs.t_om_h_per_day",
      "fcs.c_pb",            "fcs.c_ps",             "fcs.c_cs",           "fcs.c_bf"};
  return s;
}

struct CompareParams {
  double step_kw = 25.0;
  double v_min_low = 0.905;
  double v_min_low_upto_kw = 100.0;
  double round_kw = 100.0;
  int cases = 3;
};

struct Params {
  int phases = 3;
  grid::Bases bases;
  assessment::AssessmentLimits limits;
  double vsf_dp_kw = 0.01;
  int rank_k = 5;

  double unit_km = 10.0;
  double v_aver_kmh = 40.0;
  double c_tc = 8.15;
  int psi = 5;
  double r_s_km = 10.0;
  double d_ev_km = 100.0;
  double varsigma = 0.3;

  std::uint64_t seed = 42;
  int periods = 24;
  transport::DemandGenerator demand;
  double mcs_share = 0.2;

  mcs::McsParams mcs;
  double iota_tot_units = 100.0;
  double mcs_battery_kwh = 600.0;

  fcs::CostParams cost;
  double c_land = 0.014;
  double sigma = 1.0;

  admm::StoppingRule rule;
  double rho = 1.0;

  ems::EmsParams ems;
  ems::TouSchedule tou = ems::TouSchedule::urban();

  CompareParams compare;
};

namespace detail {

inline double parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  auto one = [&](const std::string& t) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
      throw ParseError("config key '" + key + "' is not a number: '" + raw + "'");
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return one(s);
  const double den = one(trim(s.substr(slash + 1)));
  if (den == 0.0) throw ParseError("config key '" + key + "' divides by zero");
  return one(trim(s.substr(0, slash))) / den;
}

class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree& pt) : pt_(pt) {}

  template <class T>
  void get(const std::string& key, T& out) const {
    const auto v = pt_.get_optional<std::string>(key);
    if (!v) return;
    if constexpr (std::is_same_v<T, bool>) {
      const std::string s = trim(*v);
      if (s == "true" || s == "1") out = true;
      else if (s == "false" || s == "0") out = false;
      else throw ParseError("config key '" + key + "' is not a boolean: '" + *v + "'");
    } else if constexpr (std::is_integral_v<T>) {
      const double d = parse_number(key, *v);
      if (d != std::floor(d)) throw ParseError("config key '" + key + "' must be an integer");
      out = static_cast<T>(d);
    } else {
      out = parse_number(key, *v);
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto v = pt_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

 private:
  const boost::property_tree::ptree& pt_;
};

}  // namespace detail

inline Params parse_params(std::istream& in, const std::string& name = "config") {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& sym : table_symbols())
    if (!pt.get_optional<std::string>(sym)) throw ValidationError(name + ": missing parameter " + sym);

  const detail::Reader r(pt);
  Params p;
  r.get("grid.phases", p.phases);
  if (p.phases != 1 && p.phases != 3) throw ValidationError("grid.phases must be 1 or 3");
  r.get("grid.V_base_kV", p.bases.v_base_kv_ll);
  r.get("grid.S_base_MVA", p.bases.s_base_mva);
  double i_max = 0.0;
  r.get("grid.I_mn_max_A", i_max);
  p.limits.i_max_a = i_max;
  r.get("grid.phi_EV", p.limits.pf);
  r.get("grid.gamma", p.limits.gamma);
  r.get("grid.V_f_min_pu", p.limits.v_min);
  r.get("grid.V_f_max_pu", p.limits.v_max);
  r.get("grid.hc_step_kW", p.limits.step_kw);
  r.get("grid.hc_margin", p.limits.margin);
  r.get("grid.vsf_dP_kW", p.vsf_dp_kw);
  r.get("grid.rank_k", p.rank_k);
  p.limits.validate();

  r.get("transport.unit_km", p.unit_km);
  r.get("transport.v_aver_kmh", p.v_aver_kmh);
  r.get("transport.c_tc_per_h", p.c_tc);
  r.get("transport.psi", p.psi);
  r.get("transport.R_s_km", p.r_s_km);
  r.get("transport.d_EV_km", p.d_ev_km);
  r.get("transport.varsigma", p.varsigma);
  if (p.psi < 1) throw ValidationError("transport.psi must be at least 1");

  r.get("demand.seed", p.seed);
  r.get("demand.periods", p.periods);
  r.get("demand.intensity_per_h", p.demand.intensity);
  r.get("demand.battery_kWh", p.demand.battery_kwh);
  r.get("demand.soc_arr_min", p.demand.soc_arr_lo);
  r.get("demand.soc_arr_max", p.demand.soc_arr_hi);
  r.get("demand.soc_dep_min", p.demand.soc_dep_lo);
  r.get("demand.soc_dep_max", p.demand.soc_dep_hi);
  r.get("demand.mcs_share", p.mcs_share);
  if (p.periods < 1) throw ValidationError("demand.periods must be at least 1");
  if (!(p.mcs_share >= 0.0 && p.mcs_share <= 1.0)) throw ValidationError("demand.mcs_share must lie in [0, 1]");

  r.get("mcs.mu_per_h", p.mcs.mu);
  r.get("mcs.T_w_max_h", p.mcs.tw_limit_h);
  r.get("mcs.c_mo_per_h", p.mcs.c_mo_unit);
  r.get("mcs.C_mo_max_per_h", p.mcs.c_mo_budget);
  r.get("mcs.iota_min", p.mcs.bounds.iota_min);
  r.get("mcs.iota_max", p.mcs.bounds.iota_max);
  r.get("mcs.unit_kW", p.mcs.bounds.unit_kw);
  r.get("mcs.iota_tot", p.iota_tot_units);
  r.get("mcs.chargers_per_mcs", p.mcs.chargers_per_mcs);
  r.get("mcs.battery_kWh", p.mcs_battery_kwh);
  p.mcs.charger_kw = p.mcs.bounds.unit_kw;
  p.mcs.c_tc = p.c_tc;
  if (!(p.mcs.mu > 0.0 && p.mcs.tw_limit_h > 0.0)) throw ValidationError("mcs.mu_per_h and mcs.T_w_max_h must be positive");
  if (p.mcs.chargers_per_mcs < 1) throw ValidationError("mcs.chargers_per_mcs must be at least 1");

  r.get("fcs.r", p.cost.h);
  r.get("fcs.n", p.cost.eps);
  r.get("fcs.C_base", p.cost.c_base);
  r.get("fcs.C_inve_per_kW", p.cost.c_inve);
  r.get("fcs.C_land_per_kW", p.c_land);
  r.get("fcs.c_om_per_kW", p.cost.c_om);
  double hours_per_day = 8.0;
  r.get("fcs.t_om_h_per_day", hours_per_day);
  p.cost.t_om = hours_per_day * 365.0;
  r.get("fcs.c_pb", p.cost.c_pb);
  r.get("fcs.c_ps", p.cost.c_ps);
  r.get("fcs.c_cs", p.cost.c_cs);
  r.get("fcs.c_bf", p.cost.c_bf);
  r.get("fcs.R_xp", p.cost.r_xp);
  r.get("fcs.R_xs", p.cost.r_xs);
  r.get("fcs.sigma", p.sigma);
  p.cost.validate();
  if (!(p.sigma > 0.0)) throw ValidationError("fcs.sigma must be positive");

  r.get("admm.eps_prim", p.rule.eps_prim);
  r.get("admm.eps_dual", p.rule.eps_dual);
  r.get("admm.max_iter", p.rule.max_iter);
  r.get("admm.balance_rho", p.rule.balance_rho);
  r.get("admm.rho", p.rho);
  p.rule.validate();

  r.get("ems.ess_capacity_kWh", p.ems.ess.capacity_kwh);
  r.get("ems.ess_power_kW", p.ems.ess.power_kw);
  r.get("ems.ess_soc_min", p.ems.ess.soc_min);
  r.get("ems.ess_soc_max", p.ems.ess.soc_max);
  r.get("ems.ess_soc_init", p.ems.ess.initial_soc);
  r.get("ems.ess_round_trip", p.ems.ess.round_trip);
  r.get("ems.v2g_soc_min", p.ems.v2g_soc_min);
  r.get("ems.v2g_soc_max", p.ems.v2g_soc_max);
  r.get("ems.grid_import_cap_kW", p.ems.grid_import_cap_kw);
  r.get("ems.mcs_recharge", p.ems.mcs_recharge);
  r.get("ems.target_factor_valley", p.tou.target_factor[0]);
  r.get("ems.target_factor_flat", p.tou.target_factor[1]);
  r.get("ems.target_factor_peak", p.tou.target_factor[2]);
  if (const auto labels = r.text("ems.tou")) {
    std::stringstream ss(*labels);
    std::string tok;
    int h = 0;
    while (std::getline(ss, tok, ',')) {
      if (h >= 24) throw ValidationError("ems.tou lists more than 24 hours");
      p.tou.label[static_cast<std::size_t>(h++)] = ems::parse_tou(trim(tok));
    }
    if (h != 24) throw ValidationError("ems.tou must list 24 hourly labels, got " + std::to_string(h));
  }
  p.ems.validate();

  r.get("compare.step_kW", p.compare.step_kw);
  r.get("compare.v_min_low", p.compare.v_min_low);
  r.get("compare.v_min_low_upto_kW", p.compare.v_min_low_upto_kw);
  r.get("compare.round_kW", p.compare.round_kw);
  r.get("compare.cases", p.compare.cases);
  if (!(p.compare.step_kw > 0.0 && p.compare.round_kw > 0.0)) throw ValidationError("compare steps must be positive");
  return p;
}

inline Params read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_params(in, path);
}

}  // namespace evplan::io

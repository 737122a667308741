#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evplan/grid/ieee33.hpp"
#include "evplan/io/config.hpp"
#include "evplan/transport/network.hpp"

namespace evplan::io {

namespace fs = std::filesystem;

template <int P>
struct CaseBundle {
  std::string name;
  Params params;
  grid::DistributionNetwork<P> net;
  grid::LoadSet<P> loads;
  transport::TransportNetwork transport;
  transport::DistanceMatrix dm;
  transport::DemandProfile demand;
  std::vector<ems::HourInput> ems_profile;  // empty when the case has none
};

inline std::vector<ems::HourInput> read_ems_profile(const std::string& path) {
  const auto t = CsvTable::read(path);
  std::vector<ems::HourInput> out(24);
  std::vector<char> seen(24, 0);
  for (const auto& r : t.rows()) {
    const int h = t.integer(r, "hour");
    if (h < 0 || h > 23) throw ValidationError(path + ":" + std::to_string(r.line) + ": hour must lie in 0..23");
    if (seen[h]) throw ValidationError(path + ": hour " + std::to_string(h) + " listed twice");
    seen[h] = 1;
    auto& x = out[h];
    x.load_kw = t.number(r, "load_kW");
    x.pv_kw = t.number(r, "pv_kW");
    x.ev_kw = t.number(r, "ev_kW");
    if (t.has_column("vg_kW")) x.vg_kw = t.number(r, "vg_kW");
  }
  for (int h = 0; h < 24; ++h)
    if (!seen[h]) throw ValidationError(path + ": hour " + std::to_string(h) + " missing");
  return out;
}

inline transport::DemandProfile read_demand(const std::string& path, int nodes, int periods) {
  const auto t = CsvTable::read(path);
  auto d = transport::DemandProfile::zeros(periods, nodes);
  for (const auto& r : t.rows()) {
    const int p = t.integer(r, "period"), i = t.integer(r, "node");
    if (p < 1 || p > periods || i < 1 || i > nodes)
      throw ValidationError(path + ":" + std::to_string(r.line) + ": period or node out of range");
    d.xi[p - 1][i - 1] = t.number(r, "xi");
    d.kwh_arr[p - 1][i - 1] = t.number(r, "kWh_arr");
    d.kwh_dep[p - 1][i - 1] = t.number(r, "kWh_dep");
  }
  d.validate();
  return d;
}

template <int P>
CaseBundle<P> load_case(const std::string& dir, const std::string& config_path = {},
                        std::optional<std::uint64_t> seed = std::nullopt) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw IoError("case directory " + dir + " does not exist");
  auto file = [&](const char* f) { return (root / f).string(); };

  Params params = read_params(config_path.empty() ? file("params.cfg") : config_path);
  if (seed) params.seed = *seed;

  // Grid: the slack plus every bus in the load table.
  const auto lt = CsvTable::read(file("grid_loads.csv"));
  const grid::BusId slack = 1;
  std::map<grid::BusId, grid::BusLoad<P>> bus_loads{{slack, {}}};
  for (const auto& r : lt.rows()) {
    const int b = lt.integer(r, "bus");
    const std::string cat = lt.text(r, "category");
    if (!grid::is_known_category(cat))
      throw ValidationError(lt.name() + ":" + std::to_string(r.line) + ": unknown load category '" + cat + "'");
    if (!bus_loads.emplace(b, grid::BusLoad<P>::balanced(lt.number(r, "P_kW"), lt.number(r, "Q_kvar"), cat)).second)
      throw ValidationError(lt.name() + ":" + std::to_string(r.line) + ": bus " + std::to_string(b) + " listed twice");
  }
  const int bus_count = static_cast<int>(bus_loads.size());
  if (bus_loads.rbegin()->first != bus_count || bus_loads.begin()->first != 1)
    throw ValidationError("grid buses must be numbered 1.." + std::to_string(bus_count));
  const auto bt = CsvTable::read(file("grid_branches.csv"));
  std::vector<grid::Branch<P>> branches;
  for (const auto& r : bt.rows()) {
    const int from = bt.integer(r, "from"), to = bt.integer(r, "to");
    for (int b : {from, to})
      if (!bus_loads.count(b))
        throw ValidationError(bt.name() + ":" + std::to_string(r.line) + ": branch " + std::to_string(from) + "-" +
                              std::to_string(to) + " references missing bus " + std::to_string(b));
    branches.push_back(grid::balanced_branch<P>(from, to, bt.number(r, "R_ohm"), bt.number(r, "X_ohm"),
                                                bt.number(r, "B_uS"), bt.number(r, "ampacity_A")));
  }
  grid::DistributionNetwork<P> net(bus_count, slack, std::move(branches), params.bases);
  grid::LoadSet<P> loads = net.empty_loads();
  for (const auto& [b, l] : bus_loads) loads[b - 1] = l;

  // Transport network in km and its coupling to the grid.
  const auto et = CsvTable::read(file("transport_edges.csv"));
  transport::TransportNetwork tn;
  for (const auto& r : et.rows()) {
    const int u = et.integer(r, "u"), v = et.integer(r, "v");
    tn.node_count = std::max({tn.node_count, u, v});
    tn.edges.push_back({u, v, et.number(r, "length_pu") * params.unit_km});
  }
  const auto ct = CsvTable::read(file("coupling.csv"));
  for (const auto& r : ct.rows()) {
    const int node = ct.integer(r, "transport_node"), bus = ct.integer(r, "bus");
    if (!bus_loads.count(bus))
      throw ValidationError(ct.name() + ":" + std::to_string(r.line) + ": coupling references missing bus " +
                            std::to_string(bus));
    if (!tn.coupling.emplace(node, bus).second)
      throw ValidationError(ct.name() + ":" + std::to_string(r.line) + ": transport node " + std::to_string(node) +
                            " coupled twice");
  }
  auto dm = transport::all_pairs_shortest(tn);

  auto demand = fs::exists(root / "demand.csv")
                    ? read_demand(file("demand.csv"), tn.node_count, params.periods)
                    : transport::synthesize_demand(params.seed, tn.node_count, params.periods, params.demand);
  std::vector<ems::HourInput> profile;
  if (fs::exists(root / "ems_profile.csv")) profile = read_ems_profile(file("ems_profile.csv"));

  return {root.filename().string(), std::move(params), std::move(net), std::move(loads), std::move(tn),
          std::move(dm), std::move(demand), std::move(profile)};
}

}  // namespace evplan::io

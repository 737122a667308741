#include <gtest/gtest.h>

#include "bundled_case.hpp"
#include "evplan/admm/joint_planning.hpp"
#include "evplan/grid/ieee33.hpp"

using namespace evplan;
using namespace evplan::admm;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

const auto kNet = grid::ieee33::network<1>();

JointInputs<1> bundled_inputs() {
  JointInputs<1> in;
  in.net = &kNet;
  in.base_loads = grid::ieee33::loads<1>();
  const auto demand = transport::synthesize_demand(7, 25, 24);
  in.demand = demand;
  std::vector<double> mean(25, 0.0);
  for (int t = 0; t < demand.periods(); ++t)
    for (int i = 0; i < 25; ++i) mean[i] += demand.xi[t][i] / demand.periods();
  in.siting.dm = transport::all_pairs_shortest(testdata::bundled_transport());
  in.siting.xi = {mean};
  in.siting.fixed_open = {1};
  in.fcs_node = 1;
  in.fcs_bus = 2;
  in.fcs_hc_kw = 4000.0;
  return in;
}

}  // namespace

TEST(Projection, ClampsToBigMBox) {
  const Siting x{1, 0, 1};
  const Vec w = project_consensus(vec({20, 7, -1}), vec({5, 3, -2}), x, 20.0);
  EXPECT_EQ(w(0), 20.0);
  EXPECT_EQ(w(1), 0.0);
  EXPECT_EQ(w(2), 0.0);
  EXPECT_THROW(project_consensus(vec({1}), vec({1, 2}), x, 20.0), ValidationError);
}

TEST(Dual, Arithmetic) {
  EXPECT_EQ(update_dual(vec({0}), vec({5}), vec({3}), 1.0)(0), 2.0);
  EXPECT_EQ(update_dual(vec({0.7}), vec({4}), vec({4}), 1.0)(0), 0.7);
  EXPECT_LT(update_dual(vec({0}), vec({1}), vec({2}), 1.0)(0), 0.0);
}

TEST(Residuals, NormsAndScaling) {
  const auto r = residuals(vec({3, 0}), vec({0, 4}), vec({0, 4}), 1.0);
  EXPECT_EQ(r.r_prim, 5.0);
  EXPECT_EQ(r.r_dual, 0.0);
  const auto a = residuals(vec({1}), vec({1}), vec({0}), 1.0);
  const auto b = residuals(vec({1}), vec({1}), vec({0}), 2.0);
  EXPECT_EQ(b.r_dual, 2.0 * a.r_dual);
  EXPECT_EQ(a.r_prim, 0.0);
}

TEST(TotalCap, ProportionalScaling) {
  const Vec z = enforce_total(vec({600, 900}), 1000.0);
  EXPECT_NEAR(z(0), 400.0, 1e-12);
  EXPECT_NEAR(z(1), 600.0, 1e-12);
  EXPECT_EQ(enforce_total(vec({1, 2}), 10.0), vec({1, 2}));
}

TEST(Run, SingleFixedNodeConvergesInTwo) {
  const auto r = run(
      1, {1}, [](const PlanState&) { return Siting{1}; }, [](const Siting&) { return vec({5}); }, {20, 100}, {});
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.state.k, 2);
  EXPECT_EQ(r.state.history.size(), 2u);
  EXPECT_EQ(r.state.history[0].r_prim, 0.0);
  EXPECT_EQ(r.state.history[0].r_dual, 5.0);
  EXPECT_EQ(r.state.w(0), 5.0);
}

TEST(Run, OverCapacityReturnsBestWithFlag) {
  StoppingRule rule;
  rule.max_iter = 8;
  const auto r = run(
      2, {1, 0}, [](const PlanState&) { return Siting{1, 0}; }, [](const Siting&) { return vec({25, 0}); },
      {20, 100}, rule);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.state.history.size(), 8u);
  EXPECT_EQ(r.state.iterates.size(), 9u);
  for (const auto& it : r.state.iterates)
    for (Eigen::Index j = 0; j < it.w.size(); ++j) {
      EXPECT_GE(it.w(j), 0.0);
      EXPECT_LE(it.w(j), 20.0 * it.x[static_cast<std::size_t>(j)]);
    }
  EXPECT_EQ(r.state.w(0), 20.0);
}

TEST(Run, HistoryRecomputableFromIterates) {
  StoppingRule rule;
  rule.max_iter = 6;
  rule.balance_rho = true;
  int calls = 0;
  const auto r = run(
      3, {1, 1, 0}, [](const PlanState&) { return Siting{1, 1, 0}; },
      [&](const Siting&) { return vec({3.0 + (calls++ % 2), 40.0, 0.0}); }, {20, 100}, rule);
  ASSERT_EQ(r.state.iterates.size(), r.state.history.size() + 1);
  for (std::size_t k = 0; k < r.state.history.size(); ++k) {
    const auto& h = r.state.history[k];
    const auto& cur = r.state.iterates[k + 1];
    const auto& prev = r.state.iterates[k];
    EXPECT_DOUBLE_EQ(h.r_prim, (cur.z - cur.w).norm());
    EXPECT_DOUBLE_EQ(h.r_dual, h.rho * (cur.w - prev.w).norm());
  }
  bool rho_changed = false;
  for (const auto& h : r.state.history) rho_changed = rho_changed || h.rho != 1.0;
  EXPECT_TRUE(rho_changed);
}

TEST(Run, InfeasibleCarriesIteration) {
  try {
    run(
        1, {1}, [](const PlanState&) -> Siting { throw InfeasibleError("no cover"); },
        [](const Siting&) { return vec({1}); }, {20, 100}, {});
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}

TEST(JointPlan, ZeroResidualLeavesPlainSiting) {
  auto in = bundled_inputs();
  const auto plain = siting::solve_siting(in.siting).open.front();
  PlanState s;
  s.w = Vec::Zero(25);
  EXPECT_EQ(open_sites(update_siting(s, in)), plain);
}

TEST(JointPlan, ConsensusCapacityForcesOpen) {
  auto in = bundled_inputs();
  PlanState s;
  s.w = Vec::Zero(25);
  s.w(24) = 100.0;
  const auto x = update_siting(s, in);
  EXPECT_EQ(x[24], 1);
  EXPECT_EQ(x[0], 1);
}

TEST(JointPlan, ClosedNodesGetNoCapacity) {
  auto in = bundled_inputs();
  in.siting.coverage_limit = false;
  in.demand = transport::DemandProfile::zeros(1, 25);
  Siting x(25, 0);
  x[0] = 1;
  const auto c = update_capacity(x, in);
  for (int j = 1; j < 25; ++j) EXPECT_EQ(c.z(j), 0.0);
  EXPECT_GT(c.z(0), 0.0);
}

TEST(JointPlan, McsSitesSizedByQueueing) {
  auto in = bundled_inputs();
  in.siting.coverage_limit = false;
  const auto x = to_siting({1, 25}, 25);
  const auto c = update_capacity(x, in);
  const int chargers = mcs::min_servers(c.lambda.at(25), 4.0, 1.0 / 6.0, 1000);
  EXPECT_EQ(c.chargers.at(25), chargers);
  EXPECT_EQ(c.z(24), chargers * 100.0);
}

TEST(JointPlan, BundledConvergesWithinTen) {
  const auto in = bundled_inputs();
  const auto p = plan_joint(in);
  ASSERT_TRUE(p.admm.converged);
  EXPECT_LE(p.admm.state.k, 10);
  const auto& last = p.admm.state.history.back();
  EXPECT_LE(last.r_prim, 1e-4);
  EXPECT_LE(last.r_dual, 1e-4);
  const double cap = in.box().iota_max;
  for (const auto& it : p.admm.state.iterates)
    for (Eigen::Index j = 0; j < it.w.size(); ++j) {
      EXPECT_GE(it.w(j), 0.0);
      EXPECT_LE(it.w(j), cap * it.x[static_cast<std::size_t>(j)]);
    }
  EXPECT_LE(p.admm.state.z.sum(), in.box().iota_tot);
  EXPECT_EQ(p.capacity.open.size(), 5u);
  EXPECT_GE(p.capacity.fcs.sites.front().s_kw, p.capacity.s_lower_kw);
}

#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "bundled_case.hpp"
#include "evplan/siting/siting.hpp"
#include "evplan/transport/demand.hpp"
#include "oracles/enumerate_siting.hpp"

using namespace evplan;
using namespace evplan::siting;

namespace {

SitingInstance bundled_instance(std::uint64_t seed = 2025) {
  SitingInstance inst;
  inst.dm = transport::all_pairs_shortest(testdata::bundled_transport());
  inst.xi = transport::synthesize_demand(seed, 25, 1).xi;
  return inst;
}

std::vector<double> weights(const SitingInstance& inst, int t = 0) {
  std::vector<double> w;
  for (double x : inst.xi[t]) w.push_back(inst.c_tc * x / inst.speed(t));
  return w;
}

oracle::EnumResult brute(const SitingInstance& inst) {
  std::vector<int> fixed(inst.fixed_open.begin(), inst.fixed_open.end());
  return oracle::enumerate_siting(inst.dm, weights(inst), inst.candidate_list(), fixed, inst.psi,
                                  inst.coverage_limit ? inst.reach_km() : -1.0, inst.r_s_km, inst.d_ev_km,
                                  inst.spacing_check);
}

SitingInstance line_instance(std::vector<double> xi, std::vector<transport::Edge> edges, int psi) {
  transport::TransportNetwork net{static_cast<int>(xi.size()), std::move(edges), {}};
  SitingInstance inst;
  inst.dm = transport::all_pairs_shortest(net);
  inst.xi = {std::move(xi)};
  inst.psi = psi;
  return inst;
}

}  // namespace

TEST(Siting, ColocatedDemandCostsNothing) {
  auto inst = line_instance({3.0}, {}, 1);
  auto dec = solve_siting(inst);
  EXPECT_EQ(dec.objective, 0.0);
  EXPECT_EQ(dec.open[0], std::vector<NodeId>{1});
}

TEST(Siting, SinglePairContribution) {
  auto inst = line_instance({2.0, 0.0}, {{1, 2, 10.0}}, 1);
  inst.candidates = {2};
  auto dec = solve_siting(inst);
  EXPECT_NEAR(dec.objective, 8.15 * 2 * 10 / 40.0, 1e-12);
  EXPECT_NEAR(dec.objective, 4.075, 1e-12);
}

TEST(Siting, BundledWithFixedStationMatchesEnumeration) {
  auto inst = bundled_instance();
  inst.fixed_open = {5};
  auto dec = solve_siting(inst);
  auto ref = brute(inst);
  EXPECT_EQ(ref.subsets, 53130);  // all C(25,5); C(24,4) of them contain node 5
  EXPECT_NEAR(dec.objective, ref.objective, 1e-9 * ref.objective);
  EXPECT_EQ(dec.open[0], ref.open);
  EXPECT_TRUE(validate_decision(dec, inst).empty());
}

TEST(Siting, RandomInstancesMatchEnumeration) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    auto inst = bundled_instance(100 + trial);
    inst.psi = 2 + trial % 5;
    inst.fixed_open.clear();
    if (trial % 2) inst.fixed_open.insert(1 + static_cast<int>(rng() % 25));
    inst.coverage_limit = trial % 3 != 0;
    auto ref = brute(inst);
    if (!std::isfinite(ref.objective)) {
      EXPECT_THROW(solve_siting(inst), InfeasibleError);
      continue;
    }
    auto dec = solve_siting(inst);
    EXPECT_NEAR(dec.objective, ref.objective, 1e-9 * std::max(1.0, ref.objective)) << trial;
    EXPECT_TRUE(validate_decision(dec, inst).empty()) << trial;
  }
}

TEST(Siting, AddingCandidateNeverHurts) {
  auto inst = bundled_instance();
  inst.candidates = {1, 3, 7, 9, 12, 15, 17, 19, 21, 23, 25};
  const double before = solve_siting(inst).objective;
  inst.candidates.push_back(13);
  EXPECT_LE(solve_siting(inst).objective, before + 1e-9);
}

TEST(Siting, InfeasibleCoverage) {
  auto inst = line_instance({1.0, 1.0, 1.0}, {{1, 2, 10.0}, {2, 3, 50.0}}, 1);
  EXPECT_THROW(solve_siting(inst), InfeasibleError);
}

TEST(Siting, PsiSmallerThanFixedSetRejected) {
  auto inst = bundled_instance();
  inst.psi = 1;
  inst.fixed_open = {1, 2};
  EXPECT_THROW(solve_siting(inst), ValidationError);
}

TEST(Siting, LexicographicTieBreak) {
  // Symmetric star: centre demand only, two equidistant leaves.
  auto inst = line_instance({0.0, 1.0, 0.0}, {{1, 2, 10.0}, {2, 3, 10.0}}, 1);
  inst.candidates = {1, 3};
  EXPECT_EQ(solve_siting(inst).open[0], std::vector<NodeId>{1});
}

TEST(Siting, MultiPeriodSolvesIndependently) {
  auto inst = bundled_instance();
  auto second = transport::synthesize_demand(99, 25, 1).xi[0];
  inst.xi.push_back(second);
  inst.v_avg_kmh = {40.0, 30.0};
  auto dec = solve_siting(inst);
  ASSERT_EQ(dec.open.size(), 2u);
  SitingInstance only = inst;
  only.xi = {second};
  only.v_avg_kmh = {30.0};
  EXPECT_EQ(dec.open[1], solve_siting(only).open[0]);
}

TEST(AssignDemand, SelfAssignmentWhenEverythingOpen) {
  auto inst = bundled_instance();
  std::vector<NodeId> all(25);
  for (int j = 0; j < 25; ++j) all[j] = j + 1;
  auto a = assign_demand(all, inst.dm, inst);
  for (int i = 1; i <= 25; ++i) EXPECT_EQ(a.v[i - 1], i);
}

TEST(AssignDemand, UncoveredNode) {
  auto inst = line_instance({1.0, 1.0}, {{1, 2, 40.0}}, 1);
  EXPECT_THROW(assign_demand({1}, inst.dm, inst), Uncovered);
}

TEST(AssignDemand, EquidistantTieGoesToSmallerId) {
  auto inst = line_instance({0.0, 1.0, 0.0}, {{1, 2, 10.0}, {2, 3, 10.0}}, 2);
  auto a = assign_demand({3, 1}, inst.dm, inst);
  EXPECT_EQ(a.v[1], 1);
  EXPECT_TRUE(a.y[1][0] && a.y[1][2]);
}

TEST(Spacing, BoundaryInclusive) {
  auto inst = line_instance({0.0, 0.0}, {{1, 2, 10.0}}, 2);
  EXPECT_TRUE(check_spacing({1, 2}, inst.dm, inst).pass);
}

TEST(Spacing, TooClose) {
  auto inst = line_instance({0.0, 0.0}, {{1, 2, 5.0}}, 2);
  auto v = check_spacing({1, 2}, inst.dm, inst);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.a, 1);
  EXPECT_EQ(v.b, 2);
}

TEST(Spacing, SingleStationVacuous) {
  auto inst = line_instance({0.0, 0.0}, {{1, 2, 5.0}}, 1);
  EXPECT_TRUE(check_spacing({2}, inst.dm, inst).pass);
}

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "bundled_case.hpp"
#include "evplan/io/pipeline.hpp"
#include "evplan/mcs/queueing.hpp"
#include "ieee33_oracle.hpp"
#include "oracles/enumerate_siting.hpp"
#include "oracles/fcs_scan.hpp"
#include "oracles/mmc_simulation.hpp"

using namespace evplan;

namespace {

// Tolerances.
constexpr double kVoltageTol = 1e-3;       // p.u.
constexpr double kLossRelTol = 0.01;
constexpr double kPowerFlowSeconds = 1.0;
constexpr double kQueueRelTol = 0.02;
constexpr long kSimArrivals = 1'000'000;
constexpr double kSitingSeconds = 60.0;
constexpr double kResidualTol = 1e-4;
constexpr int kIterCap = 50;
constexpr int kIterAccepted = 10;
constexpr double kCrf = 0.142378, kCrfTol = 1e-6;
constexpr double kTax = 0.01336, kTaxTol = 1e-6;
constexpr double kScanStepKw = 1.0;
constexpr double kBalanceTol = 1e-9;       // kWh
constexpr double kSocLo = 0.60, kSocHi = 0.95;
constexpr int kDispatchMin = 1, kDispatchMax = 6;

struct Outcome {
  std::string name;
  std::string detail;
  bool pass = false;
};

std::map<int, Outcome>& outcomes() {
  static std::map<int, Outcome> m;
  return m;
}

void record(int n, const std::string& name, const std::string& detail) {
  outcomes()[n] = {name, detail, !::testing::Test::HasFailure()};
}

class Summary : public ::testing::Environment {
 public:
  void TearDown() override {
    std::printf("\nAcceptance summary\n");
    for (int n = 1; n <= 9; ++n) {
      const auto it = outcomes().find(n);
      if (it == outcomes().end()) {
        std::printf("criterion %d: FAIL | not run\n", n);
        continue;
      }
      std::printf("criterion %d: %s | %s | %s\n", n, it->second.pass ? "PASS" : "FAIL", it->second.name.c_str(),
                  it->second.detail.c_str());
    }
    std::fflush(stdout);
  }
};

const auto* const kSummary = ::testing::AddGlobalTestEnvironment(new Summary);

const io::CaseBundle<3>& bundled() {
  static const auto b = io::load_case<3>(testdata::bundled_dir());
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

std::vector<ems::HourInput> random_day(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> base(300.0, 1500.0), amp(0.0, 1200.0), pv(0.0, 700.0), ev(0.0, 1500.0);
  const double b = base(rng), a = amp(rng), pv_peak = pv(rng), ev_peak = ev(rng);
  std::vector<ems::HourInput> d(24);
  for (int h = 0; h < 24; ++h) {
    const double evening = std::exp(-0.5 * std::pow((h - 19.0) / 2.0, 2));
    const double noon = std::max(0.0, std::sin((h - 6.0) / 12.0 * 3.141592653589793));
    std::uniform_real_distribution<double> noise(0.9, 1.1);
    d[h].load_kw = (b + a * evening) * noise(rng);
    d[h].pv_kw = pv_peak * noon;
    d[h].ev_kw = ev_peak * (0.3 + 0.7 * evening) * noise(rng);
  }
  return d;
}

}  // namespace

TEST(Acceptance, C1_PowerFlowFidelity) {
  const auto net = grid::ieee33::network<3>();
  const auto loads = grid::ieee33::loads<3>();
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = grid::run_power_flow(net, loads);
  const double elapsed = seconds_since(t0);
  const auto ref = testdata::ieee33_oracle();
  const double v18 = res.mean_magnitude(18);
  EXPECT_NEAR(v18, ref.vm[17], kVoltageTol);
  EXPECT_NEAR(res.p_loss_kw, ref.loss_kw, kLossRelTol * ref.loss_kw);
  EXPECT_LT(elapsed, kPowerFlowSeconds);
  record(1, "power-flow fidelity",
         fmt("V18 %.6f vs oracle %.6f p.u., loss %.3f vs %.3f kW, %.4f s", v18, ref.vm[17], res.p_loss_kw,
             ref.loss_kw, elapsed));
}

TEST(Acceptance, C2_QueueingExactness) {
  struct Point {
    double lambda, mu;
    int c;
  };
  const Point grid[] = {{0.4, 4, 1}, {2, 4, 1},   {3.6, 4, 1}, {3, 4, 2}, {6, 4, 2},
                        {7.2, 4, 2}, {6, 4, 3},   {10.8, 4, 3}, {2, 1, 4}, {12, 4, 5}};
  double worst = 0.0;
  for (const auto& g : grid) {
    const auto m = mcs::erlang_metrics({g.lambda, g.mu, g.c});
    ASSERT_GE(m.rho, 0.1 - 1e-12);
    ASSERT_LE(m.rho, 0.9 + 1e-12);
    const auto sim = oracle::simulate_mmc(g.lambda, g.mu, g.c, kSimArrivals, 42);
    for (auto [a, s] : {std::pair{m.p0, sim.p0}, {m.lq, sim.lq}, {m.tw, sim.tw}}) {
      const double rel = std::abs(a - s) / std::abs(s);
      worst = std::max(worst, rel);
      EXPECT_LT(rel, kQueueRelTol) << "lambda " << g.lambda << " mu " << g.mu << " c " << g.c;
    }
    EXPECT_DOUBLE_EQ(m.tw * g.lambda, m.lq);
    EXPECT_DOUBLE_EQ(m.ls - m.lq, g.lambda / g.mu);
  }
  record(2, "queueing exactness", fmt("10-point grid, rho 0.1..0.9, worst relative error %.4f; Little identities hold",
                                      worst));
}

TEST(Acceptance, C3_SitingOptimality) {
  io::Pipeline<3> pipe(bundled());
  auto inst = pipe.siting_instance(0, true);
  const auto t0 = std::chrono::steady_clock::now();
  const auto dec = siting::solve_siting(inst);
  const double elapsed = seconds_since(t0);
  std::vector<double> w(inst.nodes());
  for (int i = 0; i < inst.nodes(); ++i) w[i] = inst.c_tc * inst.xi[0][i] / inst.speed(0);
  const auto ref = oracle::enumerate_siting(inst.dm, w, inst.candidate_list(), {}, inst.psi, inst.reach_km(),
                                            inst.r_s_km, inst.d_ev_km, inst.spacing_check);
  EXPECT_EQ(ref.subsets, 53130);
  EXPECT_NEAR(dec.objective, ref.objective, 1e-9 * ref.objective);
  EXPECT_EQ(dec.open[0], ref.open);
  EXPECT_LT(elapsed, kSitingSeconds);
  record(3, "siting optimality",
         fmt("objective %.6f vs enumeration %.6f $/h over %ld subsets, %.3f s", dec.objective, ref.objective,
             ref.subsets, elapsed));
}

TEST(Acceptance, C4_AdmmConvergence) {
  io::Pipeline<3> pipe(bundled());
  const auto in = pipe.joint_inputs(pipe.candidates().front());
  const auto plan = admm::plan_joint(in);
  const auto& st = plan.admm.state;
  const auto& last = st.history.back();
  const int iters = static_cast<int>(st.history.size());
  EXPECT_TRUE(plan.admm.converged);
  EXPECT_LT(last.r_prim, kResidualTol);
  EXPECT_LT(last.r_dual, kResidualTol);
  EXPECT_LE(iters, kIterCap);
  EXPECT_LE(iters, kIterAccepted);
  const double cap = in.box().iota_max;
  bool box_ok = true;
  for (std::size_t k = 1; k < st.iterates.size(); ++k) {
    const auto& it = st.iterates[k];
    for (Eigen::Index j = 0; j < it.w.size(); ++j)
      box_ok = box_ok && it.w(j) >= 0.0 && it.w(j) <= cap * it.x[static_cast<std::size_t>(j)];
  }
  EXPECT_TRUE(box_ok);
  record(4, "ADMM convergence",
         fmt("converged in %d iterations, r_prim %.2e, r_dual %.2e, 0 <= w <= iota*x after every iteration", iters,
             last.r_prim, last.r_dual));
}

TEST(Acceptance, C5_AssessmentRanking) {
  auto lim = bundled().params.limits;
  lim.step_kw = 5.0;
  lim.margin = 0.85;
  const auto list = assessment::assess_all(grid::ieee33::network<3>(), grid::ieee33::loads<3>(), lim);
  const auto top = assessment::rank_candidates(list, 5);
  const std::set<int> s(top.begin(), top.end());
  EXPECT_TRUE(s.count(2));
  EXPECT_TRUE(s.count(19));
  int overlap = 0;
  for (int b : {19, 2, 20, 21, 22}) overlap += static_cast<int>(s.count(b));
  std::ostringstream os;
  for (int b : top) os << (os.tellp() ? " " : "") << b;
  record(5, "assessment ranking", fmt("top-5 {%s}, %d of 5 shared with the published top-5", os.str().c_str(),
                                      overlap));
}

TEST(Acceptance, C6_CostArithmetic) {
  const fcs::CostParams p = bundled().params.cost;
  const double crf = fcs::crf(p.h, p.eps);
  EXPECT_NEAR(crf, kCrf, kCrfTol);
  EXPECT_NEAR(p.c_tax(), kTax, kTaxTol);
  const auto net = grid::ieee33::network<1>();
  const auto loads = grid::ieee33::loads<1>();
  const auto r = fcs::size_fcs(net, loads, {{2, 1962.88, 1962.88}}, transport::DemandProfile::zeros(1, 1), {}, p);
  const auto& l = r.ledger;
  const double s = r.sites[0].s_kw;
  EXPECT_NEAR(l.c_cons, oracle::annuity_crf(p.h, static_cast<int>(p.eps)) * (p.c_base + p.c_inve * s), 1e-6);
  EXPECT_NEAR(l.c_om, p.c_om * s, 1e-9);
  EXPECT_NEAR(l.c_loss, p.t_om * p.c_pb * (r.p_loss_kw - r.base_loss_kw), 1e-9);
  const double c_fcs = l.c_cons + l.c_om + l.c_loss - l.r_f;
  EXPECT_EQ(l.net(), c_fcs);
  record(6, "cost arithmetic",
         fmt("CRF %.7f, c_tax %.6f $/kWh, C_FCS %.2f = C_cons + C_om + C_loss - R_f exactly", crf, p.c_tax(), c_fcs));
}

TEST(Acceptance, C7_FcsSizingOptimality) {
  const auto net = grid::ieee33::network<1>();
  const auto loads = grid::ieee33::loads<1>();
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> bus_d(2, 33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  assessment::AssessmentLimits lim;
  lim.i_max_a = bundled().params.limits.i_max_a;
  std::string detail;
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int bus = bus_d(rng);
    // Sale price a small margin above break-even, so that loss curvature can
    // place the optimum inside the box.
    fcs::CostParams p;
    p.c_pb = 0.3 + 0.4 * u(rng);
    p.c_cs = 0.05 + 0.1 * u(rng);
    const double fixed = p.c_bf + fcs::crf(p.h, p.eps) * p.c_inve + p.c_om;
    const double margin = 0.15 * u(rng);
    p.c_ps = p.c_pb + (fixed / p.t_om + margin - p.c_cs * (1.0 - p.r_xs)) / (1.0 - p.r_xp);
    const double hc = assessment::hosting_capacity(net, loads, bus, lim).hc_kw;
    const double s_q = std::floor(0.3 * hc * u(rng));
    fcs::FcsOptions o;
    o.limits = lim;
    const auto r = fcs::size_fcs(net, loads, {{bus, hc, s_q}}, transport::DemandProfile::zeros(1, 1), {}, p, o);
    const auto scan = oracle::scan_bus(bus, s_q, hc, p, lim.pf);
    const double s = r.sites[0].s_kw;
    const double f = fcs::site_objective(net, loads, bus, s, p, lim.pf);
    worst = std::max(worst, std::abs(s - scan.s_kw));
    EXPECT_NEAR(s, scan.s_kw, kScanStepKw) << "bus " << bus;
    EXPECT_LE(f, scan.objective + 1e-6 * std::abs(scan.objective)) << "bus " << bus;
    const char* kind = s <= s_q + kScanStepKw ? "lower bound" : s >= hc - kScanStepKw ? "upper bound" : "interior";
    detail += fmt("%sbus %d [%.0f, %.2f] kW: %.2f vs scan %.0f (%s)", k ? "; " : "", bus, s_q, hc, s, scan.s_kw, kind);
  }
  record(7, "FCS sizing optimality", detail + fmt("; worst gap %.3f kW", worst));
}

TEST(Acceptance, C8_EmsProperties) {
  const ems::EmsParams p = bundled().params.ems;
  const auto tou = bundled().params.tou;
  std::mt19937_64 rng(7);
  double worst_balance = 0.0, soc_lo = 1.0, soc_hi = 0.0;
  int peak_ok = 0;
  for (int day = 0; day < 100; ++day) {
    const auto prof = random_day(rng);
    const int n = 1 + day % 6;
    const auto r = ems::simulate_day(prof, tou, ems::initial_state(p, n), p);
    worst_balance = std::max(worst_balance, r.metrics.max_balance_residual_kwh);
    peak_ok += r.metrics.peak_after_kw <= r.metrics.peak_before_kw + 1e-9;

    // Same schedule stepped by hand to inspect every unit.
    auto state = ems::initial_state(p, n);
    double total = 0.0;
    for (const auto& h : prof) total += h.demand_kw();
    for (int h = 0; h < 24; ++h) {
      ems::step(state, prof[h], tou.label[h], total / 24.0 * tou.factor(h), r.metrics.peak_before_kw, p);
      for (const auto& m : state.fleet) {
        soc_lo = std::min(soc_lo, m.soc_kwh / m.capacity_kwh);
        soc_hi = std::max(soc_hi, m.soc_kwh / m.capacity_kwh);
      }
    }
  }
  EXPECT_LE(worst_balance, kBalanceTol);
  EXPECT_GE(soc_lo, kSocLo - 1e-12);
  EXPECT_LE(soc_hi, kSocHi + 1e-12);
  EXPECT_EQ(peak_ok, 100);

  const auto rep = io::run_pipeline(bundled(), io::Stage::simulate);
  ASSERT_TRUE(rep.ems);
  int active = 0, lo = 1 << 20, hi = 0;
  for (const auto& h : rep.ems->hours)
    if (h.dispatched > 0) {
      ++active;
      lo = std::min(lo, h.dispatched);
      hi = std::max(hi, h.dispatched);
    }
  EXPECT_GT(active, 0);
  EXPECT_GE(lo, kDispatchMin);
  EXPECT_LE(hi, kDispatchMax);
  EXPECT_LE(rep.ems->max_balance_residual_kwh, kBalanceTol);
  record(8, "EMS properties",
         fmt("100 days: max residual %.1e kWh, unit SoC in [%.3f, %.3f], peak not raised on %d/100; bundled day "
             "dispatches %d-%d MCS in %d hours, peak ratio %.3f",
             worst_balance, soc_lo, soc_hi, peak_ok, active ? lo : 0, hi, active, rep.ems->peak_ratio));
}

TEST(Acceptance, C9_ComparisonTables) {
  const auto rep = io::run_pipeline(bundled(), io::Stage::compare);
  ASSERT_TRUE(rep.compare);
  const auto& c = *rep.compare;
  EXPECT_EQ(c.cases.size(), 3u);
  EXPECT_EQ(c.flexibility.size(), 3u);
  ASSERT_EQ(c.scenarios.size(), 3u);
  for (const auto& k : c.cases) {
    EXPECT_GT(k.fcs_kw, 0.0);
    EXPECT_GT(k.n_mcs, 0);
    EXPECT_GT(k.driving_distance_km, 0.0);
  }
  const auto csv = io::to_csv(rep);
  const std::string vi = csv.at("compare_cases.csv"), vii = csv.at("compare_scenarios.csv");
  EXPECT_EQ(vi.substr(0, vi.find('\n')),
            "case,fcs_bus,fcs_node,fcs_capacity_kW,mcs_nodes,n_mcs,annual_net_revenue,mcs_operation_cost_per_h,"
            "waiting_cost_per_h,driving_distance_km,converged");
  EXPECT_EQ(vii.substr(0, vii.find('\n')),
            "scenario,total_fixed_capacity_kW,basic_investment,flexible_energy_kWh,capacity_expansion_potential_kW,"
            "total_driving_distance_km");
  std::string rows;
  for (const auto& k : c.cases) rows += fmt("%sbus %d %.1f kW", rows.empty() ? "" : ", ", k.fcs_bus, k.fcs_kw);
  record(9, "comparison tables emitted",
         fmt("3 candidate cases (%s), 3 scenario rows with the fixed-capacity, investment, flexible-energy, "
             "expansion-potential and driving-distance columns; published magnitudes are not targets",
             rows.c_str()));
}

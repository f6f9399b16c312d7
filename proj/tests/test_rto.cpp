#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "mgc/rto.hpp"

namespace {

using namespace mgc;
using mgc::testing::battery_fleet;
using mgc::testing::random_opp_instance;

const Instant kNoon = make_instant(2019, 5, 22, 12);

ValueFunction flat_vf(double value, double slope, double anchor = 0.0) {
  ValueFunction vf;
  vf.domain = {{0.0, 1350.0}};
  vf.cuts.push_back({{anchor}, value, {slope}});
  return vf;
}

RtoContext context(const DeviceFleet& fleet, double pv, double load, double dt, const ValueFunction* vf) {
  RtoContext c;
  c.now = kNoon;
  c.dt_hours = dt;
  c.fleet = fleet;
  c.soc = fleet.initial_soc();
  c.historical_peak = 150.0;
  c.forecast = split_sample(fleet, pv, load);
  c.vf = vf;
  return c;
}

TEST(Rto, BetaAndBlendedPeak) {
  DeviceFleet none;
  auto c = context(none, 0.0, 0.0, 0.25, nullptr);
  EXPECT_DOUBLE_EQ(c.beta(), 0.0);
  c.dt_hours = 1.0 / 60.0;
  EXPECT_NEAR(c.beta(), 14.0 / 15.0, 1e-15);
  c.realized_average_kw = 150.0;
  const auto a = solve_rtp(c);
  EXPECT_NEAR(a.period_power_kw, 140.0, 1e-9);
  EXPECT_NEAR(a.peak_increment_kw, 0.0, 1e-12);
}

TEST(Rto, ActivatedReserveDropsShortfallPenalty) {
  auto c = context(battery_fleet(), 0.0, 0.0, 0.25, nullptr);
  c.contract.reserve_price_op = 20.0;
  c.contract.reserve_penalty_rto = 20.0;
  c.committed_reserve_kw = 5000.0;
  auto m = build_rtp(c);
  EXPECT_EQ(m.lp.cost(m.layout.shortfall), 20.0);
  c.s_tso = 0;
  m = build_rtp(c);
  EXPECT_EQ(m.lp.cost(m.layout.shortfall), 0.0);
}

TEST(Rto, IdleWithoutEconomy) {
  const auto vf = flat_vf(0.0, 0.0);
  const auto a = solve_rtp(context(battery_fleet(0.0), 0.0, 0.0, 0.25, &vf));
  EXPECT_NEAR(a.objective, 0.0, 1e-12);
  EXPECT_NEAR(a.import_kwh + a.export_kwh, 0.0, 1e-12);
}

TEST(Rto, ThetaEqualsEnvelopeAtEndState) {
  ValueFunction vf;
  vf.domain = {{0.0, 1350.0}};
  vf.cuts.push_back({{100.0}, 50.0, {-0.3}});
  vf.cuts.push_back({{400.0}, -20.0, {-0.02}});
  for (double load : {0.0, 100.0, 300.0}) {
    const auto a = solve_rtp(context(battery_fleet(100.0), 50.0, load, 0.1, &vf));
    EXPECT_NEAR(a.theta, vf.evaluate(a.soc_end), 1e-6);
    EXPECT_LE(a.import_kwh * a.export_kwh, 1e-12);
  }
}

// Brute force over (a_cha, a_dis) on a one-battery, PV-free instance.
double grid_search(const RtoContext& c) {
  const auto& s = c.fleet.storage[0];
  const double load = c.forecast.total_load_kw();
  double best = 1e300;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double ac = i / 100.0, ad = j / 100.0;
      const double soc = c.soc[0] + c.dt_hours * (s.p_charge_max * s.eta_charge * ac - s.p_discharge_max / s.eta_discharge * ad);
      if (soc < s.s_min || soc > s.s_max) continue;
      const double net_import_kw = load + s.p_charge_max * ac - s.p_discharge_max * ad;
      const double imp = std::max(0.0, net_import_kw) * c.dt_hours, exp = std::max(0.0, -net_import_kw) * c.dt_hours;
      const double power = c.beta() * c.realized_average_kw + (imp - exp) / c.period_hours;
      const double dp = std::max(0.0, power - c.historical_peak);
      const double cost = import_price_at(c.now, c.contract) * imp - c.contract.export_price * exp +
                          c.contract.peak_price * dp + c.vf->evaluate(std::vector<double>{soc});
      best = std::min(best, cost);
    }
  }
  return best;
}

TEST(Rto, MatchesGridSearchAndChargesWhenStorageIsValuable) {
  const auto steep = flat_vf(0.0, -0.5, 0.0);
  auto fleet = battery_fleet(100.0);
  fleet.storage[0].p_charge_max = fleet.storage[0].p_discharge_max = 400.0;
  for (double dt : {0.25, 0.1, 1.0 / 60.0}) {
    const auto c = context(fleet, 0.0, 80.0, dt, &steep);
    const auto a = solve_rtp(c);
    const double oracle = grid_search(c);
    EXPECT_LE(a.objective, oracle + 1e-9);
    EXPECT_GE(a.objective, oracle - 2.0) << dt;  // grid resolution
    EXPECT_GT(a.charge[0], 0.0);
  }
  // Mildly valued storage with a realized peak on top: grid and LP agree.
  const auto mild = flat_vf(0.0, -0.05, 0.0);
  auto c = context(fleet, 0.0, 120.0, 0.25, &mild);
  const auto a = solve_rtp(c);
  EXPECT_LE(a.objective, grid_search(c) + 1e-9);
  EXPECT_GE(a.objective, grid_search(c) - 2.0);
}

TEST(Rto, SinglePeriodMatchesPlanner) {
  const auto fleet = battery_fleet(300.0);
  const std::vector<double> pv{30.0}, load{320.0};
  const auto inst = make_opp_instance(kNoon, pv, load, fleet, GridContract{}, MarketClock{}, 150.0);
  const auto plan = solve_opp(inst, inst.initial_soc);
  const auto zero = flat_vf(0.0, 0.0);
  const auto a = solve_rtp(context(fleet, 30.0, 320.0, 0.25, &zero));
  EXPECT_NEAR(a.objective, plan.objective, 1e-6);
  EXPECT_NEAR(a.import_kwh, plan.periods[0].import_kwh, 1e-6);
  EXPECT_NEAR(a.export_kwh, plan.periods[0].export_kwh, 1e-6);
  EXPECT_NEAR(a.discharge[0], plan.periods[0].discharge[0], 1e-6);
}

TEST(Rto, BoundaryDecisionIsTimeConsistentWithPlan) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = random_opp_instance(rng, 48);
    const auto plan = solve_opp(inst, inst.initial_soc);
    ParametricOpp tail(tail_instance(inst, 1));
    const auto range = reachable_range(inst.initial_soc, 0.25, inst.fleet);
    const auto vf = generate_cuts(tail, range, plan.periods[0].soc);
    RtoContext c;
    c.now = inst.start;
    c.dt_hours = 0.25;
    c.fleet = inst.fleet;
    c.contract = inst.contract;
    c.soc = inst.initial_soc;
    c.historical_peak = inst.historical_peak;
    c.forecast = inst.forecasts[0];
    c.vf = &vf;
    const auto a = solve_rtp(c);
    EXPECT_LE(a.objective, plan.objective + 1e-6);
    EXPECT_GE(a.immediate_cost + a.delayed_cost + a.theta, plan.objective - 0.5);
  }
}

TEST(Rto, PeakBlendingTelescopes) {
  // A constant net import of 200 kW seen from any re-solve instant.
  const double dtau = 0.25, planned = 200.0;
  for (int k = 1; k <= 15; ++k) {
    const double dt = (15 - k + 1) / 60.0;
    const double beta = 1.0 - dt / dtau;
    const double realized = planned;  // kWh so far / elapsed time
    EXPECT_NEAR(beta * realized + (planned * dt) / dtau, planned, 1e-12);
  }
}

TEST(Rto, InvalidStepIsRejected) {
  auto c = context(battery_fleet(), 0.0, 0.0, 0.0, nullptr);
  EXPECT_THROW((void)build_rtp(c), ConfigError);
  c.dt_hours = 0.5;
  EXPECT_THROW((void)build_rtp(c), ConfigError);
}

}  // namespace

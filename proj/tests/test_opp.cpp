#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "fixtures.hpp"
#include "mgc/opp.hpp"

namespace {

using namespace mgc;
using mgc::testing::battery_fleet;
using mgc::testing::random_opp_instance;

const Instant kWednesdayNoon = make_instant(2019, 5, 22, 12);

OppInstance one_period(double pv, double load, DeviceFleet fleet, GridContract ct = {}) {
  const std::vector<double> p{pv}, l{load};
  return make_opp_instance(kWednesdayNoon, p, l, fleet, ct, MarketClock{}, ct.initial_historical_peak);
}

DeviceFleet no_storage() { return DeviceFleet{}; }

TEST(Opp, LoadForcesImport) {
  const auto inst = one_period(0.0, 100.0, no_storage());
  const auto plan = solve_opp(inst, {});
  EXPECT_NEAR(plan.periods[0].import_kwh, 25.0, 1e-9);
  EXPECT_NEAR(plan.objective, 5.0, 1e-9);
}

TEST(Opp, PeakIncrementAboveHistoricalPeak) {
  const auto inst = one_period(0.0, 167.0, no_storage());
  const auto plan = solve_opp(inst, {});
  EXPECT_NEAR(plan.periods[0].peak_increment_kw, 17.0, 1e-9);
  EXPECT_NEAR(plan.periods[0].delayed_cost, 680.0, 1e-7);
  EXPECT_NEAR(plan.objective, 0.2 * 167.0 * 0.25 + 680.0, 1e-7);
}

TEST(Opp, UpwardReserveBoundedByPowerAndHeadroom) {
  GridContract ct;
  ct.reserve_price_op = 20.0;
  auto model = build_opp(one_period(0.0, 0.0, battery_fleet(1350.0), ct));
  const int r_up = model.layout.periods[0].r_up[0];
  model.lp.set_cost(r_up, -1.0);
  model.lp.set_cost(model.layout.periods[0].r_sym, 0.0);
  const auto sol = lp::solve_lp(model.lp);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.x[r_up], 1350.0, 1e-7);
}

TEST(Opp, EmptyEconomyIsIdle) {
  // Without an export price stored energy has no value.
  GridContract ct;
  ct.export_price = 0.0;
  const auto inst = one_period(0.0, 0.0, battery_fleet(100.0), ct);
  const auto plan = solve_opp(inst, inst.initial_soc);
  EXPECT_NEAR(plan.objective, 0.0, 1e-12);
  EXPECT_NEAR(plan.initial_soc_duals[0], 0.0, 1e-12);
  const auto bare = solve_opp(one_period(0.0, 0.0, no_storage()), {});
  EXPECT_NEAR(bare.objective, 0.0, 1e-12);
  EXPECT_NEAR(bare.periods[0].import_kwh + bare.periods[0].export_kwh, 0.0, 1e-12);
}

TEST(Opp, SelfSufficientWithFullBatteryHeldFull) {
  auto fleet = battery_fleet(1350.0);
  fleet.storage[0].s_end = 1350.0;
  const auto inst = one_period(200.0, 200.0, fleet);
  const auto plan = solve_opp(inst, inst.initial_soc);
  EXPECT_NEAR(plan.objective, 0.0, 1e-9);
  EXPECT_NEAR(plan.periods[0].import_kwh, 0.0, 1e-9);
  EXPECT_NEAR(plan.periods[0].export_kwh, 0.0, 1e-9);
}

TEST(Opp, UnreachableTerminalStateNamesFamily) {
  auto fleet = battery_fleet(0.0);
  fleet.storage[0].p_charge_max = 100.0;
  fleet.storage[0].s_end = 1350.0;
  const auto inst = one_period(0.0, 0.0, fleet);
  try {
    (void)solve_opp(inst, inst.initial_soc);
    FAIL() << "expected infeasibility";
  } catch (const OppInfeasible& e) {
    const auto& fam = e.families();
    EXPECT_NE(std::find(fam.begin(), fam.end(), "soc_end"), fam.end()) << e.what();
  }
}

TEST(Opp, RejectsInitialStateOutsideBounds) {
  const auto inst = one_period(0.0, 0.0, battery_fleet(100.0));
  const std::vector<double> bad{2000.0};
  EXPECT_THROW((void)solve_opp(inst, bad), ConfigError);
}

TEST(Opp, DualMatchesFiniteDifference) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_opp_instance(rng, 24);
    ParametricOpp opp(inst);
    const double s0 = std::clamp(inst.initial_soc[0], 1.0, inst.fleet.storage[0].s_max - 1.0);
    const auto base = opp.solve(std::vector<double>{s0});
    const double up = opp.solve(std::vector<double>{s0 + 1.0}).objective - base.objective;
    const double dn = base.objective - opp.solve(std::vector<double>{s0 - 1.0}).objective;
    const double mu = base.initial_soc_duals[0];
    EXPECT_LE(std::min(up, dn) - 1e-7, mu) << trial;
    EXPECT_GE(std::max(up, dn) + 1e-7, mu) << trial;
  }
}

TEST(Opp, ValueIsMonotoneAndConvexInInitialState) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_opp_instance(rng, 16);
    ParametricOpp opp(inst);
    const double smax = inst.fleet.storage[0].s_max;
    std::vector<double> j;
    for (int g = 0; g <= 10; ++g) {
      const auto plan = opp.solve(std::vector<double>{smax * g / 10.0});
      EXPECT_LE(plan.initial_soc_duals[0], 1e-9);
      j.push_back(plan.objective);
    }
    for (int g = 1; g <= 10; ++g) EXPECT_LE(j[g], j[g - 1] + 1e-7);
    for (int g = 1; g < 10; ++g) EXPECT_LE(j[g], 0.5 * (j[g - 1] + j[g + 1]) + 1e-6);
  }
}

TEST(Opp, PlanSatisfiesBalanceAndReserveBounds) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    auto inst = random_opp_instance(rng, 16);
    inst.contract.reserve_price_op = 20.0;
    const auto plan = solve_opp(inst, inst.initial_soc);
    const auto& bat = inst.fleet.storage[0];
    for (int k = 0; k < inst.n_periods(); ++k) {
      const auto& p = plan.periods[k];
      const auto& f = inst.forecasts[k];
      const double dt = 0.25;
      const double pv = f.non_steerable_kw[0] * (1.0 - p.curtail[0]);
      const double net = pv - f.non_flexible_kw[0] - bat.p_charge_max * p.charge[0] + bat.p_discharge_max * p.discharge[0];
      EXPECT_NEAR((p.export_kwh - p.import_kwh) / dt, net, 1e-7);
      EXPECT_LE(p.export_kwh * p.import_kwh, 1e-9);
      const double up = p.reserve_up[0] + f.non_steerable_kw[0] * p.curtail[0];
      const double down = p.reserve_down[0] + f.non_steerable_kw[0] * (1.0 - p.curtail[0]);
      EXPECT_LE(p.reserve_sym_kw, up + 1e-7);
      EXPECT_LE(p.reserve_sym_kw, down + 1e-7);
      EXPECT_LE(p.reserve_up[0], (p.soc[0] - bat.s_min) * bat.eta_discharge / dt + 1e-7);
      EXPECT_LE(p.reserve_up[0], bat.p_discharge_max * (1.0 - p.discharge[0]) + 1e-7);
      EXPECT_GE(p.soc[0], bat.s_min - 1e-9);
      EXPECT_LE(p.soc[0], bat.s_max + 1e-9);
    }
    double total = 0.0;
    for (const auto& p : plan.periods) total += p.immediate_cost + p.delayed_cost;
    EXPECT_NEAR(total, plan.objective, 1e-6);
  }
}

TEST(Opp, WarmResolveMatchesColdSolve) {
  std::mt19937_64 rng(31);
  const auto inst = random_opp_instance(rng, 32);
  ParametricOpp opp(inst);
  const double smax = inst.fleet.storage[0].s_max;
  for (double frac : {0.5, 0.1, 0.9, 0.0, 1.0, 0.33}) {
    const std::vector<double> s{smax * frac};
    EXPECT_NEAR(opp.solve(s).objective, solve_opp(inst, s).objective, 1e-7);
  }
}

TEST(Opp, FullHorizonSolveTime) {
  std::mt19937_64 rng(41);
  for (double reserve : {0.0, 20.0}) {
    auto inst = random_opp_instance(rng, 96);
    inst.contract.reserve_price_op = reserve;
    const auto t0 = std::chrono::steady_clock::now();
    ParametricOpp opp(inst);
    const auto cold = opp.solve(inst.initial_soc);
    const auto t1 = std::chrono::steady_clock::now();
    for (int g = 0; g < 10; ++g) (void)opp.solve(std::vector<double>{inst.fleet.storage[0].s_max * g / 9.0});
    const auto t2 = std::chrono::steady_clock::now();
    const double cold_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double warm_ms = std::chrono::duration<double, std::milli>(t2 - t1).count() / 10.0;
    std::printf("reserve %.0f: rows %d cold %.1f ms (%d it) warm %.2f ms\n", reserve, opp.model().lp.num_rows(),
                cold_ms, cold.iterations, warm_ms);
    EXPECT_LT(cold_ms, 5000.0);
  }
}

}  // namespace

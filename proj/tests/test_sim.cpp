#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mgc/io.hpp"
#include "mgc/sim.hpp"

namespace {

using namespace mgc;
using mgc::testing::battery_fleet;

MicrogridState state_with(const DeviceFleet& fleet, double soc) {
  MicrogridState s = initial_state(fleet, GridContract{});
  s.soc = {soc};
  return s;
}

const double kMinute = 1.0 / 60.0;

TEST(Rbc, SurplusChargesBattery) {
  const auto fleet = battery_fleet();
  const auto a = rbc_step(split_sample(fleet, 300.0, 100.0), state_with(fleet, 100.0), fleet, kMinute);
  EXPECT_NEAR(a.charge[0] * 1350.0, 200.0, 1e-9);
  EXPECT_EQ(a.discharge[0], 0.0);
  EXPECT_NEAR(a.export_kwh, 0.0, 1e-12);
  EXPECT_NEAR(a.import_kwh, 0.0, 1e-12);
}

TEST(Rbc, EmptyBatteryImports) {
  const auto fleet = battery_fleet(0.0);
  const auto a = rbc_step(split_sample(fleet, 0.0, 100.0), state_with(fleet, 0.0), fleet, kMinute);
  EXPECT_EQ(a.discharge[0], 0.0);
  EXPECT_NEAR(a.import_kwh / kMinute, 100.0, 1e-9);
}

TEST(Rbc, FullBatteryExports) {
  const auto fleet = battery_fleet(1350.0);
  const auto a = rbc_step(split_sample(fleet, 300.0, 100.0), state_with(fleet, 1350.0), fleet, kMinute);
  EXPECT_EQ(a.charge[0], 0.0);
  EXPECT_NEAR(a.export_kwh / kMinute, 200.0, 1e-9);
}

TEST(Plant, FullChargeForOneMinute) {
  const auto fleet = battery_fleet(0.0);
  auto state = state_with(fleet, 0.0);
  auto a = idle_actions(fleet);
  a.charge[0] = 1.0;
  const auto f = apply_step(a, split_sample(fleet, 0.0, 0.0), state, fleet, GridContract{}, make_instant(2019, 5, 22, 3),
                            minutes{1});
  EXPECT_NEAR(state.soc[0], 21.375, 1e-12);
  EXPECT_NEAR(f.import_kwh, 1350.0 / 60.0, 1e-12);
  EXPECT_NEAR(f.energy_cost_eur, 0.12 * 22.5, 1e-12);  // night tariff
  EXPECT_LE(std::abs(f.residual_kw), 1e-9);
}

TEST(Plant, DischargeClippedWhenNearlyEmpty) {
  const auto fleet = battery_fleet(1.0);
  auto state = state_with(fleet, 1.0);
  auto a = idle_actions(fleet);
  a.discharge[0] = 1.0;
  const auto f = apply_step(a, split_sample(fleet, 0.0, 500.0), state, fleet, GridContract{}, make_instant(2019, 5, 22, 12),
                            minutes{1});
  EXPECT_NEAR(state.soc[0], 0.0, 1e-12);
  EXPECT_NEAR(f.discharge_kw[0], 1.0 * 0.95 * 60.0, 1e-9);
  EXPECT_NEAR(f.import_kwh * 60.0, 500.0 - 57.0, 1e-9);
}

TEST(Plant, IdleWhenPvMatchesLoad) {
  const auto fleet = battery_fleet(500.0);
  auto state = state_with(fleet, 500.0);
  const auto f = apply_step(idle_actions(fleet), split_sample(fleet, 250.0, 250.0), state, fleet, GridContract{},
                            make_instant(2019, 5, 22, 12), minutes{1});
  EXPECT_EQ(f.import_kwh, 0.0);
  EXPECT_EQ(f.export_kwh, 0.0);
  EXPECT_EQ(state.soc[0], 500.0);
}

TEST(Plant, ImportCapShedsAfterStorage) {
  DeviceFleet fleet;
  fleet.non_flexible_loads[0].share = 0.5;
  fleet.sheddable_loads.push_back({"hvac", 0.5, 1.0});
  GridContract ct;
  ct.import_cap = 100.0;
  MicrogridState state = initial_state(fleet, ct);
  const auto f = apply_step(idle_actions(fleet), split_sample(fleet, 0.0, 160.0), state, fleet, ct,
                            make_instant(2019, 5, 22, 12), minutes{1});
  EXPECT_FALSE(f.fault);
  EXPECT_NEAR(f.import_kwh * 60.0, 100.0, 1e-9);
  EXPECT_NEAR(f.shed_kw, 60.0, 1e-9);
  EXPECT_NEAR(f.device_cost_eur, 60.0 / 60.0, 1e-9);
  EXPECT_FALSE(f.remediations.empty());
}

TEST(Plant, ExportCapCurtailsPv) {
  DeviceFleet fleet;
  GridContract ct;
  ct.export_cap = 50.0;
  MicrogridState state = initial_state(fleet, ct);
  const auto f = apply_step(idle_actions(fleet), split_sample(fleet, 200.0, 100.0), state, fleet, ct,
                            make_instant(2019, 5, 22, 12), minutes{1});
  EXPECT_FALSE(f.fault);
  EXPECT_NEAR(f.export_kwh * 60.0, 50.0, 1e-9);
  EXPECT_NEAR(f.curtailed_kw, 50.0, 1e-9);
}

TEST(Settlement, PeakIncrementCharged) {
  PeriodTotals t;
  t.import_kwh = 167.0 / 4.0;
  const auto s = settle_period(t, 150.0, 0.0, 0.0, 1, GridContract{}, 0.25);
  EXPECT_NEAR(s.peak_increment_kw, 17.0, 1e-12);
  EXPECT_NEAR(s.peak_cost_eur, 680.0, 1e-9);
  EXPECT_NEAR(s.new_peak_kw, 167.0, 1e-12);
}

TEST(Settlement, LargeIncrementInKiloEuro) {
  PeriodTotals t;
  t.import_kwh = 317.0 / 4.0;
  const auto s = settle_period(t, 150.0, 0.0, 0.0, 1, GridContract{}, 0.25);
  CostLedger l;
  l.peak_price = 40.0;
  l.apply(s, t);
  EXPECT_NEAR(l.delta_p_kw, 167.0, 1e-9);
  EXPECT_NEAR(l.c_p_keur, 6.68, 1e-9);
  EXPECT_TRUE(l.identities_hold());
}

TEST(Settlement, NoPeakCostBelowHistorical) {
  PeriodTotals t;
  t.import_kwh = 20.0;
  t.export_kwh = 5.0;
  const auto s = settle_period(t, 150.0, 0.0, 0.0, 1, GridContract{}, 0.25);
  EXPECT_EQ(s.peak_increment_kw, 0.0);
  EXPECT_NEAR(s.average_kw, 60.0, 1e-12);
}

TEST(Settlement, ReserveRevenueAndShortfall) {
  GridContract ct;
  ct.reserve_price_op = 20.0;
  ct.reserve_penalty_rto = 20.0;
  const PeriodTotals t;
  const auto full = settle_period(t, 150.0, 100.0, 100.0, 1, ct, 0.25);
  EXPECT_NEAR(full.reserve_revenue_eur, 2000.0, 1e-9);
  EXPECT_EQ(full.shortfall_penalty_eur, 0.0);
  const auto part = settle_period(t, 150.0, 100.0, 60.0, 1, ct, 0.25);
  EXPECT_NEAR(part.shortfall_penalty_eur, 800.0, 1e-9);
  const auto active = settle_period(t, 150.0, 100.0, 60.0, 0, ct, 0.25);
  EXPECT_EQ(active.shortfall_penalty_eur, 0.0);
  EXPECT_NEAR(part.energy_total_eur(), -1200.0, 1e-9);
}

Scenario constant_scenario(double pv, double load, int periods) {
  Scenario sc;
  sc.start = make_instant(2019, 5, 22);
  sc.pv_kw.assign(periods * 15, pv);
  sc.load_kw.assign(periods * 15, load);
  return sc;
}

TEST(Simulation, BalancedDataCostsNothing) {
  const Scenario sc = constant_scenario(200.0, 200.0, 8);
  SimulationConfig cfg;
  cfg.fleet = battery_fleet(100.0);
  cfg.controller = ControllerKind::Rbc;
  const auto rbc = simulate(sc, cfg);
  EXPECT_EQ(rbc.ledger.c_t_keur, 0.0);
  EXPECT_EQ(rbc.ledger.i_tot_mwh, 0.0);
  EXPECT_EQ(rbc.periods.size(), 8u);

  cfg.fleet.storage.clear();
  cfg.controller = ControllerKind::RtoOp;
  cfg.clock.horizon = hours{2};
  const auto rto = simulate(sc, cfg);
  EXPECT_NEAR(rto.ledger.c_t_keur, 0.0, 1e-12);
  EXPECT_EQ(rto.fallbacks, 0);
  EXPECT_EQ(rto.rto_solves, sc.size());
}

TEST(Simulation, RejectsMisalignedScenario) {
  Scenario sc = constant_scenario(0.0, 10.0, 2);
  sc.start += minutes{3};
  SimulationConfig cfg;
  EXPECT_THROW(simulate(sc, cfg), ConfigError);
  Scenario gap = constant_scenario(0.0, 10.0, 2);
  gap.load_kw[7] = std::nan("");
  EXPECT_THROW(simulate(gap, cfg), ConfigError);
}

TEST(Simulation, InfeasiblePlannerFallsBackToRules) {
  const Scenario sc = constant_scenario(0.0, 50.0, 4);
  SimulationConfig cfg;
  cfg.fleet = battery_fleet(0.0);
  cfg.fleet.storage[0].p_charge_max = 1.0;
  cfg.fleet.storage[0].s_end = 1350.0;  // unreachable
  cfg.clock.horizon = hours{2};
  const auto rep = simulate(sc, cfg);
  EXPECT_EQ(rep.rule_based_steps, sc.size());
  EXPECT_GT(rep.fallbacks, 0);
  ASSERT_FALSE(rep.events.empty());
  EXPECT_NE(rep.events.front().find("planner infeasible"), std::string::npos);
}

class OneDay : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = case_preset(1);
    cfg_.synth.days = 1;
    cfg_.synth.drop_day = 0;
    scenario_ = synthesize(cfg_.synth);
    cfg_.sim.controller = ControllerKind::Rbc;
    rbc_ = simulate(scenario_, cfg_.sim);
    cfg_.sim.controller = ControllerKind::RtoOp;
    cfg_.sim.forecaster.kind = "perfect";
    rto_ = simulate(scenario_, cfg_.sim);
  }
  static CaseConfig cfg_;
  static Scenario scenario_;
  static SimulationReport rbc_, rto_;
};
CaseConfig OneDay::cfg_;
Scenario OneDay::scenario_;
SimulationReport OneDay::rbc_, OneDay::rto_;

TEST_F(OneDay, PlannerWithPerfectForecastBeatsRules) {
  EXPECT_LE(rto_.ledger.c_t_keur, rbc_.ledger.c_t_keur + 1e-9)
      << "RTO-OP " << rto_.ledger.c_t_keur << " RBC " << rbc_.ledger.c_t_keur;
  EXPECT_EQ(rto_.fallbacks, 0);
}

TEST_F(OneDay, LedgerIdentitiesAndBalance) {
  for (const auto* r : {&rbc_, &rto_}) {
    EXPECT_TRUE(r->ledger.identities_hold());
    EXPECT_LE(r->max_residual_kw, 1e-6);
    EXPECT_EQ(r->faults, 0);
    EXPECT_EQ(r->periods.size(), 96u);
    double dp = 0.0, imp = 0.0;
    for (const auto& p : r->periods) {
      dp += p.peak_increment_kw;
      imp += p.import_kwh;
    }
    EXPECT_NEAR(dp, r->ledger.delta_p_kw, 1e-9);
    EXPECT_NEAR(imp / 1000.0, r->ledger.i_tot_mwh, 1e-9);
    EXPECT_NEAR(r->final_peak_kw, r->initial_peak_kw + r->ledger.delta_p_kw, 1e-9);
  }
}

TEST_F(OneDay, RulesImportOnlyWhenEmptyAndExportOnlyWhenFull) {
  ASSERT_EQ(rbc_.step_records.size(), 1440u);
  for (const auto& s : rbc_.step_records) {
    if (s.import_kw > 1e-9) EXPECT_LE(s.soc[0], 1e-6) << format_instant(s.time);
    if (s.export_kw > 1e-9) EXPECT_GE(s.soc[0], 1350.0 - 1e-6) << format_instant(s.time);
  }
}

TEST_F(OneDay, HistoricalPeakNeverDecreases) {
  for (const auto* r : {&rbc_, &rto_}) {
    double last = r->initial_peak_kw;
    for (const auto& p : r->periods) {
      EXPECT_GE(p.historical_peak_kw, last);
      last = p.historical_peak_kw;
    }
  }
}

TEST_F(OneDay, SocStaysWithinLimits) {
  for (const auto& s : rto_.step_records) {
    EXPECT_GE(s.soc[0], -1e-9);
    EXPECT_LE(s.soc[0], 1350.0 + 1e-9);
  }
}

TEST_F(OneDay, Deterministic) {
  const auto again = simulate(scenario_, cfg_.sim);
  EXPECT_EQ(again.ledger.c_t_keur, rto_.ledger.c_t_keur);
  EXPECT_EQ(again.ledger.i_tot_mwh, rto_.ledger.i_tot_mwh);
  EXPECT_EQ(again.events, rto_.events);
  std::ostringstream a, b;
  write_periods_csv(again, a);
  write_periods_csv(rto_, b);
  EXPECT_EQ(a.str(), b.str());
}

}  // namespace

#pragma once

// Rolling closed-loop simulation over measured data: the rule-based
// baseline and the two-level planner / real-time optimizer controller,
// minute-level plant model, per-period settlement and the cost ledger.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgc/domain.hpp"
#include "mgc/forecast.hpp"
#include "mgc/opp.hpp"
#include "mgc/rto.hpp"
#include "mgc/scenario.hpp"
#include "mgc/valuefn.hpp"

namespace mgc {

inline RtoActions idle_actions(const DeviceFleet& fleet) {
  RtoActions a;
  a.shed.assign(fleet.sheddable_loads.size(), 0.0);
  a.steer.assign(fleet.steerable_generators.size(), 0.0);
  a.curtail.assign(fleet.non_steerable_generators.size(), 0.0);
  a.charge.assign(fleet.storage.size(), 0.0);
  a.discharge.assign(fleet.storage.size(), 0.0);
  a.soc_end.assign(fleet.storage.size(), 0.0);
  return a;
}

/// PV first: surplus charges the storage, what is left is exported; a
/// deficit is covered by discharging, the rest is imported.
inline RtoActions rbc_step(const DeviceSample& measured, const MicrogridState& state, const DeviceFleet& fleet,
                           double dt_hours) {
  RtoActions a = idle_actions(fleet);
  a.rule_based = true;
  double surplus = measured.total_pv_kw() - measured.total_load_kw();
  for (std::size_t d = 0; d < fleet.storage.size(); ++d) {
    const auto& s = fleet.storage[d];
    const double soc = state.soc[d];
    if (surplus > 0.0 && s.p_charge_max > 0.0) {
      const double room = std::max(0.0, (s.s_max - soc) / (s.eta_charge * dt_hours));
      const double c = std::min({surplus, s.p_charge_max, room});
      a.charge[d] = c / s.p_charge_max;
      surplus -= c;
    } else if (surplus < 0.0 && s.p_discharge_max > 0.0) {
      const double avail = std::max(0.0, (soc - s.s_min) * s.eta_discharge / dt_hours);
      const double p = std::min({-surplus, s.p_discharge_max, avail});
      a.discharge[d] = p / s.p_discharge_max;
      surplus += p;
    }
    a.soc_end[d] = soc + dt_hours * (s.p_charge_max * s.eta_charge * a.charge[d] -
                                     s.p_discharge_max / s.eta_discharge * a.discharge[d]);
  }
  a.export_kwh = std::max(0.0, surplus) * dt_hours;
  a.import_kwh = std::max(0.0, -surplus) * dt_hours;
  return a;
}

struct StepFlows {
  double import_kwh = 0.0;
  double export_kwh = 0.0;
  std::vector<double> charge_kw, discharge_kw;
  double pv_delivered_kw = 0.0;
  double curtailed_kw = 0.0;
  double steer_kw = 0.0;
  double load_served_kw = 0.0;
  double shed_kw = 0.0;
  double energy_cost_eur = 0.0;  // imports at tariff minus export revenue
  double device_cost_eur = 0.0;
  double residual_kw = 0.0;      // balance check
  std::vector<std::string> remediations;
  bool fault = false;
};

/// Applies set-points for one step of actual data: storage follows its
/// set-points clipped to state-of-charge limits, the grid takes the balance.
/// Grid caps are restored by adjusting storage, then curtailing generation
/// or shedding load; anything left is a fault.
inline StepFlows apply_step(const RtoActions& a, const DeviceSample& actual, MicrogridState& state,
                            const DeviceFleet& fleet, const GridContract& ct, Instant t, minutes step) {
  const double dt = to_hours(step);
  const std::size_t n = fleet.storage.size();
  StepFlows f;
  f.charge_kw.resize(n);
  f.discharge_kw.resize(n);
  auto soc_after = [&](std::size_t d) {
    const auto& s = fleet.storage[d];
    return state.soc[d] + dt * (f.charge_kw[d] * s.eta_charge - f.discharge_kw[d] / s.eta_discharge);
  };
  auto max_charge = [&](std::size_t d) {
    const auto& s = fleet.storage[d];
    const double room = (s.s_max - state.soc[d] + dt * f.discharge_kw[d] / s.eta_discharge) / (dt * s.eta_charge);
    return std::clamp(room, 0.0, s.p_charge_max);
  };
  auto max_discharge = [&](std::size_t d) {
    const auto& s = fleet.storage[d];
    const double avail = (state.soc[d] - s.s_min + dt * f.charge_kw[d] * s.eta_charge) * s.eta_discharge / dt;
    return std::clamp(avail, 0.0, s.p_discharge_max);
  };
  for (std::size_t d = 0; d < n; ++d) {
    const auto& s = fleet.storage[d];
    f.charge_kw[d] = s.p_charge_max * std::clamp(a.charge[d], 0.0, 1.0);
    f.discharge_kw[d] = s.p_discharge_max * std::clamp(a.discharge[d], 0.0, 1.0);
    if (soc_after(d) > s.s_max) f.charge_kw[d] = max_charge(d);
    if (soc_after(d) < s.s_min) f.discharge_kw[d] = max_discharge(d);
  }

  double pv_total = 0.0;
  for (std::size_t d = 0; d < actual.non_steerable_kw.size(); ++d) {
    pv_total += actual.non_steerable_kw[d];
    f.pv_delivered_kw += actual.non_steerable_kw[d] * (1.0 - std::clamp(a.curtail[d], 0.0, 1.0));
  }
  for (std::size_t d = 0; d < actual.steerable_kw.size(); ++d) f.steer_kw += actual.steerable_kw[d] * std::clamp(a.steer[d], 0.0, 1.0);
  std::vector<double> served(actual.sheddable_kw.size());
  for (double c : actual.non_flexible_kw) f.load_served_kw += c;
  for (std::size_t d = 0; d < served.size(); ++d) {
    served[d] = actual.sheddable_kw[d] * (1.0 - std::clamp(a.shed[d], 0.0, 1.0));
    f.load_served_kw += served[d];
  }

  auto net_import = [&] {
    double net = f.load_served_kw - f.pv_delivered_kw - f.steer_kw;
    for (std::size_t d = 0; d < n; ++d) net += f.charge_kw[d] - f.discharge_kw[d];
    return net;
  };
  const double tol = 1e-9;
  double net = net_import();
  if (net > ct.import_cap + tol) {
    for (std::size_t d = 0; d < n && net > ct.import_cap; ++d) {
      const double cut = std::min(f.charge_kw[d], net - ct.import_cap);
      f.charge_kw[d] -= cut;
      net -= cut;
      const double add = std::min(max_discharge(d) - f.discharge_kw[d], net - ct.import_cap);
      if (add > 0.0) {
        f.discharge_kw[d] += add;
        net -= add;
      }
    }
    f.remediations.push_back("storage adjusted for import cap");
    if (net > ct.import_cap + tol) {
      for (std::size_t d = 0; d < served.size() && net > ct.import_cap; ++d) {
        const double shed = std::min(served[d], net - ct.import_cap);
        served[d] -= shed;
        f.load_served_kw -= shed;
        net -= shed;
      }
      f.remediations.push_back("load shed for import cap");
    }
  } else if (net < -ct.export_cap - tol) {
    for (std::size_t d = 0; d < n && net < -ct.export_cap; ++d) {
      const double cut = std::min(f.discharge_kw[d], -ct.export_cap - net);
      f.discharge_kw[d] -= cut;
      net += cut;
      const double add = std::min(max_charge(d) - f.charge_kw[d], -ct.export_cap - net);
      if (add > 0.0) {
        f.charge_kw[d] += add;
        net += add;
      }
    }
    f.remediations.push_back("storage adjusted for export cap");
    if (net < -ct.export_cap - tol) {
      const double cut_pv = std::min(f.pv_delivered_kw, -ct.export_cap - net);
      f.pv_delivered_kw -= cut_pv;
      net += cut_pv;
      const double cut_ste = std::min(f.steer_kw, -ct.export_cap - net);
      f.steer_kw -= std::max(0.0, cut_ste);
      net += std::max(0.0, cut_ste);
      f.remediations.push_back("generation curtailed for export cap");
    }
  }
  net = net_import();
  if (net > ct.import_cap + 1e-6 || net < -ct.export_cap - 1e-6) f.fault = true;

  f.import_kwh = std::max(0.0, net) * dt;
  f.export_kwh = std::max(0.0, -net) * dt;
  f.curtailed_kw = pv_total - f.pv_delivered_kw;
  f.shed_kw = actual.total_load_kw() - f.load_served_kw;
  double storage_net = 0.0;
  for (std::size_t d = 0; d < n; ++d) storage_net += f.discharge_kw[d] - f.charge_kw[d];
  f.residual_kw = (f.import_kwh - f.export_kwh) / dt + f.pv_delivered_kw + f.steer_kw + storage_net - f.load_served_kw;

  double device = 0.0;
  for (std::size_t d = 0; d < served.size(); ++d) {
    device += fleet.sheddable_loads[d].shed_price * (actual.sheddable_kw[d] - served[d]);
  }
  for (std::size_t d = 0; d < fleet.steerable_generators.size(); ++d) {
    device += fleet.steerable_generators[d].gen_price * actual.steerable_kw[d] * std::clamp(a.steer[d], 0.0, 1.0);
  }
  for (std::size_t d = 0; d < fleet.non_steerable_generators.size(); ++d) {
    device += fleet.non_steerable_generators[d].curtail_price * actual.non_steerable_kw[d] * std::clamp(a.curtail[d], 0.0, 1.0);
  }
  for (std::size_t d = 0; d < n; ++d) {
    const auto& s = fleet.storage[d];
    device += s.usage_fee * (f.charge_kw[d] * s.eta_charge + f.discharge_kw[d] / s.eta_discharge);
  }
  f.device_cost_eur = device * dt;
  f.energy_cost_eur = import_price_at(t, ct) * f.import_kwh - ct.export_price * f.export_kwh;

  for (std::size_t d = 0; d < n; ++d) {
    const auto& s = fleet.storage[d];
    state.soc[d] = std::clamp(soc_after(d), s.s_min, s.s_max);
  }
  state.period_import_kwh += f.import_kwh;
  state.period_export_kwh += f.export_kwh;
  state.elapsed_in_period += step;
  return f;
}

struct PeriodTotals {
  double import_kwh = 0.0;
  double export_kwh = 0.0;
  double energy_cost_eur = 0.0;
  double device_cost_eur = 0.0;
  double min_reserve_kw = std::numeric_limits<double>::infinity();

  void add(const StepFlows& f) {
    import_kwh += f.import_kwh;
    export_kwh += f.export_kwh;
    energy_cost_eur += f.energy_cost_eur;
    device_cost_eur += f.device_cost_eur;
  }
};

struct Settlement {
  double average_kw = 0.0;
  double peak_increment_kw = 0.0;
  double peak_cost_eur = 0.0;
  double new_peak_kw = 0.0;
  double energy_cost_eur = 0.0;
  double device_cost_eur = 0.0;
  double reserve_revenue_eur = 0.0;
  double shortfall_kw = 0.0;
  double shortfall_penalty_eur = 0.0;

  /// Contribution to c_E in EUR.
  [[nodiscard]] double energy_total_eur() const {
    return energy_cost_eur + device_cost_eur - reserve_revenue_eur + shortfall_penalty_eur;
  }
};

inline Settlement settle_period(const PeriodTotals& totals, double historical_peak, double committed_reserve_kw,
                                double realized_reserve_kw, int s_tso, const GridContract& ct, double period_hours) {
  Settlement s;
  s.average_kw = (totals.import_kwh - totals.export_kwh) / period_hours;
  s.peak_increment_kw = std::max(0.0, s.average_kw - historical_peak);
  s.peak_cost_eur = ct.peak_price * s.peak_increment_kw;
  s.new_peak_kw = historical_peak + s.peak_increment_kw;
  s.energy_cost_eur = totals.energy_cost_eur;
  s.device_cost_eur = totals.device_cost_eur;
  if (ct.reserve_enabled()) {
    s.reserve_revenue_eur = ct.reserve_price_op * committed_reserve_kw;
    s.shortfall_kw = std::max(0.0, committed_reserve_kw - realized_reserve_kw);
    s.shortfall_penalty_eur = s_tso * ct.reserve_penalty_rto * s.shortfall_kw;
  }
  return s;
}

/// Costs in kEUR, energies in MWh. Only settlement mutates it.
struct CostLedger {
  double peak_price = 0.0;  // EUR/kW
  double c_e_keur = 0.0;
  double c_p_keur = 0.0;
  double c_t_keur = 0.0;
  double delta_p_kw = 0.0;
  double i_tot_mwh = 0.0;
  double e_tot_mwh = 0.0;
  double reserve_revenue_keur = 0.0;
  double shortfall_penalty_keur = 0.0;

  void apply(const Settlement& s, const PeriodTotals& totals) {
    c_e_keur += s.energy_total_eur() / 1000.0;
    delta_p_kw += s.peak_increment_kw;
    c_p_keur = peak_price * delta_p_kw / 1000.0;
    c_t_keur = c_e_keur + c_p_keur;
    i_tot_mwh += totals.import_kwh / 1000.0;
    e_tot_mwh += totals.export_kwh / 1000.0;
    reserve_revenue_keur += s.reserve_revenue_eur / 1000.0;
    shortfall_penalty_keur += s.shortfall_penalty_eur / 1000.0;
  }

  [[nodiscard]] bool identities_hold() const {
    return c_t_keur == c_e_keur + c_p_keur && c_p_keur == peak_price * delta_p_kw / 1000.0 && delta_p_kw >= 0.0;
  }
};

enum class ControllerKind { Rbc, RtoOp };

inline std::string to_string(ControllerKind c) { return c == ControllerKind::Rbc ? "RBC" : "RTO-OP"; }

inline ControllerKind parse_controller(const std::string& s) {
  if (s == "rbc" || s == "RBC") return ControllerKind::Rbc;
  if (s == "rto-op" || s == "RTO-OP" || s == "rto_op") return ControllerKind::RtoOp;
  throw ConfigError("unknown controller '" + s + "'");
}

struct SimulationConfig {
  DeviceFleet fleet;
  GridContract contract;
  MarketClock clock;
  ControllerKind controller = ControllerKind::RtoOp;
  ForecasterSpec forecaster;
  CutOptions cuts;
  double bias = 0.0;
  bool record_steps = true;

  void validate() const {
    fleet.validate();
    contract.validate();
    clock.validate();
  }
};

struct StepRecord {
  Instant time{};
  double pv_kw = 0.0;
  double load_kw = 0.0;
  double import_kw = 0.0;
  double export_kw = 0.0;
  std::vector<double> soc;
  double reserve_kw = 0.0;
  bool rule_based = false;
};

struct PeriodRecord {
  Instant start{};
  double import_kwh = 0.0;
  double export_kwh = 0.0;
  double average_kw = 0.0;
  double peak_increment_kw = 0.0;
  double historical_peak_kw = 0.0;
  double cumulative_peak_cost_keur = 0.0;
  double cumulative_energy_cost_keur = 0.0;
  double reserve_committed_kw = 0.0;
  double reserve_realized_kw = 0.0;
  std::vector<double> soc_end;
  double plan_objective = 0.0;
  int cuts = 0;
};

struct SimulationReport {
  std::string controller;
  std::string forecaster;
  CostLedger ledger;
  double initial_peak_kw = 0.0;
  double final_peak_kw = 0.0;
  int steps = 0;
  int rto_solves = 0;
  int rule_based_steps = 0;
  int fallbacks = 0;
  int faults = 0;
  int remediations = 0;
  double max_residual_kw = 0.0;
  std::vector<std::string> events;
  std::vector<PeriodRecord> periods;
  std::vector<StepRecord> step_records;
};

namespace detail {

struct Plan {
  std::optional<ValueFunction> vf;
  double committed_reserve_kw = 0.0;
  double objective = 0.0;
};

inline Plan plan_at(const Scenario& sc, const SimulationConfig& cfg, const Forecaster& forecaster,
                    const MicrogridState& state, Instant t, std::vector<std::string>& events) {
  Plan out;
  const int n = cfg.clock.n_periods();
  try {
    const auto fc = forecaster.forecast(sc, t, n, cfg.clock);
    OppInstance inst = make_opp_instance(t, fc.pv_kw, fc.load_kw, cfg.fleet, cfg.contract, cfg.clock, state.historical_peak);
    inst.initial_soc = state.soc;
    inst.bias = cfg.bias;
    const auto plan = solve_opp(inst, state.soc);
    out.objective = plan.objective;
    out.committed_reserve_kw = plan.periods[0].reserve_sym_kw;
    const auto range = reachable_range(state.soc, cfg.clock.period_hours(), cfg.fleet);
    if (n == 1 || cfg.fleet.storage.empty()) {
      ValueFunction vf;
      vf.domain = range;
      vf.cuts.push_back({std::vector<double>(range.size(), 0.0), 0.0, std::vector<double>(range.size(), 0.0)});
      if (n > 1) vf.cuts[0].value = solve_opp(tail_instance(inst, 1), {}).objective;
      out.vf = std::move(vf);
      return out;
    }
    std::vector<double> s_star = plan.periods[0].soc;
    for (std::size_t d = 0; d < s_star.size(); ++d) s_star[d] = range[d].clamp(s_star[d]);
    ParametricOpp tail(tail_instance(inst, 1));
    out.vf = generate_cuts(tail, range, s_star, cfg.cuts);
    for (const auto& e : out.vf->events) events.push_back(format_instant(t) + " " + e);
  } catch (const OppInfeasible& e) {
    events.push_back(format_instant(t) + " planner infeasible: " + e.what());
    out.vf.reset();
  } catch (const lp::SolverFailure& e) {
    events.push_back(format_instant(t) + " planner failure: " + e.what());
    out.vf.reset();
  }
  return out;
}

}  // namespace detail

inline SimulationReport simulate(const Scenario& sc, const SimulationConfig& cfg) {
  cfg.validate();
  sc.validate(cfg.clock);
  const auto forecaster = make_forecaster(cfg.forecaster);
  const int spp = cfg.clock.steps_per_period();
  const double dtau = cfg.clock.period_hours();
  const double step_h = cfg.clock.step_hours();

  SimulationReport rep;
  rep.controller = to_string(cfg.controller);
  rep.forecaster = cfg.controller == ControllerKind::RtoOp ? forecaster->name() : "none";
  rep.ledger.peak_price = cfg.contract.peak_price;
  MicrogridState state = initial_state(cfg.fleet, cfg.contract);
  rep.initial_peak_kw = state.historical_peak;

  PeriodTotals totals;
  detail::Plan plan;
  PeriodRecord current;

  auto settle = [&](int period_index) {
    const double realized = std::isfinite(totals.min_reserve_kw) ? totals.min_reserve_kw : 0.0;
    const auto s = settle_period(totals, state.historical_peak, state.committed_reserve_kw, realized,
                                 sc.s_tso_at(period_index), cfg.contract, dtau);
    rep.ledger.apply(s, totals);
    state.historical_peak = s.new_peak_kw;
    current.import_kwh = totals.import_kwh;
    current.export_kwh = totals.export_kwh;
    current.average_kw = s.average_kw;
    current.peak_increment_kw = s.peak_increment_kw;
    current.historical_peak_kw = state.historical_peak;
    current.cumulative_peak_cost_keur = rep.ledger.c_p_keur;
    current.cumulative_energy_cost_keur = rep.ledger.c_e_keur;
    current.reserve_realized_kw = realized;
    current.soc_end = state.soc;
    rep.periods.push_back(current);
    state.reset_period();
    totals = PeriodTotals{};
  };

  for (int i = 0; i < sc.size(); ++i) {
    const Instant t = sc.time(i);
    const int period_index = i / spp;
    if (i % spp == 0) {
      if (i > 0) settle(period_index - 1);
      current = PeriodRecord{};
      current.start = t;
      state.committed_reserve_kw = 0.0;
      if (cfg.controller == ControllerKind::RtoOp) {
        plan = detail::plan_at(sc, cfg, *forecaster, state, t, rep.events);
        if (plan.vf) state.committed_reserve_kw = plan.committed_reserve_kw;
        current.plan_objective = plan.objective;
        current.cuts = plan.vf ? static_cast<int>(plan.vf->cuts.size()) : 0;
      }
      current.reserve_committed_kw = state.committed_reserve_kw;
    }

    const DeviceSample actual = split_sample(cfg.fleet, sc.pv_kw[i], sc.load_kw[i]);
    RtoActions a;
    bool have = false;
    if (cfg.controller == ControllerKind::RtoOp && plan.vf) {
      RtoContext ctx;
      ctx.now = t;
      ctx.dt_hours = time_to_boundary_hours(t, cfg.clock);
      ctx.period_hours = dtau;
      ctx.soc = state.soc;
      ctx.historical_peak = state.historical_peak;
      ctx.realized_average_kw = state.realized_average_kw();
      ctx.forecast = actual;
      ctx.vf = &*plan.vf;
      ctx.committed_reserve_kw = state.committed_reserve_kw;
      ctx.s_tso = sc.s_tso_at(period_index);
      ctx.fleet = cfg.fleet;
      ctx.contract = cfg.contract;
      ctx.bias = cfg.bias;
      try {
        a = solve_rtp(ctx);
        have = true;
        ++rep.rto_solves;
      } catch (const RtoInfeasible& e) {
        rep.events.push_back(format_instant(t) + " RTO fallback: " + e.what());
      } catch (const lp::SolverFailure& e) {
        rep.events.push_back(format_instant(t) + " RTO fallback: " + e.what());
      }
      if (!have) ++rep.fallbacks;
    } else if (cfg.controller == ControllerKind::RtoOp) {
      ++rep.fallbacks;
    }
    if (!have) {
      a = rbc_step(actual, state, cfg.fleet, step_h);
      ++rep.rule_based_steps;
    }
    totals.min_reserve_kw = std::min(totals.min_reserve_kw, a.reserve_sym_kw);

    const auto flows = apply_step(a, actual, state, cfg.fleet, cfg.contract, t, cfg.clock.step);
    totals.add(flows);
    rep.max_residual_kw = std::max(rep.max_residual_kw, std::abs(flows.residual_kw));
    if (!flows.remediations.empty()) {
      ++rep.remediations;
      for (const auto& r : flows.remediations) rep.events.push_back(format_instant(t) + " " + r);
    }
    if (flows.fault) {
      ++rep.faults;
      rep.events.push_back(format_instant(t) + " fault: grid cap violated after remediation");
    }
    if (cfg.record_steps) {
      rep.step_records.push_back({t, sc.pv_kw[i], sc.load_kw[i], flows.import_kwh / step_h, flows.export_kwh / step_h,
                                  state.soc, a.reserve_sym_kw, a.rule_based});
    }
    ++rep.steps;
  }
  settle(sc.size() / spp - 1);
  rep.final_peak_kw = state.historical_peak;
  return rep;
}

}  // namespace mgc

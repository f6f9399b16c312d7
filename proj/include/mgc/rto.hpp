#pragma once

// Real-time optimizer: one set-point held from now until the next market
// boundary, dt hours away. The peak of the running period blends the power
// already realized with the planned remainder; the cost-to-go beyond the
// boundary enters through the value function epigraph theta.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "mgc/domain.hpp"
#include "mgc/lp.hpp"
#include "mgc/opp.hpp"
#include "mgc/valuefn.hpp"

namespace mgc {

struct RtoContext {
  Instant now{};
  double dt_hours = 0.0;             // time left to the boundary
  double period_hours = 0.25;
  std::vector<double> soc;           // kWh
  double historical_peak = 0.0;      // kW
  double realized_average_kw = 0.0;  // average net import since the period began
  DeviceSample forecast;             // held until the boundary
  const ValueFunction* vf = nullptr;
  double committed_reserve_kw = 0.0;
  int s_tso = 1;                     // 0 when the reserve is activated
  DeviceFleet fleet;
  GridContract contract;
  double bias = 0.0;

  [[nodiscard]] double beta() const { return 1.0 - dt_hours / period_hours; }

  void validate() const {
    if (!(dt_hours > 0.0 && dt_hours <= period_hours + 1e-12)) throw ConfigError("RTO step must lie in (0, period]");
    if (!std::isfinite(realized_average_kw)) throw ConfigError("realized average power is not finite");
    if (soc.size() != fleet.storage.size()) throw ConfigError("state size does not match storage fleet");
    if (s_tso != 0 && s_tso != 1) throw ConfigError("s_tso must be 0 or 1");
    if (vf && vf->domain.size() != soc.size()) throw ConfigError("value function dimension mismatch");
  }
};

struct RtoActions {
  std::vector<double> shed, steer, curtail, charge, discharge;
  double export_kwh = 0.0;  // over dt
  double import_kwh = 0.0;
  double reserve_sym_kw = 0.0;
  double reserve_shortfall_kw = 0.0;
  double peak_increment_kw = 0.0;
  double period_power_kw = 0.0;  // blended period average
  double theta = 0.0;
  double immediate_cost = 0.0;
  double delayed_cost = 0.0;
  double objective = 0.0;
  std::vector<double> soc_end;
  bool rule_based = false;  // produced by the rule-based controller
};

class RtoInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RtoLayout {
  std::vector<int> shed, steer, curtail, charge, discharge, soc_end, r_up, r_down;
  int exp = -1, imp = -1, dp = -1, r_sym = -1, shortfall = -1, theta = -1;
};

struct RtoModel {
  lp::LpModel lp;
  RtoLayout layout;
};

inline RtoModel build_rtp(const RtoContext& ctx) {
  ctx.validate();
  using lp::Sense;
  using lp::Term;
  const auto& fleet = ctx.fleet;
  const auto& ct = ctx.contract;
  const auto& f = ctx.forecast;
  const double dt = ctx.dt_hours;
  const double dtau = ctx.period_hours;
  const int n_sto = static_cast<int>(fleet.storage.size());
  const bool reserve = ct.reserve_enabled();

  RtoModel out;
  auto& m = out.lp;
  auto& L = out.layout;
  for (std::size_t d = 0; d < fleet.sheddable_loads.size(); ++d) {
    L.shed.push_back(m.add_variable(0, 1, dt * fleet.sheddable_loads[d].shed_price * f.sheddable_kw[d], indexed("a_she", d)));
  }
  for (std::size_t d = 0; d < fleet.steerable_generators.size(); ++d) {
    L.steer.push_back(m.add_variable(0, 1, dt * fleet.steerable_generators[d].gen_price * f.steerable_kw[d], indexed("a_ste", d)));
  }
  for (std::size_t d = 0; d < fleet.non_steerable_generators.size(); ++d) {
    L.curtail.push_back(m.add_variable(0, 1, dt * fleet.non_steerable_generators[d].curtail_price * f.non_steerable_kw[d], indexed("a_nst", d)));
  }
  for (int d = 0; d < n_sto; ++d) {
    const auto& s = fleet.storage[d];
    L.charge.push_back(m.add_variable(0, 1, dt * s.usage_fee * s.p_charge_max * s.eta_charge, indexed("a_cha", d)));
    L.discharge.push_back(m.add_variable(0, 1, dt * s.usage_fee * s.p_discharge_max / s.eta_discharge, indexed("a_dis", d)));
    L.soc_end.push_back(m.add_variable(s.s_min, s.s_max, -ctx.bias, indexed("soc_end", d)));
  }
  L.exp = m.add_variable(0, ct.export_cap * dt, -ct.export_price, "e_gri");
  L.imp = m.add_variable(0, ct.import_cap * dt, import_price_at(ctx.now, ct), "i_gri");
  L.dp = m.add_variable(0, lp::kInfinity, ct.peak_price, "dp");
  if (reserve) {
    for (int d = 0; d < n_sto; ++d) {
      L.r_up.push_back(m.add_variable(0, lp::kInfinity, 0.0, indexed("r_up", d)));
      L.r_down.push_back(m.add_variable(0, lp::kInfinity, 0.0, indexed("r_dn", d)));
    }
    L.r_sym = m.add_variable(0, lp::kInfinity, 0.0, "r_sym");
    L.shortfall = m.add_variable(0, lp::kInfinity, ctx.s_tso * ct.reserve_penalty_rto, "dr_sym");
  }
  if (ctx.vf) L.theta = m.add_variable(-lp::kInfinity, lp::kInfinity, 1.0, "theta");

  std::vector<Term> terms;
  terms.push_back({L.exp, 1.0 / dt});
  terms.push_back({L.imp, -1.0 / dt});
  double rhs = 0.0;
  for (std::size_t d = 0; d < L.curtail.size(); ++d) {
    terms.push_back({L.curtail[d], f.non_steerable_kw[d]});
    rhs += f.non_steerable_kw[d];
  }
  for (std::size_t d = 0; d < L.steer.size(); ++d) terms.push_back({L.steer[d], -f.steerable_kw[d]});
  for (double c : f.non_flexible_kw) rhs -= c;
  for (std::size_t d = 0; d < L.shed.size(); ++d) {
    terms.push_back({L.shed[d], -f.sheddable_kw[d]});
    rhs -= f.sheddable_kw[d];
  }
  for (int d = 0; d < n_sto; ++d) {
    terms.push_back({L.charge[d], fleet.storage[d].p_charge_max});
    terms.push_back({L.discharge[d], -fleet.storage[d].p_discharge_max});
  }
  m.add_row("balance", Sense::Equal, rhs, terms);

  for (int d = 0; d < n_sto; ++d) {
    const auto& s = fleet.storage[d];
    m.add_row(indexed("soc", d), Sense::Equal, ctx.soc[d],
              {{L.soc_end[d], 1.0},
               {L.charge[d], -dt * s.p_charge_max * s.eta_charge},
               {L.discharge[d], dt * s.p_discharge_max / s.eta_discharge}});
  }

  // Period power beta*p_realized + (1 - beta)*(i - e)/dt.
  m.add_row("peak", Sense::GreaterEqual, ctx.beta() * ctx.realized_average_kw - ctx.historical_peak,
            {{L.dp, 1.0}, {L.imp, -1.0 / dtau}, {L.exp, 1.0 / dtau}});

  if (reserve) {
    for (int d = 0; d < n_sto; ++d) {
      const auto& s = fleet.storage[d];
      m.add_row(indexed("rup_soc", d), Sense::LessEqual, -s.s_min * s.eta_discharge / dtau,
                {{L.r_up[d], 1.0}, {L.soc_end[d], -s.eta_discharge / dtau}});
      m.add_row(indexed("rup_pow", d), Sense::LessEqual, s.p_discharge_max,
                {{L.r_up[d], 1.0}, {L.discharge[d], s.p_discharge_max}});
      m.add_row(indexed("rdn_soc", d), Sense::LessEqual, s.s_max / (s.eta_charge * dtau),
                {{L.r_down[d], 1.0}, {L.soc_end[d], 1.0 / (s.eta_charge * dtau)}});
      m.add_row(indexed("rdn_pow", d), Sense::LessEqual, s.p_charge_max,
                {{L.r_down[d], 1.0}, {L.charge[d], s.p_charge_max}});
    }
    terms.clear();
    terms.push_back({L.r_sym, 1.0});
    double up_rhs = 0.0;
    for (int d = 0; d < n_sto; ++d) terms.push_back({L.r_up[d], -1.0});
    for (std::size_t d = 0; d < L.steer.size(); ++d) {
      terms.push_back({L.steer[d], f.steerable_kw[d]});
      up_rhs += f.steerable_kw[d];
    }
    for (std::size_t d = 0; d < L.curtail.size(); ++d) terms.push_back({L.curtail[d], -f.non_steerable_kw[d]});
    for (std::size_t d = 0; d < L.shed.size(); ++d) {
      terms.push_back({L.shed[d], f.sheddable_kw[d]});
      up_rhs += f.sheddable_kw[d];
    }
    m.add_row("rsym_up", Sense::LessEqual, up_rhs, terms);
    terms.clear();
    terms.push_back({L.r_sym, 1.0});
    double dn_rhs = 0.0;
    for (int d = 0; d < n_sto; ++d) terms.push_back({L.r_down[d], -1.0});
    for (std::size_t d = 0; d < L.steer.size(); ++d) terms.push_back({L.steer[d], -f.steerable_kw[d]});
    for (std::size_t d = 0; d < L.curtail.size(); ++d) {
      terms.push_back({L.curtail[d], f.non_steerable_kw[d]});
      dn_rhs += f.non_steerable_kw[d];
    }
    for (std::size_t d = 0; d < L.shed.size(); ++d) terms.push_back({L.shed[d], -f.sheddable_kw[d]});
    m.add_row("rsym_dn", Sense::LessEqual, dn_rhs, terms);
    m.add_row("shortfall", Sense::GreaterEqual, ctx.committed_reserve_kw, {{L.shortfall, 1.0}, {L.r_sym, 1.0}});
  }

  if (ctx.vf) add_epigraph_rows(*ctx.vf, m, L.theta, L.soc_end);
  return out;
}

inline RtoActions solve_rtp(const RtoContext& ctx) {
  const auto model = build_rtp(ctx);
  const auto sol = lp::solve_lp(model.lp);
  if (sol.status == lp::Status::Infeasible) {
    std::string what = "real-time problem infeasible:";
    for (const auto& r : sol.infeasible_rows) what += " " + r;
    throw RtoInfeasible(what);
  }
  if (sol.status != lp::Status::Optimal) throw lp::SolverFailure("real-time problem unbounded");
  const auto& L = model.layout;
  const auto& lpm = model.lp;
  auto pick = [&](const std::vector<int>& cols) {
    std::vector<double> v;
    for (int c : cols) v.push_back(std::clamp(sol.x[c], lpm.lower(c), lpm.upper(c)));
    return v;
  };
  RtoActions a;
  a.shed = pick(L.shed);
  a.steer = pick(L.steer);
  a.curtail = pick(L.curtail);
  a.charge = pick(L.charge);
  a.discharge = pick(L.discharge);
  a.soc_end = pick(L.soc_end);
  a.export_kwh = std::max(0.0, sol.x[L.exp]);
  a.import_kwh = std::max(0.0, sol.x[L.imp]);
  a.peak_increment_kw = std::max(0.0, sol.x[L.dp]);
  a.period_power_kw = ctx.beta() * ctx.realized_average_kw + (sol.x[L.imp] - sol.x[L.exp]) / ctx.period_hours;
  if (L.r_sym >= 0) {
    a.reserve_sym_kw = std::max(0.0, sol.x[L.r_sym]);
    a.reserve_shortfall_kw = std::max(0.0, sol.x[L.shortfall]);
  }
  a.theta = L.theta >= 0 ? sol.x[L.theta] : 0.0;
  double immediate = 0.0;
  for (const auto* cols : {&L.shed, &L.steer, &L.curtail, &L.charge, &L.discharge, &L.soc_end}) {
    for (int c : *cols) immediate += lpm.cost(c) * sol.x[c];
  }
  immediate += lpm.cost(L.exp) * sol.x[L.exp] + lpm.cost(L.imp) * sol.x[L.imp];
  a.immediate_cost = immediate;
  a.delayed_cost = lpm.cost(L.dp) * sol.x[L.dp] + (L.shortfall >= 0 ? lpm.cost(L.shortfall) * sol.x[L.shortfall] : 0.0);
  a.objective = sol.objective;
  return a;
}

inline void write_action_log_header(std::ostream& out, const DeviceFleet& fleet) {
  out << "timestamp";
  for (std::size_t d = 0; d < fleet.sheddable_loads.size(); ++d) out << ",a_she_" << d;
  for (std::size_t d = 0; d < fleet.steerable_generators.size(); ++d) out << ",a_ste_" << d;
  for (std::size_t d = 0; d < fleet.non_steerable_generators.size(); ++d) out << ",a_nst_" << d;
  for (std::size_t d = 0; d < fleet.storage.size(); ++d) out << ",a_cha_" << d << ",a_dis_" << d;
  out << ",export_kwh,import_kwh,theta,dp_kw,dr_sym_kw,rule_based\n";
}

inline void write_action_log_row(std::ostream& out, Instant t, const RtoActions& a) {
  out << format_instant(t);
  for (double v : a.shed) out << "," << v;
  for (double v : a.steer) out << "," << v;
  for (double v : a.curtail) out << "," << v;
  for (std::size_t d = 0; d < a.charge.size(); ++d) out << "," << a.charge[d] << "," << a.discharge[d];
  out << "," << a.export_kwh << "," << a.import_kwh << "," << a.theta << "," << a.peak_increment_kw << ","
      << a.reserve_shortfall_kw << "," << (a.rule_based ? 1 : 0) << "\n";
}

}  // namespace mgc

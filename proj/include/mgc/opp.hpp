#pragma once

// Operational planner: a linear program over the next planning horizon at
// market-period resolution, parametric in the initial state of charge.
//
// Per period k (length dt hours) and device d the decision variables are
// fractions a in [0, 1] (shed, steer, curtail, charge, discharge), the
// end-of-period state of charge s[d][k], exported/imported energy e[k], i[k]
// (kWh), the peak increment dp[k] (kW) and, when reserve is priced, the
// per-device up/down reserve and the symmetric reserve (kW).
//
//   min  sum_k  C[k] + pi_p * dp[k] - pi_s * r_sym[k]
//
// with C[k] the energy flow costs/revenues of the period. The initial state
// of charge enters through the right-hand side of rows "soc_init[d]", whose
// duals are the sensitivities of the optimal cost to the initial state.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgc/domain.hpp"
#include "mgc/lp.hpp"

namespace mgc {

struct OppInstance {
  Instant start{};                      // first period boundary
  std::vector<DeviceSample> forecasts;  // one entry per period
  DeviceFleet fleet;
  GridContract contract;
  MarketClock clock;
  double historical_peak = 0.0;         // kW
  std::vector<double> initial_soc;      // kWh per storage device
  double bias = 0.0;                    // EUR/kWh bonus on stored energy (charge-early tie break)

  [[nodiscard]] int n_periods() const { return static_cast<int>(forecasts.size()); }

  void validate() const {
    fleet.validate();
    contract.validate();
    clock.validate();
    if (forecasts.empty()) throw ConfigError("planner needs at least one period");
    if (historical_peak < 0.0) throw ConfigError("historical peak must be non-negative");
    if (initial_soc.size() != fleet.storage.size()) throw ConfigError("initial_soc size does not match storage fleet");
    for (const auto& f : forecasts) {
      if (f.non_flexible_kw.size() != fleet.non_flexible_loads.size() ||
          f.sheddable_kw.size() != fleet.sheddable_loads.size() ||
          f.steerable_kw.size() != fleet.steerable_generators.size() ||
          f.non_steerable_kw.size() != fleet.non_steerable_generators.size()) {
        throw ConfigError("forecast sample does not match the device fleet");
      }
    }
  }
};

/// Builds the instance for `n_periods` periods from `start` from aggregate
/// per-period PV and load forecasts.
inline OppInstance make_opp_instance(Instant start, std::span<const double> pv_kw, std::span<const double> load_kw,
                                     const DeviceFleet& fleet, const GridContract& contract,
                                     const MarketClock& clock, double historical_peak) {
  if (pv_kw.size() != load_kw.size()) throw ConfigError("PV and load forecasts differ in length");
  OppInstance inst;
  inst.start = start;
  inst.fleet = fleet;
  inst.contract = contract;
  inst.clock = clock;
  inst.historical_peak = historical_peak;
  inst.initial_soc = fleet.initial_soc();
  for (std::size_t k = 0; k < pv_kw.size(); ++k) inst.forecasts.push_back(split_sample(fleet, pv_kw[k], load_kw[k]));
  return inst;
}

/// The same instance without its first `offset` periods.
inline OppInstance tail_instance(const OppInstance& inst, int offset) {
  if (offset < 0 || offset >= inst.n_periods()) throw ConfigError("tail offset out of range");
  OppInstance out = inst;
  out.start = inst.start + std::chrono::duration_cast<seconds>(inst.clock.period) * offset;
  out.forecasts.erase(out.forecasts.begin(), out.forecasts.begin() + offset);
  return out;
}

struct PlanPeriod {
  Instant start{};
  std::vector<double> shed, steer, curtail, charge, discharge;  // fractions
  std::vector<double> soc;                                      // kWh at period end
  std::vector<double> reserve_up, reserve_down;                 // kW per storage device
  double export_kwh = 0.0;
  double import_kwh = 0.0;
  double reserve_sym_kw = 0.0;
  double peak_increment_kw = 0.0;
  double immediate_cost = 0.0;  // EUR
  double delayed_cost = 0.0;    // EUR
};

struct OpPlan {
  std::vector<PlanPeriod> periods;
  double objective = 0.0;                  // EUR
  std::vector<double> initial_soc_duals;   // EUR/kWh
  int iterations = 0;
};

class OppInfeasible : public std::runtime_error {
 public:
  OppInfeasible(const std::string& what, std::vector<std::string> families)
      : std::runtime_error(what), families_(std::move(families)) {}
  [[nodiscard]] const std::vector<std::string>& families() const { return families_; }

 private:
  std::vector<std::string> families_;
};

struct OppLayout {
  struct Period {
    std::vector<int> shed, steer, curtail, charge, discharge, soc, r_up, r_down;
    int exp = -1, imp = -1, dp = -1, r_sym = -1;
  };
  std::vector<Period> periods;
  std::vector<int> soc_init_rows;
  bool reserve = false;
};

struct OppModel {
  lp::LpModel lp;
  OppLayout layout;
};

inline std::string indexed(const std::string& base, int a) { return base + "[" + std::to_string(a) + "]"; }
inline std::string indexed(const std::string& base, int a, int b) {
  return base + "[" + std::to_string(a) + "][" + std::to_string(b) + "]";
}

/// Label of the row pinning the initial state of charge of storage device d.
inline std::string soc_init_label(int d) { return indexed("soc_init", d); }

inline OppModel build_opp(const OppInstance& inst) {
  inst.validate();
  using lp::Sense;
  using lp::Term;
  const auto& fleet = inst.fleet;
  const auto& ct = inst.contract;
  const double dt = inst.clock.period_hours();
  const int n = inst.n_periods();
  const int n_she = static_cast<int>(fleet.sheddable_loads.size());
  const int n_ste = static_cast<int>(fleet.steerable_generators.size());
  const int n_nst = static_cast<int>(fleet.non_steerable_generators.size());
  const int n_sto = static_cast<int>(fleet.storage.size());
  const bool reserve = ct.reserve_enabled();

  OppModel out;
  auto& m = out.lp;
  auto& layout = out.layout;
  layout.reserve = reserve;
  layout.periods.resize(n);

  for (int k = 0; k < n; ++k) {
    const auto& f = inst.forecasts[k];
    auto& p = layout.periods[k];
    const Instant tk = inst.start + std::chrono::duration_cast<seconds>(inst.clock.period) * k;
    for (int d = 0; d < n_she; ++d) {
      p.shed.push_back(m.add_variable(0, 1, dt * fleet.sheddable_loads[d].shed_price * f.sheddable_kw[d], indexed("a_she", d, k)));
    }
    for (int d = 0; d < n_ste; ++d) {
      p.steer.push_back(m.add_variable(0, 1, dt * fleet.steerable_generators[d].gen_price * f.steerable_kw[d], indexed("a_ste", d, k)));
    }
    for (int d = 0; d < n_nst; ++d) {
      p.curtail.push_back(m.add_variable(0, 1, dt * fleet.non_steerable_generators[d].curtail_price * f.non_steerable_kw[d], indexed("a_nst", d, k)));
    }
    for (int d = 0; d < n_sto; ++d) {
      const auto& s = fleet.storage[d];
      p.charge.push_back(m.add_variable(0, 1, dt * s.usage_fee * s.p_charge_max * s.eta_charge, indexed("a_cha", d, k)));
      p.discharge.push_back(m.add_variable(0, 1, dt * s.usage_fee * s.p_discharge_max / s.eta_discharge, indexed("a_dis", d, k)));
      p.soc.push_back(m.add_variable(s.s_min, s.s_max, -inst.bias, indexed("soc", d, k)));
    }
    p.exp = m.add_variable(0, ct.export_cap * dt, -ct.export_price, indexed("e_gri", k));
    p.imp = m.add_variable(0, ct.import_cap * dt, import_price_at(tk, ct), indexed("i_gri", k));
    p.dp = m.add_variable(0, lp::kInfinity, ct.peak_price, indexed("dp", k));
    if (reserve) {
      for (int d = 0; d < n_sto; ++d) {
        p.r_up.push_back(m.add_variable(0, lp::kInfinity, 0.0, indexed("r_up", d, k)));
        p.r_down.push_back(m.add_variable(0, lp::kInfinity, 0.0, indexed("r_dn", d, k)));
      }
      p.r_sym = m.add_variable(0, lp::kInfinity, -ct.reserve_price_op, indexed("r_sym", k));
    }
  }

  std::vector<Term> terms;
  for (int k = 0; k < n; ++k) {
    const auto& f = inst.forecasts[k];
    const auto& p = layout.periods[k];

    // Energy balance: export - import = generation - consumption - net charge.
    terms.clear();
    terms.push_back({p.exp, 1.0 / dt});
    terms.push_back({p.imp, -1.0 / dt});
    double rhs = 0.0;
    for (int d = 0; d < n_nst; ++d) {
      terms.push_back({p.curtail[d], f.non_steerable_kw[d]});
      rhs += f.non_steerable_kw[d];
    }
    for (int d = 0; d < n_ste; ++d) terms.push_back({p.steer[d], -f.steerable_kw[d]});
    for (double c : f.non_flexible_kw) rhs -= c;
    for (int d = 0; d < n_she; ++d) {
      terms.push_back({p.shed[d], -f.sheddable_kw[d]});
      rhs -= f.sheddable_kw[d];
    }
    for (int d = 0; d < n_sto; ++d) {
      terms.push_back({p.charge[d], fleet.storage[d].p_charge_max});
      terms.push_back({p.discharge[d], -fleet.storage[d].p_discharge_max});
    }
    m.add_row(indexed("balance", k), Sense::Equal, rhs, terms);

    // State-of-charge recursion.
    for (int d = 0; d < n_sto; ++d) {
      const auto& s = fleet.storage[d];
      terms.clear();
      terms.push_back({p.soc[d], 1.0});
      terms.push_back({p.charge[d], -dt * s.p_charge_max * s.eta_charge});
      terms.push_back({p.discharge[d], dt * s.p_discharge_max / s.eta_discharge});
      if (k == 0) {
        const int row = m.add_row(soc_init_label(d), Sense::Equal, inst.initial_soc[d], terms);
        layout.soc_init_rows.push_back(row);
      } else {
        terms.push_back({layout.periods[k - 1].soc[d], -1.0});
        m.add_row(indexed("soc", d, k), Sense::Equal, 0.0, terms);
      }
    }

    // Peak increment over the historical peak: dp >= (i - e)/dt - p_h.
    m.add_row(indexed("peak", k), Sense::GreaterEqual, -inst.historical_peak,
              {{p.dp, 1.0}, {p.imp, -1.0 / dt}, {p.exp, 1.0 / dt}});

    if (reserve) {
      for (int d = 0; d < n_sto; ++d) {
        const auto& s = fleet.storage[d];
        m.add_row(indexed("rup_soc", d, k), Sense::LessEqual, -s.s_min * s.eta_discharge / dt,
                  {{p.r_up[d], 1.0}, {p.soc[d], -s.eta_discharge / dt}});
        m.add_row(indexed("rup_pow", d, k), Sense::LessEqual, s.p_discharge_max,
                  {{p.r_up[d], 1.0}, {p.discharge[d], s.p_discharge_max}});
        m.add_row(indexed("rdn_soc", d, k), Sense::LessEqual, s.s_max / (s.eta_charge * dt),
                  {{p.r_down[d], 1.0}, {p.soc[d], 1.0 / (s.eta_charge * dt)}});
        m.add_row(indexed("rdn_pow", d, k), Sense::LessEqual, s.p_charge_max,
                  {{p.r_down[d], 1.0}, {p.charge[d], s.p_charge_max}});
      }
      // Upward capability: storage up-reserve, unused steerable capacity,
      // curtailed PV that can be released, load that can still be shed.
      terms.clear();
      terms.push_back({p.r_sym, 1.0});
      double up_rhs = 0.0;
      for (int d = 0; d < n_sto; ++d) terms.push_back({p.r_up[d], -1.0});
      for (int d = 0; d < n_ste; ++d) {
        terms.push_back({p.steer[d], f.steerable_kw[d]});
        up_rhs += f.steerable_kw[d];
      }
      for (int d = 0; d < n_nst; ++d) terms.push_back({p.curtail[d], -f.non_steerable_kw[d]});
      for (int d = 0; d < n_she; ++d) {
        terms.push_back({p.shed[d], f.sheddable_kw[d]});
        up_rhs += f.sheddable_kw[d];
      }
      m.add_row(indexed("rsym_up", k), Sense::LessEqual, up_rhs, terms);
      // Downward capability: storage down-reserve, running steerable
      // generation, delivered PV, load already shed.
      terms.clear();
      terms.push_back({p.r_sym, 1.0});
      double dn_rhs = 0.0;
      for (int d = 0; d < n_sto; ++d) terms.push_back({p.r_down[d], -1.0});
      for (int d = 0; d < n_ste; ++d) terms.push_back({p.steer[d], -f.steerable_kw[d]});
      for (int d = 0; d < n_nst; ++d) {
        terms.push_back({p.curtail[d], f.non_steerable_kw[d]});
        dn_rhs += f.non_steerable_kw[d];
      }
      for (int d = 0; d < n_she; ++d) terms.push_back({p.shed[d], -f.sheddable_kw[d]});
      m.add_row(indexed("rsym_dn", k), Sense::LessEqual, dn_rhs, terms);
    }
  }

  for (int d = 0; d < n_sto; ++d) {
    if (fleet.storage[d].s_end) {
      m.add_row(indexed("soc_end", d), Sense::Equal, *fleet.storage[d].s_end, {{layout.periods[n - 1].soc[d], 1.0}});
    }
  }
  return out;
}

/// Constraint family of a row label ("soc_end[0]" -> "soc_end").
inline std::string row_family(const std::string& label) { return label.substr(0, label.find('[')); }

inline OpPlan extract_plan(const OppInstance& inst, const OppModel& model, const lp::LpSolution& sol) {
  const auto& L = model.layout;
  const double dt = inst.clock.period_hours();
  const auto& ct = inst.contract;
  OpPlan plan;
  plan.objective = sol.objective;
  plan.iterations = sol.iterations;
  for (int row : L.soc_init_rows) plan.initial_soc_duals.push_back(sol.row_duals[row]);
  auto pick = [&](const std::vector<int>& cols) {
    std::vector<double> v;
    v.reserve(cols.size());
    for (int c : cols) v.push_back(std::clamp(sol.x[c], model.lp.lower(c), model.lp.upper(c)));
    return v;
  };
  for (int k = 0; k < inst.n_periods(); ++k) {
    const auto& p = L.periods[k];
    PlanPeriod out;
    out.start = inst.start + std::chrono::duration_cast<seconds>(inst.clock.period) * k;
    out.shed = pick(p.shed);
    out.steer = pick(p.steer);
    out.curtail = pick(p.curtail);
    out.charge = pick(p.charge);
    out.discharge = pick(p.discharge);
    out.soc = pick(p.soc);
    out.reserve_up = pick(p.r_up);
    out.reserve_down = pick(p.r_down);
    out.export_kwh = std::max(0.0, sol.x[p.exp]);
    out.import_kwh = std::max(0.0, sol.x[p.imp]);
    out.peak_increment_kw = std::max(0.0, sol.x[p.dp]);
    out.reserve_sym_kw = p.r_sym >= 0 ? std::max(0.0, sol.x[p.r_sym]) : 0.0;
    double immediate = 0.0;
    auto add_cost = [&](const std::vector<int>& cols) {
      for (int c : cols) immediate += model.lp.cost(c) * sol.x[c];
    };
    add_cost(p.shed);
    add_cost(p.steer);
    add_cost(p.curtail);
    add_cost(p.charge);
    add_cost(p.discharge);
    add_cost(p.soc);
    immediate += model.lp.cost(p.exp) * sol.x[p.exp] + model.lp.cost(p.imp) * sol.x[p.imp];
    out.immediate_cost = immediate;
    out.delayed_cost = ct.peak_price * sol.x[p.dp] - (p.r_sym >= 0 ? ct.reserve_price_op * sol.x[p.r_sym] : 0.0);
    (void)dt;
    plan.periods.push_back(std::move(out));
  }
  return plan;
}

[[noreturn]] inline void throw_opp_infeasible(const lp::LpSolution& sol) {
  std::vector<std::string> families;
  for (const auto& label : sol.infeasible_rows) {
    auto fam = row_family(label);
    if (std::find(families.begin(), families.end(), fam) == families.end()) families.push_back(fam);
  }
  std::string what = "operational plan infeasible; constraint families:";
  for (const auto& f : families) what += " " + f;
  throw OppInfeasible(what, families);
}

/// Planner re-solved for many initial states of charge. The LP is built once;
/// each solve edits the initial-state right-hand sides and restarts from the
/// previous optimal basis.
class ParametricOpp {
 public:
  explicit ParametricOpp(OppInstance instance, lp::SimplexOptions options = {})
      : instance_(std::move(instance)), model_(build_opp(instance_)), engine_(model_.lp, options) {}

  OpPlan solve(std::span<const double> initial_soc) {
    if (initial_soc.size() != model_.layout.soc_init_rows.size()) {
      throw ConfigError("initial state size does not match storage fleet");
    }
    for (std::size_t d = 0; d < initial_soc.size(); ++d) {
      const auto& s = instance_.fleet.storage[d];
      if (initial_soc[d] < s.s_min - 1e-9 || initial_soc[d] > s.s_max + 1e-9) {
        throw ConfigError("initial state of charge outside device bounds");
      }
      engine_.set_rhs(model_.layout.soc_init_rows[d], initial_soc[d]);
      instance_.initial_soc[d] = initial_soc[d];
    }
    const auto sol = engine_.solve();
    if (sol.status == lp::Status::Infeasible) throw_opp_infeasible(sol);
    if (sol.status != lp::Status::Optimal) throw lp::SolverFailure("operational plan unbounded");
    return extract_plan(instance_, model_, sol);
  }

  [[nodiscard]] const OppInstance& instance() const { return instance_; }
  [[nodiscard]] const OppModel& model() const { return model_; }

 private:
  OppInstance instance_;
  OppModel model_;
  lp::SimplexEngine engine_;
};

inline OpPlan solve_opp(const OppInstance& instance, std::span<const double> initial_soc) {
  OppInstance inst = instance;
  inst.initial_soc.assign(initial_soc.begin(), initial_soc.end());
  ParametricOpp solver(std::move(inst));
  return solver.solve(initial_soc);
}

}  // namespace mgc

// mgc: command-line entry points for simulation, planning and forecast scoring.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mgc/io.hpp"
#include "mgc/sim.hpp"

namespace {

using namespace mgc;

struct Common {
  std::string config;
  int case_id = 0;
  std::string scenario;
  std::string controller;
  std::string forecaster;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  std::string reserve;
  std::optional<int> days;
};

void add_common(CLI::App* app, Common& c, bool with_controller) {
  app->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--case", c.case_id, "case preset 1-3 (ignored with --config unless the file has none)")
      ->check(CLI::Range(1, 3));
  app->add_option("--scenario", c.scenario, "scenario CSV (default: synthetic from the config)")->check(CLI::ExistingFile);
  if (with_controller) app->add_option("--controller", c.controller, "rbc or rto-op")->check(CLI::IsMember({"rbc", "rto-op"}));
  app->add_option("--forecaster", c.forecaster, "perfect, persistence or noisy")
      ->check(CLI::IsMember({"perfect", "persistence", "noisy"}));
  app->add_option("--sigma", c.sigma, "noise spread of the noisy forecaster");
  app->add_option("--seed", c.seed, "seed of the noisy forecaster");
  app->add_option("--reserve", c.reserve, "symmetric reserve on or off")->check(CLI::IsMember({"on", "off"}));
  app->add_option("--days", c.days, "length of the synthetic scenario");
}

CaseConfig resolve_config(const Common& c) {
  CaseConfig cfg = !c.config.empty() ? load_config(c.config) : case_preset(c.case_id == 0 ? 1 : c.case_id);
  if (!c.controller.empty()) cfg.sim.controller = parse_controller(c.controller);
  if (!c.forecaster.empty()) cfg.sim.forecaster.kind = c.forecaster;
  if (c.sigma) cfg.sim.forecaster.sigma = *c.sigma;
  if (c.seed) cfg.sim.forecaster.seed = *c.seed;
  if (!c.reserve.empty()) set_reserve(cfg, c.reserve == "on");
  if (c.days) cfg.synth.days = *c.days;
  cfg.sim.validate();
  return cfg;
}

Scenario resolve_scenario(const Common& c, const CaseConfig& cfg) {
  if (!c.scenario.empty()) return load_scenario(c.scenario, cfg.sim.clock);
  return synthesize(cfg.synth);
}

Instant resolve_instant(const std::string& at, const Scenario& sc) {
  return at.empty() ? sc.start : parse_instant(at);
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

int run_simulate(const Common& c, const std::string& out_dir, bool no_steps) {
  CaseConfig cfg = resolve_config(c);
  cfg.sim.record_steps = !no_steps;
  const Scenario sc = resolve_scenario(c, cfg);
  const auto rep = simulate(sc, cfg.sim);
  write_report(rep, cfg, out_dir);
  const auto& l = rep.ledger;
  std::printf("%s (%s): c_E %.3f kEUR  c_p %.3f kEUR  c_t %.3f kEUR  dp %.1f kW  I %.2f MWh  E %.2f MWh\n",
              rep.controller.c_str(), rep.forecaster.c_str(), l.c_e_keur, l.c_p_keur, l.c_t_keur, l.delta_p_kw,
              l.i_tot_mwh, l.e_tot_mwh);
  if (rep.faults > 0) {
    std::cerr << "simulation fault: " << rep.faults << " steps violated a grid cap after remediation\n";
    return 2;
  }
  return 0;
}

OppInstance instance_at(const CaseConfig& cfg, const Scenario& sc, Instant t, const std::vector<double>& soc) {
  const auto fc = make_forecaster(cfg.sim.forecaster)->forecast(sc, t, cfg.sim.clock.n_periods(), cfg.sim.clock);
  OppInstance inst = make_opp_instance(t, fc.pv_kw, fc.load_kw, cfg.sim.fleet, cfg.sim.contract, cfg.sim.clock,
                                       cfg.sim.contract.initial_historical_peak);
  inst.initial_soc = soc;
  inst.bias = cfg.sim.bias;
  return inst;
}

std::vector<double> resolve_soc(const std::vector<double>& soc, const CaseConfig& cfg) {
  if (soc.empty()) return cfg.sim.fleet.initial_soc();
  if (soc.size() != cfg.sim.fleet.storage.size()) throw ConfigError("--soc needs one value per storage device");
  return soc;
}

int run_plan(const Common& c, const std::string& at, const std::vector<double>& soc_in, const std::string& out) {
  const CaseConfig cfg = resolve_config(c);
  const Scenario sc = resolve_scenario(c, cfg);
  const auto soc = resolve_soc(soc_in, cfg);
  const auto plan = solve_opp(instance_at(cfg, sc, resolve_instant(at, sc), soc), soc);
  auto os = open_out(out);
  write_plan_csv(plan, os);
  std::printf("plan objective %.6f EUR over %zu periods\n", plan.objective, plan.periods.size());
  return 0;
}

int run_valuefn(const Common& c, const std::string& at, const std::vector<double>& soc_in, const std::string& out) {
  const CaseConfig cfg = resolve_config(c);
  const Scenario sc = resolve_scenario(c, cfg);
  const auto soc = resolve_soc(soc_in, cfg);
  if (cfg.sim.fleet.storage.empty()) throw ConfigError("value function needs at least one storage device");
  const Instant t = resolve_instant(at, sc);
  const OppInstance inst = instance_at(cfg, sc, t, soc);
  const auto plan = solve_opp(inst, soc);
  const auto range = reachable_range(soc, cfg.sim.clock.period_hours(), cfg.sim.fleet);
  std::vector<double> s_star = plan.periods[0].soc;
  for (std::size_t d = 0; d < s_star.size(); ++d) s_star[d] = range[d].clamp(s_star[d]);
  ParametricOpp tail(tail_instance(inst, 1));
  const auto vf = generate_cuts(tail, range, s_star, cfg.sim.cuts);
  auto os = open_out(out);
  write_value_function_csv(vf, os);
  std::printf("%zu cuts from %d solves\n", vf.cuts.size(), vf.solves);
  for (const auto& e : vf.events) std::cerr << e << "\n";
  return 0;
}

int run_forecast_eval(const Common& c, int stride, const std::string& neme, const std::string& out) {
  const CaseConfig cfg = resolve_config(c);
  const Scenario sc = resolve_scenario(c, cfg);
  const auto& clock = cfg.sim.clock;
  const auto fc = make_forecaster(cfg.sim.forecaster);
  const PerfectForecaster truth;
  const int n = clock.n_periods();
  const auto period = std::chrono::duration_cast<seconds>(clock.period);
  std::vector<std::vector<double>> fpv, wpv, fload, wload;
  const int periods = sc.size() / clock.steps_per_period();
  for (int p = 0; p < periods; p += stride) {
    const Instant t = sc.start + period * p;
    if (t + period * n > sc.end()) break;  // score only horizons fully covered by data
    if (cfg.sim.forecaster.kind == "persistence" && t - hours{24} < sc.start) continue;
    const auto f = fc->forecast(sc, t, n, clock);
    const auto w = truth.forecast(sc, t, n, clock);
    fpv.push_back(f.pv_kw);
    wpv.push_back(w.pv_kw);
    fload.push_back(f.load_kw);
    wload.push_back(w.load_kw);
  }
  if (fpv.empty()) throw ConfigError("scenario too short to score a full horizon");
  const auto mode = neme == "global" ? NemeNormalizer::Global : NemeNormalizer::PerHorizon;
  const auto mpv = forecast_metrics(fpv, wpv, mode);
  const auto mload = forecast_metrics(fload, wload, mode);
  auto os = open_out(out);
  os << "format_version,series,forecaster,issues,nmae,nrmse,neme\n";
  auto row = [&](const char* name, const ForecastMetrics& m) {
    os << kFormatVersion << "," << name << "," << fc->name() << "," << fpv.size() << "," << format_number(m.nmae) << ","
       << format_number(m.nrmse) << "," << format_number(m.neme) << "\n";
    std::printf("%-4s %s: NMAE %.4f  NRMSE %.4f  NEME %.4f  (%zu issues)\n", name, fc->name().c_str(), m.nmae, m.nrmse,
                m.neme, fpv.size());
  };
  row("pv", mpv);
  row("load", mload);
  return 0;
}

int run_synth(int case_id, std::uint64_t seed, int days, int drop_day, const std::string& out) {
  CaseConfig cfg = case_preset(case_id);
  cfg.synth.seed = seed;
  cfg.synth.days = days;
  cfg.synth.drop_day = drop_day;
  const auto sc = synthesize(cfg.synth);
  auto os = open_out(out);
  write_scenario_csv(sc, os, cfg.sim.clock);
  std::printf("%d steps from %s\n", sc.size(), format_instant(sc.start).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microgrid planner / real-time optimizer toolkit"};
  app.require_subcommand(1);

  Common sim_c, plan_c, vf_c, fe_c;
  std::string sim_out, plan_out, vf_out, fe_out, synth_out;
  std::string plan_at, vf_at, neme = "per-horizon";
  std::vector<double> plan_soc, vf_soc;
  bool no_steps = false;
  int stride = 4;
  int synth_case = 1, synth_days = 7, synth_drop = 2;
  std::uint64_t synth_seed = 1;

  auto* sim = app.add_subcommand("simulate", "closed-loop simulation, writes report.json and CSV series");
  add_common(sim, sim_c, true);
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_flag("--no-steps", no_steps, "skip the per-minute series");

  auto* plan = app.add_subcommand("plan", "one planner solve, writes the plan CSV");
  add_common(plan, plan_c, false);
  plan->add_option("--at", plan_at, "issue time, ISO-8601 UTC (default: scenario start)");
  plan->add_option("--soc", plan_soc, "state of charge per device, kWh (default: s_init)");
  plan->add_option("--out", plan_out, "output CSV")->required();

  auto* vf = app.add_subcommand("valuefn", "cost-to-go cuts at a boundary, writes the cut CSV");
  add_common(vf, vf_c, false);
  vf->add_option("--at", vf_at, "boundary time, ISO-8601 UTC (default: scenario start)");
  vf->add_option("--soc", vf_soc, "state of charge per device, kWh (default: s_init)");
  vf->add_option("--out", vf_out, "output CSV")->required();

  auto* fe = app.add_subcommand("forecast-eval", "NMAE / NRMSE / NEME of a forecaster over a scenario");
  add_common(fe, fe_c, false);
  fe->add_option("--stride", stride, "periods between issues")->check(CLI::PositiveNumber);
  fe->add_option("--neme", neme, "NEME normalizer")->check(CLI::IsMember({"per-horizon", "global"}));
  fe->add_option("--out", fe_out, "output CSV")->required();

  auto* syn = app.add_subcommand("synth", "write the seeded synthetic scenario");
  syn->add_option("--case", synth_case, "case preset 1-3")->check(CLI::Range(1, 3));
  syn->add_option("--seed", synth_seed, "generator seed");
  syn->add_option("--days", synth_days, "number of days")->check(CLI::PositiveNumber);
  syn->add_option("--drop-day", synth_drop, "day of the forced mid-day PV drop, -1 for none");
  syn->add_option("--out", synth_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(sim_c, sim_out, no_steps);
    if (*plan) return run_plan(plan_c, plan_at, plan_soc, plan_out);
    if (*vf) return run_valuefn(vf_c, vf_at, vf_soc, vf_out);
    if (*fe) return run_forecast_eval(fe_c, stride, neme, fe_out);
    if (*syn) return run_synth(synth_case, synth_seed, synth_days, synth_drop, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "mgc: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

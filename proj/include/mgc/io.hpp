#pragma once

// Configuration, case presets, scenario files, synthetic data and reports.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgc/domain.hpp"
#include "mgc/forecast.hpp"
#include "mgc/scenario.hpp"
#include "mgc/sim.hpp"

namespace mgc {

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------- synthetic

struct SynthOptions {
  int days = 7;
  std::uint64_t seed = 1;
  double pv_peak_kw = 400.0;               // installed PV
  Instant start = make_instant(2019, 6, 10);  // a Monday
  int drop_day = 2;                        // day index of the forced mid-day PV drop, -1 for none
  double drop_factor = 0.1;                // PV multiplier during the drop
  double clouds_per_day = 2.0;
};

/// Clear-sky PV bell scaled to the installed peak, seeded daily clearness and
/// cloud drops; office-type load with a weekday business-hours bump.
inline Scenario synthesize(const SynthOptions& opt) {
  if (opt.days <= 0) throw ConfigError("synthetic scenario needs at least one day");
  if (!(opt.pv_peak_kw >= 0.0)) throw ConfigError("PV peak must be non-negative");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  Scenario sc;
  sc.start = opt.start;
  const int per_day = 1440;
  sc.pv_kw.reserve(static_cast<std::size_t>(opt.days) * per_day);
  sc.load_kw.reserve(static_cast<std::size_t>(opt.days) * per_day);
  double ar = 0.0;
  for (int day = 0; day < opt.days; ++day) {
    const double clearness = 0.55 + 0.45 * u(rng);
    std::poisson_distribution<int> nclouds(opt.clouds_per_day);
    const int nc = nclouds(rng);
    struct Cloud {
      int begin, end;
      double factor;
    };
    std::vector<Cloud> clouds;
    for (int c = 0; c < nc; ++c) {
      const int begin = static_cast<int>(60 * (8.0 + 9.0 * u(rng)));
      const int len = 10 + static_cast<int>(50 * u(rng));
      clouds.push_back({begin, begin + len, 0.2 + 0.4 * u(rng)});
    }
    if (day == opt.drop_day) clouds.push_back({11 * 60 + 30, 13 * 60, opt.drop_factor});
    const auto wd = std::chrono::weekday{std::chrono::floor<std::chrono::days>(opt.start) + std::chrono::days{day}};
    const bool weekend = wd == std::chrono::Saturday || wd == std::chrono::Sunday;
    for (int m = 0; m < per_day; ++m) {
      const double h = m / 60.0;
      double pv = 0.0;
      if (h > 5.5 && h < 20.5) pv = 0.64 * opt.pv_peak_kw * std::sin(M_PI * (h - 5.5) / 15.0);
      pv *= clearness;
      for (const auto& c : clouds) {
        if (m >= c.begin && m < c.end) pv *= c.factor;
      }
      pv *= std::max(0.0, 1.0 + 0.03 * z(rng));
      ar = 0.95 * ar + 0.3 * z(rng);
      double bump = 0.0;
      if (h > 6.0 && h < 20.0) {
        const double s = std::sin(M_PI * (h - 6.0) / 14.0);
        bump = 300.0 * s * s;
      }
      const double load = 80.0 + (weekend ? 0.25 : 1.0) * bump + 5.0 * ar;
      sc.pv_kw.push_back(std::max(0.0, pv));
      sc.load_kw.push_back(std::max(0.0, load));
    }
  }
  return sc;
}

// ---------------------------------------------------------------- config

struct CaseConfig {
  int case_id = 0;              // 1..3 for the presets, 0 for custom
  SimulationConfig sim;
  double pv_peak_kw = 400.0;    // PV_p
  double load_peak_kw = 1000.0; // C_p
  double storage_kwh = 1350.0;  // S_p
  double reserve_price = 20.0;  // applied when reserve is switched on
  bool reserve = false;
  SynthOptions synth;
};

inline void set_reserve(CaseConfig& cfg, bool on) {
  cfg.reserve = on;
  cfg.sim.contract.reserve_price_op = on ? cfg.reserve_price : 0.0;
  cfg.sim.contract.reserve_penalty_rto = on ? cfg.reserve_price : 0.0;
}

/// Case presets 1-3: identical microgrid, installed PV of 400, 875 or 1750 kW.
inline CaseConfig case_preset(int id) {
  static constexpr double kPv[] = {400.0, 875.0, 1750.0};
  if (id < 1 || id > 3) throw ConfigError("case preset must be 1, 2 or 3");
  CaseConfig c;
  c.case_id = id;
  c.pv_peak_kw = kPv[id - 1];
  StorageDevice bat;
  bat.s_max = 1350.0;
  bat.s_min = 0.0;
  bat.p_charge_max = 1350.0;
  bat.p_discharge_max = 1350.0;
  bat.eta_charge = 0.95;
  bat.eta_discharge = 0.95;
  bat.s_init = 100.0;
  c.sim.fleet.storage = {bat};
  c.sim.contract = GridContract{};  // export 0.035, import 0.2 / 0.12, 150 kW at 40 EUR/kW, caps 1500 kW
  c.synth.pv_peak_kw = c.pv_peak_kw;
  return c;
}

namespace detail {

using nlohmann::json;

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

/// Reads a JSON configuration. A "case" key starts from the preset; other
/// keys override it.
inline CaseConfig parse_config(const nlohmann::json& j) {
  using detail::read_opt;
  detail::check_keys(j,
                     {"format_version", "case", "clock", "contract", "storage", "loads", "sheddable_loads",
                      "steerable_generators", "pv", "controller", "forecaster", "reserve", "reserve_price", "cuts",
                      "bias", "synthetic", "pv_peak_kw", "load_peak_kw", "storage_kwh"},
                     "config");
  if (j.contains("format_version") && j.at("format_version").get<int>() != kFormatVersion) {
    throw ConfigError("unsupported config format_version");
  }
  CaseConfig c;
  if (j.contains("case")) c = case_preset(j.at("case").get<int>());
  read_opt(j, "pv_peak_kw", c.pv_peak_kw);
  c.synth.pv_peak_kw = c.pv_peak_kw;
  read_opt(j, "load_peak_kw", c.load_peak_kw);
  read_opt(j, "storage_kwh", c.storage_kwh);
  if (j.contains("clock")) {
    const auto& k = j.at("clock");
    detail::check_keys(k, {"period_min", "step_min", "horizon_h"}, "clock");
    if (k.contains("period_min")) c.sim.clock.period = minutes{k.at("period_min").get<int>()};
    if (k.contains("step_min")) c.sim.clock.step = minutes{k.at("step_min").get<int>()};
    if (k.contains("horizon_h")) c.sim.clock.horizon = hours{k.at("horizon_h").get<int>()};
  }
  if (j.contains("contract")) {
    const auto& k = j.at("contract");
    detail::check_keys(k,
                       {"export_price", "import_price_day", "import_price_night", "peak_price", "historical_peak_kw",
                        "import_cap_kw", "export_cap_kw", "day_start_min", "day_end_min"},
                       "contract");
    auto& ct = c.sim.contract;
    read_opt(k, "export_price", ct.export_price);
    read_opt(k, "import_price_day", ct.import_price_day);
    read_opt(k, "import_price_night", ct.import_price_night);
    read_opt(k, "peak_price", ct.peak_price);
    read_opt(k, "historical_peak_kw", ct.initial_historical_peak);
    read_opt(k, "import_cap_kw", ct.import_cap);
    read_opt(k, "export_cap_kw", ct.export_cap);
    if (k.contains("day_start_min")) ct.day_start = minutes{k.at("day_start_min").get<int>()};
    if (k.contains("day_end_min")) ct.day_end = minutes{k.at("day_end_min").get<int>()};
  }
  if (j.contains("storage")) {
    c.sim.fleet.storage.clear();
    for (const auto& s : j.at("storage")) {
      detail::check_keys(s,
                         {"name", "s_max", "s_min", "p_charge_max", "p_discharge_max", "eta_charge", "eta_discharge",
                          "s_init", "s_end", "usage_fee"},
                         "storage");
      if (!s.contains("s_init")) throw ConfigError("storage: s_init must be given explicitly");
      StorageDevice d;
      read_opt(s, "name", d.name);
      read_opt(s, "s_max", d.s_max);
      read_opt(s, "s_min", d.s_min);
      read_opt(s, "p_charge_max", d.p_charge_max);
      read_opt(s, "p_discharge_max", d.p_discharge_max);
      read_opt(s, "eta_charge", d.eta_charge);
      read_opt(s, "eta_discharge", d.eta_discharge);
      read_opt(s, "s_init", d.s_init);
      if (s.contains("s_end") && !s.at("s_end").is_null()) d.s_end = s.at("s_end").get<double>();
      read_opt(s, "usage_fee", d.usage_fee);
      c.sim.fleet.storage.push_back(d);
    }
  }
  if (j.contains("loads")) {
    c.sim.fleet.non_flexible_loads.clear();
    for (const auto& s : j.at("loads")) {
      detail::check_keys(s, {"name", "share"}, "loads");
      NonFlexibleLoad d;
      read_opt(s, "name", d.name);
      read_opt(s, "share", d.share);
      c.sim.fleet.non_flexible_loads.push_back(d);
    }
  }
  if (j.contains("sheddable_loads")) {
    c.sim.fleet.sheddable_loads.clear();
    for (const auto& s : j.at("sheddable_loads")) {
      detail::check_keys(s, {"name", "share", "shed_price"}, "sheddable_loads");
      SheddableLoad d;
      read_opt(s, "name", d.name);
      read_opt(s, "share", d.share);
      read_opt(s, "shed_price", d.shed_price);
      c.sim.fleet.sheddable_loads.push_back(d);
    }
  }
  if (j.contains("steerable_generators")) {
    c.sim.fleet.steerable_generators.clear();
    for (const auto& s : j.at("steerable_generators")) {
      detail::check_keys(s, {"name", "capacity_kw", "gen_price"}, "steerable_generators");
      SteerableGenerator d;
      read_opt(s, "name", d.name);
      read_opt(s, "capacity_kw", d.capacity_kw);
      read_opt(s, "gen_price", d.gen_price);
      c.sim.fleet.steerable_generators.push_back(d);
    }
  }
  if (j.contains("pv")) {
    c.sim.fleet.non_steerable_generators.clear();
    for (const auto& s : j.at("pv")) {
      detail::check_keys(s, {"name", "share", "curtail_price"}, "pv");
      NonSteerableGenerator d;
      read_opt(s, "name", d.name);
      read_opt(s, "share", d.share);
      read_opt(s, "curtail_price", d.curtail_price);
      c.sim.fleet.non_steerable_generators.push_back(d);
    }
  }
  if (j.contains("controller")) c.sim.controller = parse_controller(j.at("controller").get<std::string>());
  if (j.contains("forecaster")) {
    const auto& k = j.at("forecaster");
    detail::check_keys(k, {"kind", "sigma", "seed"}, "forecaster");
    read_opt(k, "kind", c.sim.forecaster.kind);
    read_opt(k, "sigma", c.sim.forecaster.sigma);
    read_opt(k, "seed", c.sim.forecaster.seed);
  }
  read_opt(j, "reserve_price", c.reserve_price);
  if (j.contains("reserve")) set_reserve(c, j.at("reserve").get<bool>());
  if (j.contains("cuts")) {
    const auto& k = j.at("cuts");
    detail::check_keys(k, {"budget", "eps"}, "cuts");
    read_opt(k, "budget", c.sim.cuts.budget);
    read_opt(k, "eps", c.sim.cuts.eps);
  }
  read_opt(j, "bias", c.sim.bias);
  if (j.contains("synthetic")) {
    const auto& k = j.at("synthetic");
    detail::check_keys(k, {"days", "seed", "drop_day", "drop_factor", "clouds_per_day", "start"}, "synthetic");
    read_opt(k, "days", c.synth.days);
    read_opt(k, "seed", c.synth.seed);
    read_opt(k, "drop_day", c.synth.drop_day);
    read_opt(k, "drop_factor", c.synth.drop_factor);
    read_opt(k, "clouds_per_day", c.synth.clouds_per_day);
  }
  c.sim.validate();
  return c;
}

inline CaseConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- scenario files

/// Parses "YYYY-MM-DDTHH:MM:SS[Z]" (a space may replace the T).
inline Instant parse_instant(const std::string& text) {
  int y, mo, d, h, mi, s;
  char sep;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s) != 7 ||
      (sep != 'T' && sep != ' ')) {
    throw ConfigError("bad timestamp '" + text + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month(mo), std::chrono::day(d)};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) throw ConfigError("bad timestamp '" + text + "'");
  return make_instant(y, mo, d, h, mi, s);
}

class ScenarioParseError : public ConfigError {
 public:
  ScenarioParseError(int line, const std::string& msg)
      : ConfigError("line " + std::to_string(line) + ": " + msg), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// Reads `timestamp,pv_kw,load_kw[,tso_signal]` at any uniform resolution
/// that divides one minute and averages it onto the minute grid.
inline Scenario read_scenario_csv(std::istream& in, const MarketClock& clock = {}) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) throw ScenarioParseError(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_tso = false;
  if (line == "timestamp,pv_kw,load_kw,tso_signal") has_tso = true;
  else if (line != "timestamp,pv_kw,load_kw") throw ScenarioParseError(1, "expected header timestamp,pv_kw,load_kw[,tso_signal]");

  struct Row {
    Instant t;
    double pv, load;
    int tso;
    int line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    int nf = 0;
    while (nf < 4 && std::getline(ss, f[nf], ',')) ++nf;
    std::string rest;
    if (nf != (has_tso ? 4 : 3) || std::getline(ss, rest)) throw ScenarioParseError(lineno, "wrong number of fields");
    Row r{};
    r.line = lineno;
    try {
      r.t = parse_instant(f[0]);
      std::size_t pos = 0;
      r.pv = std::stod(f[1], &pos);
      if (pos != f[1].size()) throw std::invalid_argument("pv");
      r.load = std::stod(f[2], &pos);
      if (pos != f[2].size()) throw std::invalid_argument("load");
      r.tso = has_tso ? std::stoi(f[3]) : 1;
    } catch (const std::exception& e) {
      throw ScenarioParseError(lineno, "malformed row: " + line);
    }
    if (!std::isfinite(r.pv) || !std::isfinite(r.load) || r.pv < 0 || r.load < 0) {
      throw ScenarioParseError(lineno, "values must be finite and non-negative");
    }
    if (r.tso != 0 && r.tso != 1) throw ScenarioParseError(lineno, "tso_signal must be 0 or 1");
    if (!rows.empty() && r.t <= rows.back().t) throw ScenarioParseError(lineno, "timestamps must increase");
    rows.push_back(r);
  }
  if (rows.empty()) throw ScenarioParseError(lineno, "no data rows");

  const auto minute = std::chrono::duration_cast<seconds>(clock.step);
  seconds res = minute;
  if (rows.size() > 1) res = rows[1].t - rows[0].t;
  if (res > minute || minute % res != seconds{0}) {
    throw ScenarioParseError(rows.size() > 1 ? rows[1].line : rows[0].line, "resolution must divide the step");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].t - rows[i - 1].t != res) throw ScenarioParseError(rows[i].line, "gap or irregular spacing");
  }
  if (rows[0].t.time_since_epoch() % minute != seconds{0}) throw ScenarioParseError(rows[0].line, "first timestamp not aligned to the step");
  const std::size_t per = static_cast<std::size_t>(minute / res);
  if (rows.size() % per != 0) throw ScenarioParseError(rows.back().line, "incomplete final step");

  Scenario sc;
  sc.start = rows[0].t;
  sc.step = clock.step;
  std::vector<int> tso_steps;
  for (std::size_t i = 0; i < rows.size(); i += per) {
    double pv = 0.0, load = 0.0;
    int tso = 1;
    for (std::size_t k = 0; k < per; ++k) {
      pv += rows[i + k].pv;
      load += rows[i + k].load;
      tso = std::min(tso, rows[i + k].tso);
    }
    sc.pv_kw.push_back(pv / static_cast<double>(per));
    sc.load_kw.push_back(load / static_cast<double>(per));
    tso_steps.push_back(tso);
  }
  if (has_tso) {
    const int spp = clock.steps_per_period();
    for (std::size_t i = 0; i < tso_steps.size(); i += spp) {
      int v = 1;
      for (std::size_t k = i; k < std::min(tso_steps.size(), i + spp); ++k) v = std::min(v, tso_steps[k]);
      sc.s_tso.push_back(v);
    }
  }
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path, const MarketClock& clock = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  try {
    return read_scenario_csv(in, clock);
  } catch (const ScenarioParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_scenario_csv(const Scenario& sc, std::ostream& out, const MarketClock& clock = {}) {
  const bool tso = !sc.s_tso.empty();
  out << "timestamp,pv_kw,load_kw" << (tso ? ",tso_signal" : "") << "\n";
  const int spp = clock.steps_per_period();
  for (int i = 0; i < sc.size(); ++i) {
    out << format_instant(sc.time(i)) << "," << format_number(sc.pv_kw[i]) << "," << format_number(sc.load_kw[i]);
    if (tso) out << "," << sc.s_tso_at(i / spp);
    out << "\n";
  }
}

// ---------------------------------------------------------------- reports

inline nlohmann::json report_json(const SimulationReport& rep, const CaseConfig& cfg) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["controller"] = rep.controller;
  j["forecaster"] = rep.forecaster;
  if (cfg.sim.controller == ControllerKind::RtoOp && cfg.sim.forecaster.kind == "noisy") {
    j["forecaster_sigma"] = cfg.sim.forecaster.sigma;
    j["forecaster_seed"] = cfg.sim.forecaster.seed;
  }
  j["case"] = cfg.case_id;
  j["reserve"] = cfg.sim.contract.reserve_enabled();
  const auto& l = rep.ledger;
  j["ledger"] = {{"c_E_keur", l.c_e_keur},
                 {"c_p_keur", l.c_p_keur},
                 {"c_t_keur", l.c_t_keur},
                 {"delta_p_kw", l.delta_p_kw},
                 {"I_tot_mwh", l.i_tot_mwh},
                 {"E_tot_mwh", l.e_tot_mwh},
                 {"reserve_revenue_keur", l.reserve_revenue_keur},
                 {"shortfall_penalty_keur", l.shortfall_penalty_keur}};
  j["initial_peak_kw"] = rep.initial_peak_kw;
  j["final_peak_kw"] = rep.final_peak_kw;
  j["steps"] = rep.steps;
  j["periods"] = rep.periods.size();
  j["rto_solves"] = rep.rto_solves;
  j["rule_based_steps"] = rep.rule_based_steps;
  j["fallbacks"] = rep.fallbacks;
  j["faults"] = rep.faults;
  j["remediations"] = rep.remediations;
  j["max_balance_residual_kw"] = rep.max_residual_kw;
  j["events"] = rep.events;
  return j;
}

inline void write_periods_csv(const SimulationReport& rep, std::ostream& out) {
  out << "period_start,import_kwh,export_kwh,average_kw,peak_increment_kw,historical_peak_kw,"
         "cum_peak_cost_keur,cum_energy_cost_keur,reserve_committed_kw,reserve_realized_kw,plan_objective_eur,cuts";
  const std::size_t n = rep.periods.empty() ? 0 : rep.periods.front().soc_end.size();
  for (std::size_t d = 0; d < n; ++d) out << ",soc_" << d << "_kwh";
  out << "\n";
  for (const auto& p : rep.periods) {
    out << format_instant(p.start) << "," << format_number(p.import_kwh) << "," << format_number(p.export_kwh) << ","
        << format_number(p.average_kw) << "," << format_number(p.peak_increment_kw) << ","
        << format_number(p.historical_peak_kw) << "," << format_number(p.cumulative_peak_cost_keur) << ","
        << format_number(p.cumulative_energy_cost_keur) << "," << format_number(p.reserve_committed_kw) << ","
        << format_number(p.reserve_realized_kw) << "," << format_number(p.plan_objective) << "," << p.cuts;
    for (double s : p.soc_end) out << "," << format_number(s);
    out << "\n";
  }
}

inline void write_steps_csv(const SimulationReport& rep, std::ostream& out) {
  out << "timestamp,pv_kw,load_kw,import_kw,export_kw,reserve_kw,rule_based";
  const std::size_t n = rep.step_records.empty() ? 0 : rep.step_records.front().soc.size();
  for (std::size_t d = 0; d < n; ++d) out << ",soc_" << d << "_kwh";
  out << "\n";
  for (const auto& s : rep.step_records) {
    out << format_instant(s.time) << "," << format_number(s.pv_kw) << "," << format_number(s.load_kw) << ","
        << format_number(s.import_kw) << "," << format_number(s.export_kw) << "," << format_number(s.reserve_kw) << ","
        << (s.rule_based ? 1 : 0);
    for (double v : s.soc) out << "," << format_number(v);
    out << "\n";
  }
}

/// report.json, periods.csv and steps.csv under dir.
inline void write_report(const SimulationReport& rep, const CaseConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report_json(rep, cfg).dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "periods.csv");
    write_periods_csv(rep, out);
  }
  if (!rep.step_records.empty()) {
    std::ofstream out(dir / "steps.csv");
    write_steps_csv(rep, out);
  }
}

inline void write_plan_csv(const OpPlan& plan, std::ostream& out) {
  const auto& first = plan.periods.front();
  out << "period_start";
  for (std::size_t d = 0; d < first.shed.size(); ++d) out << ",a_she_" << d;
  for (std::size_t d = 0; d < first.steer.size(); ++d) out << ",a_ste_" << d;
  for (std::size_t d = 0; d < first.curtail.size(); ++d) out << ",a_nst_" << d;
  for (std::size_t d = 0; d < first.charge.size(); ++d) out << ",a_cha_" << d << ",a_dis_" << d << ",soc_" << d << "_kwh";
  out << ",export_kwh,import_kwh,reserve_sym_kw,dp_kw,immediate_cost_eur,delayed_cost_eur\n";
  for (const auto& p : plan.periods) {
    out << format_instant(p.start);
    for (double v : p.shed) out << "," << format_number(v);
    for (double v : p.steer) out << "," << format_number(v);
    for (double v : p.curtail) out << "," << format_number(v);
    for (std::size_t d = 0; d < p.charge.size(); ++d) {
      out << "," << format_number(p.charge[d]) << "," << format_number(p.discharge[d]) << "," << format_number(p.soc[d]);
    }
    out << "," << format_number(p.export_kwh) << "," << format_number(p.import_kwh) << ","
        << format_number(p.reserve_sym_kw) << "," << format_number(p.peak_increment_kw) << ","
        << format_number(p.immediate_cost) << "," << format_number(p.delayed_cost) << "\n";
  }
}

}  // namespace mgc

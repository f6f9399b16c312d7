#pragma once

// Physical, market and temporal types shared by the planner, the real-time
// optimizer and the simulator.
//
// Units: powers in kW, energies in kWh, prices in EUR/kWh or EUR/kW. Instants
// are UTC seconds; durations handed to the optimizers are in hours.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgc {

using Instant = std::chrono::sys_seconds;
using std::chrono::hours;
using std::chrono::minutes;
using std::chrono::seconds;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double to_hours(seconds d) { return static_cast<double>(d.count()) / 3600.0; }

/// Market period, re-solve step and planning horizon.
struct MarketClock {
  minutes period{15};
  minutes step{1};
  hours horizon{24};

  [[nodiscard]] int n_periods() const { return static_cast<int>(horizon / period); }
  [[nodiscard]] double period_hours() const { return to_hours(period); }
  [[nodiscard]] double step_hours() const { return to_hours(step); }
  [[nodiscard]] int steps_per_period() const { return static_cast<int>(period / step); }

  void validate() const {
    if (period.count() <= 0 || step.count() <= 0) throw ConfigError("clock durations must be positive");
    if (step > period) throw ConfigError("re-solve step must not exceed the market period");
    if (period % step != minutes{0}) throw ConfigError("market period must be a multiple of the step");
    if (std::chrono::duration_cast<minutes>(horizon) % period != minutes{0}) {
      throw ConfigError("planning horizon must be a whole number of market periods");
    }
    if (minutes{1440} % period != minutes{0}) throw ConfigError("market period must divide a day");
  }
};

/// Start of the market period containing t. Periods are half-open
/// [k*period, (k+1)*period), aligned on the UTC epoch.
inline Instant period_start(Instant t, const MarketClock& clock) {
  const auto p = std::chrono::duration_cast<seconds>(clock.period).count();
  auto s = t.time_since_epoch().count();
  auto k = s / p;
  if (s % p < 0) --k;
  return Instant{seconds{k * p}};
}

/// Smallest period boundary strictly after t.
inline Instant next_boundary(Instant t, const MarketClock& clock) {
  return period_start(t, clock) + std::chrono::duration_cast<seconds>(clock.period);
}

/// Hours from t to the next boundary, in (0, period].
inline double time_to_boundary_hours(Instant t, const MarketClock& clock) {
  return to_hours(next_boundary(t, clock) - t);
}

struct StorageDevice {
  std::string name = "battery";
  double s_max = 0.0;       // kWh
  double s_min = 0.0;       // kWh
  double p_charge_max = 0.0;     // kW
  double p_discharge_max = 0.0;  // kW
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double s_init = 0.0;      // kWh
  std::optional<double> s_end;  // kWh, terminal target of the planner
  double usage_fee = 0.0;   // EUR/kWh of throughput

  void validate() const {
    if (!(s_min >= 0.0 && s_min <= s_init && s_init <= s_max)) {
      throw ConfigError("storage '" + name + "': require 0 <= s_min <= s_init <= s_max");
    }
    if (!(eta_charge > 0.0 && eta_charge <= 1.0 && eta_discharge > 0.0 && eta_discharge <= 1.0)) {
      throw ConfigError("storage '" + name + "': efficiencies must lie in (0, 1]");
    }
    if (p_charge_max < 0.0 || p_discharge_max < 0.0 || usage_fee < 0.0) {
      throw ConfigError("storage '" + name + "': powers and fee must be non-negative");
    }
    if (s_end && (*s_end < s_min || *s_end > s_max)) {
      throw ConfigError("storage '" + name + "': s_end outside [s_min, s_max]");
    }
  }
};

// Load and non-steerable generation devices draw their series from the
// scenario aggregates: each device takes a fixed share of the measured (or
// forecast) load or PV.
struct NonFlexibleLoad {
  std::string name = "load";
  double share = 1.0;
};

struct SheddableLoad {
  std::string name = "sheddable";
  double share = 0.0;
  double shed_price = 0.0;  // EUR/kWh
};

struct SteerableGenerator {
  std::string name = "genset";
  double capacity_kw = 0.0;
  double gen_price = 0.0;  // EUR/kWh
};

struct NonSteerableGenerator {
  std::string name = "pv";
  double share = 1.0;
  double curtail_price = 0.0;  // EUR/kWh
};

struct DeviceFleet {
  std::vector<NonFlexibleLoad> non_flexible_loads{NonFlexibleLoad{}};
  std::vector<SheddableLoad> sheddable_loads;
  std::vector<SteerableGenerator> steerable_generators;
  std::vector<NonSteerableGenerator> non_steerable_generators{NonSteerableGenerator{}};
  std::vector<StorageDevice> storage;

  void validate() const {
    for (const auto& s : storage) s.validate();
    for (const auto& l : non_flexible_loads) {
      if (l.share < 0.0) throw ConfigError("load '" + l.name + "': negative share");
    }
    for (const auto& l : sheddable_loads) {
      if (l.share < 0.0 || l.shed_price < 0.0) throw ConfigError("sheddable load '" + l.name + "': negative parameter");
    }
    for (const auto& g : steerable_generators) {
      if (g.capacity_kw < 0.0 || g.gen_price < 0.0) throw ConfigError("generator '" + g.name + "': negative parameter");
    }
    for (const auto& g : non_steerable_generators) {
      if (g.share < 0.0 || g.curtail_price < 0.0) throw ConfigError("generator '" + g.name + "': negative parameter");
    }
  }

  [[nodiscard]] std::vector<double> initial_soc() const {
    std::vector<double> out;
    for (const auto& s : storage) out.push_back(s.s_init);
    return out;
  }
};

/// Device-level exogenous values for one time slice (kW).
struct DeviceSample {
  std::vector<double> non_flexible_kw;
  std::vector<double> sheddable_kw;
  std::vector<double> steerable_kw;  // available capacity
  std::vector<double> non_steerable_kw;

  [[nodiscard]] double total_load_kw() const {
    double s = 0.0;
    for (double v : non_flexible_kw) s += v;
    for (double v : sheddable_kw) s += v;
    return s;
  }
  [[nodiscard]] double total_pv_kw() const {
    double s = 0.0;
    for (double v : non_steerable_kw) s += v;
    return s;
  }
};

/// Splits aggregate PV and load values over the fleet's devices.
inline DeviceSample split_sample(const DeviceFleet& fleet, double pv_kw, double load_kw) {
  DeviceSample out;
  for (const auto& l : fleet.non_flexible_loads) out.non_flexible_kw.push_back(l.share * load_kw);
  for (const auto& l : fleet.sheddable_loads) out.sheddable_kw.push_back(l.share * load_kw);
  for (const auto& g : fleet.steerable_generators) out.steerable_kw.push_back(g.capacity_kw);
  for (const auto& g : fleet.non_steerable_generators) out.non_steerable_kw.push_back(g.share * pv_kw);
  return out;
}

struct GridContract {
  double export_price = 0.035;       // EUR/kWh
  double import_price_day = 0.20;    // EUR/kWh
  double import_price_night = 0.12;  // EUR/kWh
  double peak_price = 40.0;          // EUR/kW
  double initial_historical_peak = 150.0;  // kW
  double import_cap = 1500.0;        // kW
  double export_cap = 1500.0;        // kW
  double reserve_price_op = 0.0;     // EUR/kW per market period
  double reserve_penalty_rto = 0.0;  // EUR/kW
  minutes day_start{5 * 60};         // weekday day tariff window [start, end), UTC
  minutes day_end{20 * 60};

  [[nodiscard]] bool reserve_enabled() const { return reserve_price_op > 0.0 || reserve_penalty_rto > 0.0; }

  void validate() const {
    if (export_price < 0 || import_price_day < 0 || import_price_night < 0 || peak_price < 0 ||
        reserve_price_op < 0 || reserve_penalty_rto < 0) {
      throw ConfigError("grid contract prices must be non-negative");
    }
    if (!(import_cap > 0 && export_cap > 0)) throw ConfigError("grid caps must be positive");
    if (initial_historical_peak < 0) throw ConfigError("historical peak must be non-negative");
    if (!(day_start < day_end)) throw ConfigError("day window must be non-empty");
  }
};

/// Import tariff in force at t: day price inside the weekday window, night
/// price otherwise (including whole weekends).
inline double import_price_at(Instant t, const GridContract& contract) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const weekday wd{day};
  const auto tod = duration_cast<minutes>(t - day);
  const bool weekend = wd == Saturday || wd == Sunday;
  if (!weekend && tod >= contract.day_start && tod < contract.day_end) return contract.import_price_day;
  return contract.import_price_night;
}

/// Measured microgrid state: device part (state of charge) and market part
/// (peak, period accumulators, committed reserve).
struct MicrogridState {
  std::vector<double> soc;  // kWh per storage device
  double historical_peak = 0.0;
  double period_import_kwh = 0.0;
  double period_export_kwh = 0.0;
  double committed_reserve_kw = 0.0;
  minutes elapsed_in_period{0};

  /// Average net import power since the period began (kW); zero at the start.
  [[nodiscard]] double realized_average_kw() const {
    if (elapsed_in_period.count() == 0) return 0.0;
    return (period_import_kwh - period_export_kwh) / to_hours(elapsed_in_period);
  }

  void reset_period() {
    period_import_kwh = 0.0;
    period_export_kwh = 0.0;
    elapsed_in_period = minutes{0};
  }
};

inline MicrogridState initial_state(const DeviceFleet& fleet, const GridContract& contract) {
  MicrogridState s;
  s.soc = fleet.initial_soc();
  s.historical_peak = contract.initial_historical_peak;
  return s;
}

/// Civil UTC date-time to an instant.
inline Instant make_instant(int year, unsigned month, unsigned day, int hour = 0, int minute = 0, int second = 0) {
  using namespace std::chrono;
  const sys_days d = year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  return Instant{d} + hours{hour} + minutes{minute} + seconds{second};
}

/// ISO-8601 UTC text, e.g. 2019-05-22T12:15:00Z.
inline std::string format_instant(Instant t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace mgc

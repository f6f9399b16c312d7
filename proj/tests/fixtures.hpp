#pragma once

// Shared test instances.

#include <cmath>
#include <random>
#include <vector>

#include "mgc/domain.hpp"
#include "mgc/opp.hpp"

namespace mgc::testing {

inline StorageDevice table_battery(double s_init = 100.0) {
  StorageDevice s;
  s.s_max = 1350.0;
  s.s_min = 0.0;
  s.p_charge_max = 1350.0;
  s.p_discharge_max = 1350.0;
  s.eta_charge = 0.95;
  s.eta_discharge = 0.95;
  s.s_init = s_init;
  return s;
}

inline DeviceFleet battery_fleet(double s_init = 100.0) {
  DeviceFleet f;
  f.storage.push_back(table_battery(s_init));
  return f;
}

// Daily PV bell (peak pv_peak at noon) and an office-hours load.
inline double synthetic_pv(double hour, double pv_peak) {
  const double x = (hour - 13.0) / 4.0;
  return hour > 6.0 && hour < 20.0 ? pv_peak * std::exp(-x * x) : 0.0;
}
inline double synthetic_load(double hour) {
  return 80.0 + (hour > 8.0 && hour < 18.0 ? 200.0 : 0.0) + 20.0 * std::sin(hour);
}

/// Random one-battery planner instance, starting at a weekday boundary.
inline OppInstance random_opp_instance(std::mt19937_64& rng, int n_periods, double pv_peak_max = 1000.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pv_peak = pv_peak_max * u(rng);
  const double shift = 24.0 * u(rng);
  StorageDevice bat = table_battery();
  bat.s_max = 200.0 + 1200.0 * u(rng);
  bat.p_charge_max = bat.p_discharge_max = 100.0 + 800.0 * u(rng);
  bat.s_init = bat.s_max * u(rng);
  DeviceFleet fleet;
  fleet.storage.push_back(bat);
  GridContract ct;
  MarketClock clock;
  std::vector<double> pv, load;
  const Instant start = make_instant(2019, 5, 22) + minutes{15 * static_cast<int>(shift * 4)};
  for (int k = 0; k < n_periods; ++k) {
    const double h = std::fmod(shift + 0.25 * k, 24.0);
    pv.push_back(synthetic_pv(h, pv_peak) * (0.7 + 0.3 * u(rng)));
    load.push_back(synthetic_load(h) * (0.8 + 0.4 * u(rng)));
  }
  return make_opp_instance(start, pv, load, fleet, ct, clock, 150.0);
}

}  // namespace mgc::testing

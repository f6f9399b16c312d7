#pragma once

// Measured exogenous data on a uniform grid (1-minute means by default).

#include <cmath>
#include <string>
#include <vector>

#include "mgc/domain.hpp"

namespace mgc {

struct Scenario {
  Instant start{};
  minutes step{1};
  std::vector<double> pv_kw;    // mean over [t, t + step)
  std::vector<double> load_kw;
  std::vector<int> s_tso;       // per market period; empty means 1 everywhere

  [[nodiscard]] int size() const { return static_cast<int>(pv_kw.size()); }
  [[nodiscard]] Instant time(int i) const { return start + std::chrono::duration_cast<seconds>(step) * i; }
  [[nodiscard]] Instant end() const { return time(size()); }

  [[nodiscard]] int s_tso_at(int period) const {
    if (s_tso.empty()) return 1;
    if (period < 0 || period >= static_cast<int>(s_tso.size())) return 1;
    return s_tso[period];
  }

  void validate(const MarketClock& clock) const {
    if (step != clock.step) throw ConfigError("scenario resolution differs from the re-solve step");
    if (pv_kw.size() != load_kw.size()) throw ConfigError("scenario PV and load lengths differ");
    if (pv_kw.empty()) throw ConfigError("scenario is empty");
    if (period_start(start, clock) != start) throw ConfigError("scenario must start on a market period boundary");
    if (size() % clock.steps_per_period() != 0) throw ConfigError("scenario must span whole market periods");
    for (int i = 0; i < size(); ++i) {
      if (!std::isfinite(pv_kw[i]) || !std::isfinite(load_kw[i])) {
        throw ConfigError("scenario data gap at step " + std::to_string(i) + " (" + format_instant(time(i)) + ")");
      }
      if (pv_kw[i] < 0.0 || load_kw[i] < 0.0) {
        throw ConfigError("negative scenario value at step " + std::to_string(i) + " (" + format_instant(time(i)) + ")");
      }
    }
    for (int v : s_tso) {
      if (v != 0 && v != 1) throw ConfigError("s_tso entries must be 0 or 1");
    }
  }
};

}  // namespace mgc

#pragma once

// Quarter-hour PV / consumption forecasts over the planning horizon and the
// usual normalized error metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgc/domain.hpp"
#include "mgc/scenario.hpp"

namespace mgc {

struct ForecastVector {
  Instant issue{};
  std::vector<double> pv_kw;    // one value per market period
  std::vector<double> load_kw;
};

class ForecastError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Mean of series over the market period starting at t. Beyond the end of
/// the data the profile repeats from 24 h earlier; with less than a day of
/// data the last full period is held.
inline double period_mean(const Scenario& sc, const std::vector<double>& series, Instant t, const MarketClock& clock) {
  const auto period = std::chrono::duration_cast<seconds>(clock.period);
  if (t < sc.start) throw ForecastError("forecast period at " + format_instant(t) + " is not covered by the scenario");
  if (t + period > sc.end()) {
    Instant back = t;
    while (back + period > sc.end()) back -= hours{24};
    t = back >= sc.start ? back : sc.end() - period;
  }
  if (t < sc.start) throw ForecastError("scenario shorter than one market period");
  const int first = static_cast<int>((t - sc.start) / std::chrono::duration_cast<seconds>(sc.step));
  const int n = clock.steps_per_period();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += series[first + i];
  return s / n;
}

}  // namespace detail

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  [[nodiscard]] virtual ForecastVector forecast(const Scenario& sc, Instant issue, int n_periods,
                                                const MarketClock& clock) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// Period means of the actual data.
class PerfectForecaster final : public Forecaster {
 public:
  [[nodiscard]] ForecastVector forecast(const Scenario& sc, Instant issue, int n_periods,
                                        const MarketClock& clock) const override {
    if (period_start(issue, clock) != issue) throw ForecastError("forecast issue must be a period boundary");
    ForecastVector out;
    out.issue = issue;
    for (int k = 0; k < n_periods; ++k) {
      const Instant t = issue + std::chrono::duration_cast<seconds>(clock.period) * k;
      out.pv_kw.push_back(detail::period_mean(sc, sc.pv_kw, t, clock));
      out.load_kw.push_back(detail::period_mean(sc, sc.load_kw, t, clock));
    }
    return out;
  }
  [[nodiscard]] std::string name() const override { return "perfect"; }
};

/// Same clock time one day earlier.
class PersistenceForecaster final : public Forecaster {
 public:
  [[nodiscard]] ForecastVector forecast(const Scenario& sc, Instant issue, int n_periods,
                                        const MarketClock& clock) const override {
    if (period_start(issue, clock) != issue) throw ForecastError("forecast issue must be a period boundary");
    if (issue - hours{24} < sc.start) throw ForecastError("persistence needs 24 h of history before " + format_instant(issue));
    ForecastVector out;
    out.issue = issue;
    for (int k = 0; k < n_periods; ++k) {
      Instant t = issue + std::chrono::duration_cast<seconds>(clock.period) * k - hours{24};
      while (t >= issue) t -= hours{24};
      out.pv_kw.push_back(detail::period_mean(sc, sc.pv_kw, t, clock));
      out.load_kw.push_back(detail::period_mean(sc, sc.load_kw, t, clock));
    }
    return out;
  }
  [[nodiscard]] std::string name() const override { return "persistence"; }
};

/// Perfect forecasts times independent mean-one lognormal factors
/// exp(sigma*z - sigma^2/2). The draw depends only on (seed, issue time).
class NoisyForecaster final : public Forecaster {
 public:
  NoisyForecaster(double sigma, std::uint64_t seed) : sigma_(sigma), seed_(seed) {
    if (!(sigma >= 0.0)) throw ConfigError("noise spread must be non-negative");
  }

  [[nodiscard]] ForecastVector forecast(const Scenario& sc, Instant issue, int n_periods,
                                        const MarketClock& clock) const override {
    ForecastVector out = PerfectForecaster{}.forecast(sc, issue, n_periods, clock);
    if (sigma_ == 0.0) return out;
    const auto key = static_cast<std::uint64_t>(issue.time_since_epoch().count());
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> z(0.0, 1.0);
    const double shift = 0.5 * sigma_ * sigma_;
    for (int k = 0; k < n_periods; ++k) {
      out.pv_kw[k] = std::max(0.0, out.pv_kw[k] * std::exp(sigma_ * z(rng) - shift));
      out.load_kw[k] = std::max(0.0, out.load_kw[k] * std::exp(sigma_ * z(rng) - shift));
    }
    return out;
  }
  [[nodiscard]] std::string name() const override { return "noisy"; }
  [[nodiscard]] double sigma() const { return sigma_; }

 private:
  double sigma_;
  std::uint64_t seed_;
};

struct ForecasterSpec {
  std::string kind = "perfect";  // perfect | persistence | noisy
  double sigma = 0.2;
  std::uint64_t seed = 1;
};

inline std::unique_ptr<Forecaster> make_forecaster(const ForecasterSpec& spec) {
  if (spec.kind == "perfect") return std::make_unique<PerfectForecaster>();
  if (spec.kind == "persistence") return std::make_unique<PersistenceForecaster>();
  if (spec.kind == "noisy") return std::make_unique<NoisyForecaster>(spec.sigma, spec.seed);
  throw ConfigError("unknown forecaster '" + spec.kind + "'");
}

struct ForecastMetrics {
  double nmae = 0.0;
  double nrmse = 0.0;
  double neme = 0.0;
};

enum class NemeNormalizer {
  PerHorizon,  // |sum(f - w)| / sum|w| within each issue, averaged over issues
  Global,      // |sum(f - w)| / (H * mean|w| over all issues), averaged
};

/// Metrics over aligned forecast/actual horizons (one vector per issue).
inline ForecastMetrics forecast_metrics(std::span<const std::vector<double>> forecasts,
                                        std::span<const std::vector<double>> actuals,
                                        NemeNormalizer neme_mode = NemeNormalizer::PerHorizon) {
  if (forecasts.size() != actuals.size() || forecasts.empty()) throw std::invalid_argument("misaligned forecast sets");
  double abs_err = 0.0, sq_err = 0.0, abs_w = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    if (forecasts[i].size() != actuals[i].size() || forecasts[i].empty()) {
      throw std::invalid_argument("misaligned forecast horizon");
    }
    for (std::size_t h = 0; h < forecasts[i].size(); ++h) {
      const double e = forecasts[i][h] - actuals[i][h];
      abs_err += std::abs(e);
      sq_err += e * e;
      abs_w += std::abs(actuals[i][h]);
      ++count;
    }
  }
  if (abs_w == 0.0) throw std::invalid_argument("zero normalizer: actual series is identically zero");
  const double mean_w = abs_w / static_cast<double>(count);
  ForecastMetrics m;
  m.nmae = abs_err / static_cast<double>(count) / mean_w;
  m.nrmse = std::sqrt(sq_err / static_cast<double>(count)) / mean_w;
  double neme = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    double diff = 0.0, norm = 0.0;
    for (std::size_t h = 0; h < forecasts[i].size(); ++h) {
      diff += forecasts[i][h] - actuals[i][h];
      norm += std::abs(actuals[i][h]);
    }
    if (neme_mode == NemeNormalizer::Global) norm = mean_w * static_cast<double>(forecasts[i].size());
    if (norm == 0.0) throw std::invalid_argument("zero normalizer in a forecast horizon");
    neme += std::abs(diff) / norm;
  }
  m.neme = neme / static_cast<double>(forecasts.size());
  return m;
}

}  // namespace mgc

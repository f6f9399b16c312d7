#pragma once

// Convex piecewise-linear cost-to-go built from parametric planner solves.
//
// Every solve at an anchor state s' yields the optimal value v(s') and the
// initial-state duals mu; since the planner value is convex in the initial
// state, c(s) = v(s') + mu'(s - s') lies below it everywhere. The value
// function is the max over the collected cuts.

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mgc/domain.hpp"
#include "mgc/lp.hpp"
#include "mgc/opp.hpp"

namespace mgc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] double clamp(double x) const { return std::clamp(x, lo, hi); }
};

struct Cut {
  std::vector<double> anchor;  // kWh
  double value = 0.0;          // EUR at the anchor
  std::vector<double> slope;   // EUR/kWh

  [[nodiscard]] double at(std::span<const double> s) const {
    double v = value;
    for (std::size_t d = 0; d < slope.size(); ++d) v += slope[d] * (s[d] - anchor[d]);
    return v;
  }
  [[nodiscard]] double intercept() const {
    double c = value;
    for (std::size_t d = 0; d < slope.size(); ++d) c -= slope[d] * anchor[d];
    return c;
  }
};

struct ValueFunction {
  std::vector<Cut> cuts;
  std::vector<Interval> domain;
  std::string stamp;
  std::vector<std::string> events;  // domain reductions and similar notes
  int solves = 0;

  [[nodiscard]] bool contains(std::span<const double> s, double tol = 1e-9) const {
    for (std::size_t d = 0; d < domain.size(); ++d) {
      if (s[d] < domain[d].lo - tol || s[d] > domain[d].hi + tol) return false;
    }
    return true;
  }

  /// Max over cuts; points outside the domain are clamped onto it.
  [[nodiscard]] double evaluate(std::span<const double> s) const {
    if (cuts.empty()) throw std::logic_error("value function has no cuts");
    if (s.size() != domain.size()) throw std::invalid_argument("state size does not match value function");
    std::vector<double> x(s.begin(), s.end());
    if (!contains(s)) {
      std::clog << "warning: value function evaluated outside its domain; clamped\n";
      for (std::size_t d = 0; d < x.size(); ++d) x[d] = domain[d].clamp(x[d]);
    }
    double best = -lp::kInfinity;
    for (const auto& c : cuts) best = std::max(best, c.at(x));
    return best;
  }
};

/// States reachable by the end of the current market period, dt hours away,
/// under full charge or full discharge.
inline std::vector<Interval> reachable_range(std::span<const double> soc, double dt_hours, const DeviceFleet& fleet) {
  if (soc.size() != fleet.storage.size()) throw ConfigError("state size does not match storage fleet");
  std::vector<Interval> out;
  for (std::size_t d = 0; d < soc.size(); ++d) {
    const auto& s = fleet.storage[d];
    const double lo = std::max(s.s_min, soc[d] - dt_hours * s.p_discharge_max / s.eta_discharge);
    const double hi = std::min(s.s_max, soc[d] + dt_hours * s.p_charge_max * s.eta_charge);
    out.push_back({std::min(lo, soc[d]), std::max(hi, soc[d])});
  }
  return out;
}

inline std::vector<Interval> reachable_range(const MicrogridState& state, Instant t, const MarketClock& clock,
                                             const DeviceFleet& fleet) {
  return reachable_range(state.soc, time_to_boundary_hours(t, clock), fleet);
}

struct CutOptions {
  int budget = 12;    // maximum number of cuts
  double eps = 0.5;   // EUR, accepted envelope gap
};

namespace detail {

class CutBuilder {
 public:
  CutBuilder(ParametricOpp& opp, ValueFunction& vf, const CutOptions& opt) : opp_(opp), vf_(vf), opt_(opt) {}

  /// Solves at s; nullopt when the planner is infeasible there.
  std::optional<Cut> probe(const std::vector<double>& s) {
    ++vf_.solves;
    try {
      const auto plan = opp_.solve(s);
      return Cut{s, plan.objective, plan.initial_soc_duals};
    } catch (const OppInfeasible&) {
      return std::nullopt;
    }
  }

  /// Adds c unless an affinely identical cut is present. Returns true if added.
  bool add(const Cut& c) {
    for (const auto& e : vf_.cuts) {
      bool same = std::abs(e.intercept() - c.intercept()) <= 1e-9 * (1.0 + std::abs(c.intercept()));
      for (std::size_t d = 0; same && d < c.slope.size(); ++d) same = std::abs(e.slope[d] - c.slope[d]) <= 1e-12;
      if (same) return false;
    }
    vf_.cuts.push_back(c);
    return true;
  }

  [[nodiscard]] bool full() const { return static_cast<int>(vf_.cuts.size()) >= opt_.budget; }

  [[nodiscard]] double envelope(std::span<const double> s) const {
    double best = -lp::kInfinity;
    for (const auto& c : vf_.cuts) best = std::max(best, c.at(s));
    return best;
  }

  /// Moves coordinate d of `bad` toward `good` until the planner is
  /// feasible; returns the feasible end point and its cut.
  std::pair<double, Cut> shrink(std::vector<double> point, int d, double bad, double good, Cut good_cut) {
    double b = bad, g = good;
    Cut gc = std::move(good_cut);
    for (int it = 0; it < 40 && std::abs(b - g) > 1e-6; ++it) {
      point[d] = 0.5 * (b + g);
      if (auto c = probe(point)) {
        g = point[d];
        gc = *c;
      } else {
        b = point[d];
      }
    }
    return {g, gc};
  }

  /// Intersection-point refinement along axis d through `base`, over
  /// [lo, hi] (already probed, cuts clo and chi).
  void refine_axis(const std::vector<double>& base, int d, std::vector<std::pair<double, Cut>> anchors) {
    std::sort(anchors.begin(), anchors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::deque<std::pair<std::pair<double, Cut>, std::pair<double, Cut>>> work;
    for (std::size_t k = 0; k + 1 < anchors.size(); ++k) work.emplace_back(anchors[k], anchors[k + 1]);
    while (!work.empty() && !full()) {
      auto [a, b] = work.front();
      work.pop_front();
      const double ma = a.second.slope[d], mb = b.second.slope[d];
      if (std::abs(ma - mb) <= 1e-12 || b.first - a.first <= 1e-6) continue;
      std::vector<double> pa = base, pb = base;
      pa[d] = a.first;
      pb[d] = b.first;
      // Restricted to the axis each cut is affine in x; intersect them.
      const double va = a.second.at(pa), vb = b.second.at(pb);
      double x = (vb - mb * b.first - va + ma * a.first) / (ma - mb);
      x = std::clamp(x, a.first, b.first);
      if (x - a.first <= 1e-6 || b.first - x <= 1e-6) continue;
      std::vector<double> px = base;
      px[d] = x;
      auto c = probe(px);
      if (!c) continue;  // cannot happen inside a feasible interval of a convex domain
      if (c->value - envelope(px) > opt_.eps) {
        add(*c);
        work.emplace_back(a, std::make_pair(x, *c));
        work.emplace_back(std::make_pair(x, *c), b);
      }
    }
  }

 private:
  ParametricOpp& opp_;
  ValueFunction& vf_;
  CutOptions opt_;
};

}  // namespace detail

/// Cuts over `range` for the planner held by `opp`, starting at the most
/// probable state s_star.
inline ValueFunction generate_cuts(ParametricOpp& opp, std::vector<Interval> range, std::vector<double> s_star,
                                   const CutOptions& options = {}) {
  if (options.budget < 2) throw ConfigError("cut budget must be at least 2");
  if (!(options.eps >= 0.0)) throw ConfigError("cut tolerance must be non-negative");
  const std::size_t n = range.size();
  if (s_star.size() != n) throw ConfigError("s_star size does not match range");
  ValueFunction vf;
  vf.domain = range;
  vf.stamp = format_instant(opp.instance().start) + "/" + std::to_string(opp.instance().n_periods());
  for (std::size_t d = 0; d < n; ++d) {
    if (s_star[d] < range[d].lo - 1e-6 || s_star[d] > range[d].hi + 1e-6) throw ConfigError("s_star outside range");
    s_star[d] = range[d].clamp(s_star[d]);
  }
  detail::CutBuilder b(opp, vf, options);
  auto first = b.probe(s_star);
  if (!first) {
    throw OppInfeasible("planner infeasible at the most probable state", {"soc_init"});
  }
  b.add(*first);

  for (std::size_t d = 0; d < n && !b.full(); ++d) {
    std::vector<std::pair<double, Cut>> anchors{{s_star[d], *first}};
    for (double end : {range[d].lo, range[d].hi}) {
      if (std::abs(end - s_star[d]) <= 1e-9) continue;
      std::vector<double> p = s_star;
      p[d] = end;
      auto c = b.probe(p);
      double at = end;
      if (!c) {
        auto [g, gc] = b.shrink(s_star, static_cast<int>(d), end, s_star[d], *first);
        at = g;
        c = gc;
        (end < s_star[d] ? vf.domain[d].lo : vf.domain[d].hi) = g;
        vf.events.push_back("device " + std::to_string(d) + ": planner infeasible at " + std::to_string(end) +
                            " kWh; domain reduced to " + std::to_string(g));
      }
      if (!b.full()) b.add(*c);
      anchors.emplace_back(at, *c);
    }
    b.refine_axis(s_star, static_cast<int>(d), anchors);
  }

  // Corner anchors of the box for multi-device states.
  if (n > 1) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n) && !b.full(); ++mask) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = (mask >> d) & 1 ? vf.domain[d].hi : vf.domain[d].lo;
      if (auto c = b.probe(p)) b.add(*c);
    }
  }
  return vf;
}

inline ValueFunction generate_cuts(const OppInstance& instance, std::vector<Interval> range, std::vector<double> s_star,
                                   const CutOptions& options = {}) {
  ParametricOpp opp(instance);
  return generate_cuts(opp, std::move(range), std::move(s_star), options);
}

/// Adds theta >= v_k + mu_k'(s - s'_k) for every cut, as rows
/// "cut[k]": theta - mu_k's >= v_k - mu_k's'_k. Returns the row indices.
inline std::vector<int> add_epigraph_rows(const ValueFunction& vf, lp::LpModel& model, int theta,
                                          std::span<const int> soc_columns) {
  if (vf.cuts.empty()) throw std::logic_error("value function has no cuts");
  std::vector<int> rows;
  std::vector<lp::Term> terms;
  for (std::size_t k = 0; k < vf.cuts.size(); ++k) {
    const auto& c = vf.cuts[k];
    terms.clear();
    terms.push_back({theta, 1.0});
    for (std::size_t d = 0; d < c.slope.size(); ++d) terms.push_back({soc_columns[d], -c.slope[d]});
    rows.push_back(model.add_row(indexed("cut", static_cast<int>(k)), lp::Sense::GreaterEqual, c.intercept(), terms));
  }
  return rows;
}

inline void write_value_function_csv(const ValueFunction& vf, std::ostream& out) {
  const std::size_t n = vf.domain.size();
  out << "cut";
  for (std::size_t d = 0; d < n; ++d) out << ",anchor_" << d;
  out << ",value";
  for (std::size_t d = 0; d < n; ++d) out << ",slope_" << d;
  out << "\n" << std::setprecision(12);
  for (std::size_t k = 0; k < vf.cuts.size(); ++k) {
    const auto& c = vf.cuts[k];
    out << k;
    for (double a : c.anchor) out << "," << a;
    out << "," << c.value;
    for (double m : c.slope) out << "," << m;
    out << "\n";
  }
}

}  // namespace mgc

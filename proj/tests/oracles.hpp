#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "mgc/lp.hpp"

namespace mgc::testing {

/// Optimal objective of a bounded LP by enumerating every vertex: all choices
/// of n linearly independent active constraints (rows or bounds); the
/// feasibility check enforces equality rows.
/// Returns nullopt when no feasible vertex exists.
inline std::optional<double> vertex_enumeration(const lp::LpModel& model) {
  const int n = model.num_variables();
  const int m = model.num_rows();
  struct Constraint {
    std::vector<double> a;
    double b;
  };
  std::vector<Constraint> cons;
  for (int i = 0; i < m; ++i) {
    std::vector<double> a(n);
    for (int j = 0; j < n; ++j) a[j] = model.coefficient(i, j);
    cons.push_back({a, model.rhs(i)});
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> a(n, 0.0);
    a[j] = 1.0;
    cons.push_back({a, model.lower(j)});
    cons.push_back({a, model.upper(j)});
  }
  const int k = static_cast<int>(cons.size());

  auto feasible = [&](const Eigen::VectorXd& x) {
    const double tol = 1e-8;
    for (int j = 0; j < n; ++j) {
      if (x[j] < model.lower(j) - tol || x[j] > model.upper(j) + tol) return false;
    }
    for (int i = 0; i < m; ++i) {
      double act = 0.0;
      for (int j = 0; j < n; ++j) act += model.coefficient(i, j) * x[j];
      const double scale = tol * (1.0 + std::abs(model.rhs(i)));
      switch (model.sense(i)) {
        case lp::Sense::LessEqual: if (act > model.rhs(i) + scale) return false; break;
        case lp::Sense::GreaterEqual: if (act < model.rhs(i) - scale) return false; break;
        case lp::Sense::Equal: if (std::abs(act - model.rhs(i)) > scale) return false; break;
      }
    }
    return true;
  };

  std::optional<double> best;
  std::vector<int> pick(n);
  // Iterate all n-subsets of k constraints in lexicographic order.
  for (int i = 0; i < n; ++i) pick[i] = i;
  if (n > k) return std::nullopt;
  for (;;) {
    {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd b(n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) a(r, c) = cons[pick[r]].a[c];
        b[r] = cons[pick[r]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() == n) {
        const Eigen::VectorXd x = lu.solve(b);
        if (feasible(x)) {
          double obj = 0.0;
          for (int j = 0; j < n; ++j) obj += model.cost(j) * x[j];
          if (!best || obj < *best) best = obj;
        }
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == k - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// Random bounded LP with up to max_n columns and max_m rows; right-hand sides
/// are built around an interior point so most instances are feasible.
inline lp::LpModel random_bounded_lp(std::mt19937_64& rng, int max_n, int max_m) {
  std::uniform_int_distribution<int> nd(1, max_n), md(1, max_m);
  std::uniform_real_distribution<double> coef(-5.0, 5.0), unit(0.0, 1.0);
  const int n = nd(rng), m = md(rng);
  lp::LpModel model;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = std::round(coef(rng)) * 0.5;
    const double hi = lo + 0.5 + std::round(unit(rng) * 10.0) * 0.5;
    model.add_variable(lo, hi, std::round(coef(rng) * 2.0) / 2.0);
    x0[j] = lo + unit(rng) * (hi - lo);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<lp::Term> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.25) continue;
      const double v = std::round(coef(rng) * 2.0) / 2.0;
      terms.push_back({j, v});
      act += v * x0[j];
    }
    const double p = unit(rng);
    lp::Sense sense = p < 0.2 ? lp::Sense::Equal : p < 0.6 ? lp::Sense::LessEqual : lp::Sense::GreaterEqual;
    double rhs = act;
    if (sense == lp::Sense::LessEqual) rhs += unit(rng) * 2.0;
    if (sense == lp::Sense::GreaterEqual) rhs -= unit(rng) * 2.0;
    if (unit(rng) < 0.1) rhs += (unit(rng) - 0.5) * 40.0;  // occasionally infeasible
    model.add_row("r" + std::to_string(i), sense, rhs, terms);
  }
  return model;
}

}  // namespace mgc::testing

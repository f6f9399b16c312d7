#pragma once

// Dense linear programs and a bounded-variable revised simplex.
//
// Problems are stated as
//
//   min  c'x
//   s.t. a_i'x  (<=, =, >=)  b_i     for every row i
//        lo <= x <= hi
//
// Internally each row gets a logical (slack) column s_i with a_i'x + s_i = b_i
// so the all-slack basis is the identity. Rows keep a unique label so callers
// can look up dual values without tracking indices.
//
// Dual convention: for a minimization, the dual of row i is d(optimal value)/d b_i.
// A binding <= row therefore has a non-positive dual and a binding >= row a
// non-negative one.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mgc::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };
enum class BasisStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

struct Term {
  int column;
  double value;
};

class LpModel {
 public:
  int add_variable(double lower, double upper, double cost, std::string name = {}) {
    if (std::isnan(lower) || std::isnan(upper) || std::isnan(cost) || std::isinf(cost)) {
      throw ModelError("variable '" + name + "': non-finite cost or NaN bound");
    }
    if (lower > upper || lower == kInfinity || upper == -kInfinity) {
      throw ModelError("variable '" + name + "': empty bound interval");
    }
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    names_.push_back(std::move(name));
    return static_cast<int>(cost_.size()) - 1;
  }

  int add_row(std::string label, Sense sense, double rhs, std::span<const Term> terms) {
    if (label.empty()) throw ModelError("row label must not be empty");
    if (!std::isfinite(rhs)) throw ModelError("row '" + label + "': non-finite right-hand side");
    const int index = num_rows();
    if (!label_index_.emplace(label, index).second) {
      throw ModelError("duplicate row label '" + label + "'");
    }
    std::vector<double> row(num_variables(), 0.0);
    for (const Term& t : terms) {
      if (t.column < 0 || t.column >= num_variables()) {
        throw ModelError("row '" + label + "': column index out of range");
      }
      if (!std::isfinite(t.value)) throw ModelError("row '" + label + "': non-finite coefficient");
      row[t.column] += t.value;
    }
    rows_.push_back(std::move(row));
    senses_.push_back(sense);
    rhs_.push_back(rhs);
    labels_.push_back(std::move(label));
    return index;
  }

  int add_row(std::string label, Sense sense, double rhs, std::initializer_list<Term> terms) {
    return add_row(std::move(label), sense, rhs, std::span<const Term>(terms.begin(), terms.size()));
  }

  void set_rhs(int row, double rhs) {
    check_row(row);
    if (!std::isfinite(rhs)) throw ModelError("non-finite right-hand side");
    rhs_[row] = rhs;
  }
  void set_cost(int column, double cost) {
    check_column(column);
    cost_[column] = cost;
  }
  void set_bounds(int column, double lower, double upper) {
    check_column(column);
    if (lower > upper) throw ModelError("empty bound interval");
    lower_[column] = lower;
    upper_[column] = upper;
  }

  [[nodiscard]] int num_variables() const { return static_cast<int>(cost_.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(rows_.size()); }
  [[nodiscard]] double cost(int j) const { return cost_[j]; }
  [[nodiscard]] double lower(int j) const { return lower_[j]; }
  [[nodiscard]] double upper(int j) const { return upper_[j]; }
  [[nodiscard]] const std::string& name(int j) const { return names_[j]; }
  [[nodiscard]] Sense sense(int i) const { return senses_[i]; }
  [[nodiscard]] double rhs(int i) const { return rhs_[i]; }
  [[nodiscard]] const std::string& label(int i) const { return labels_[i]; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }

  /// Rows added before a variable existed are implicitly zero in that column.
  [[nodiscard]] double coefficient(int i, int j) const {
    const auto& row = rows_[i];
    return j < static_cast<int>(row.size()) ? row[j] : 0.0;
  }

  [[nodiscard]] int row_index(std::string_view label) const {
    auto it = label_index_.find(std::string(label));
    if (it == label_index_.end()) throw ModelError("unknown row label '" + std::string(label) + "'");
    return it->second;
  }
  [[nodiscard]] bool has_row(std::string_view label) const {
    return label_index_.count(std::string(label)) != 0;
  }

  /// Row activities a_i'x.
  [[nodiscard]] std::vector<double> activity(std::span<const double> x) const {
    std::vector<double> out(num_rows(), 0.0);
    for (int i = 0; i < num_rows(); ++i) {
      const auto& row = rows_[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
    return out;
  }

 private:
  void check_row(int i) const {
    if (i < 0 || i >= num_rows()) throw ModelError("row index out of range");
  }
  void check_column(int j) const {
    if (j < 0 || j >= num_variables()) throw ModelError("column index out of range");
  }

  std::vector<double> cost_, lower_, upper_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> rows_;
  std::vector<Sense> senses_;
  std::vector<double> rhs_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> label_index_;
};

struct LpSolution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> row_duals;
  std::map<std::string, double, std::less<>> duals;
  std::vector<double> reduced_costs;
  std::vector<double> row_activity;
  std::vector<BasisStatus> column_basis;
  std::vector<BasisStatus> row_basis;
  /// Unbounded: a primal improving direction over the structural columns.
  /// Infeasible: phase-one row multipliers (a Farkas-type certificate).
  std::vector<double> ray;
  /// Infeasible: labels of rows carrying a non-zero phase-one multiplier.
  std::vector<std::string> infeasible_rows;
  int iterations = 0;

  [[nodiscard]] bool optimal() const { return status == Status::Optimal; }
};

inline double dual_of(const LpSolution& solution, std::string_view label) {
  if (solution.status != Status::Optimal) {
    throw ModelError("dual requested from a non-optimal solution");
  }
  auto it = solution.duals.find(label);
  if (it == solution.duals.end()) throw ModelError("unknown row label '" + std::string(label) + "'");
  return it->second;
}

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int bland_threshold = 50;
  int max_iterations = 200000;
  /// Basic values are recomputed from scratch this often.
  int refresh_interval = 50;
  /// The basis is refactorized after this many eta updates.
  int reinvert_interval = 100;
};

/// Basis representation: sparse LU of a reference basis followed by the
/// elementary (eta) matrices of the pivots made since it was factorized.
class BasisFactor {
 public:
  /// Returns false when the matrix is singular.
  bool factor(const Eigen::SparseMatrix<double>& basis) {
    m_ = static_cast<int>(basis.rows());
    etas_.clear();
    if (m_ == 0) return true;
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    return lu_.info() == Eigen::Success;
  }

  /// v <- B^-1 v
  void ftran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    v = lu_.solve(v).eval();
    for (const auto& e : etas_) {
      const double xr = v[e.row] / e.pivot;
      if (xr != 0.0) {
        for (auto [i, a] : e.entries) v[i] -= a * xr;
      }
      v[e.row] = xr;
    }
  }

  /// v <- B^-T v
  void btran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = v[it->row];
      for (auto [i, a] : it->entries) acc -= a * v[i];
      v[it->row] = acc / it->pivot;
    }
    v = lu_.transpose().solve(v).eval();
  }

  /// Records the replacement of basis position r by a column with
  /// alpha = B^-1 a_q.
  void update(int r, const Eigen::VectorXd& alpha) {
    Eta e;
    e.row = r;
    e.pivot = alpha[r];
    for (int i = 0; i < m_; ++i) {
      if (i != r && alpha[i] != 0.0) e.entries.emplace_back(i, alpha[i]);
    }
    etas_.push_back(std::move(e));
  }

  [[nodiscard]] int num_updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;
  };
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  int m_ = 0;
};

/// Stateful bounded-variable revised simplex. Keeps its basis between calls
/// so that a re-solve after right-hand-side edits starts from the previous
/// optimum (dual simplex, then primal clean-up).
class SimplexEngine {
 public:
  explicit SimplexEngine(const LpModel& model, SimplexOptions options = {})
      : n_(model.num_variables()), m_(model.num_rows()), opt_(options), labels_(model.labels()) {
    col_start_.assign(n_ + 1, 0);
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        const double v = model.coefficient(i, j);
        if (v != 0.0) cols[j].emplace_back(i, v);
      }
    }
    for (int j = 0; j < n_; ++j) {
      col_start_[j + 1] = col_start_[j] + static_cast<int>(cols[j].size());
      for (auto [i, v] : cols[j]) {
        col_row_.push_back(i);
        col_val_.push_back(v);
      }
    }
    const int total = n_ + m_;
    cost_.assign(total, 0.0);
    lo_.assign(total, 0.0);
    hi_.assign(total, 0.0);
    for (int j = 0; j < n_; ++j) {
      cost_[j] = model.cost(j);
      lo_[j] = model.lower(j);
      hi_[j] = model.upper(j);
    }
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      rhs_[i] = model.rhs(i);
      const int s = n_ + i;
      switch (model.sense(i)) {
        case Sense::LessEqual: lo_[s] = 0.0; hi_[s] = kInfinity; break;
        case Sense::GreaterEqual: lo_[s] = -kInfinity; hi_[s] = 0.0; break;
        case Sense::Equal: lo_[s] = 0.0; hi_[s] = 0.0; break;
      }
    }
    status_.assign(total, BasisStatus::AtLower);
    x_.assign(total, 0.0);
    pos_.assign(total, -1);
    head_.resize(m_);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        status_[j] = BasisStatus::AtLower;
        x_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        status_[j] = BasisStatus::AtUpper;
        x_[j] = hi_[j];
      } else {
        status_[j] = BasisStatus::Free;
        x_[j] = 0.0;
      }
    }
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
      status_[n_ + i] = BasisStatus::Basic;
    }
    reinvert_factor();
  }

  void set_rhs(int row, double value) {
    if (row < 0 || row >= m_) throw ModelError("row index out of range");
    rhs_[row] = value;
  }

  [[nodiscard]] int num_rows() const { return m_; }
  [[nodiscard]] int num_columns() const { return n_; }

  LpSolution solve() {
    iterations_ = 0;
    degenerate_run_ = 0;
    bland_ = false;
    recompute_basics();
    if (solved_once_ && max_primal_infeasibility() > opt_.feasibility_tol && dual_feasible()) {
      run_dual();
    }
    LpSolution sol = run_primal();
    solved_once_ = (sol.status == Status::Optimal);
    return sol;
  }

 private:
  struct Ratio {
    int row = -1;
    double step = kInfinity;
    bool to_upper = false;
  };

  [[nodiscard]] double dot_column(const Eigen::VectorXd& y, int j) const {
    if (j >= n_) return y[j - n_];
    double acc = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) acc += y[col_row_[k]] * col_val_[k];
    return acc;
  }

  void ftran(int j, Eigen::VectorXd& out) const {
    out.setZero(m_);
    if (j >= n_) {
      out[j - n_] = 1.0;
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) out[col_row_[k]] = col_val_[k];
    }
    factor_.ftran(out);
  }

  void recompute_basics() {
    Eigen::VectorXd r(m_);
    for (int i = 0; i < m_; ++i) r[i] = rhs_[i];
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == BasisStatus::Basic || x_[j] == 0.0) continue;
      if (j >= n_) {
        r[j - n_] -= x_[j];
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) r[col_row_[k]] -= col_val_[k] * x_[j];
      }
    }
    factor_.ftran(r);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = r[i];
  }

  void reinvert_factor() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      if (j >= n_) {
        trip.emplace_back(j - n_, i, 1.0);
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) trip.emplace_back(col_row_[k], i, col_val_[k]);
      }
    }
    Eigen::SparseMatrix<double> basis(m_, m_);
    basis.setFromTriplets(trip.begin(), trip.end());
    basis.makeCompressed();
    if (!factor_.factor(basis)) throw SolverFailure("basis matrix became singular");
  }

  void reinvert() {
    if (m_ == 0) return;
    reinvert_factor();
    recompute_basics();
  }

  [[nodiscard]] double infeasibility_of(int j) const {
    const double x = x_[j];
    if (x < lo_[j]) return lo_[j] - x;
    if (x > hi_[j]) return x - hi_[j];
    return 0.0;
  }

  [[nodiscard]] double max_primal_infeasibility() const {
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) worst = std::max(worst, infeasibility_of(head_[i]));
    return worst;
  }

  [[nodiscard]] double max_residual() const {
    std::vector<double> r(rhs_.begin(), rhs_.end());
    for (int j = 0; j < n_ + m_; ++j) {
      if (x_[j] == 0.0) continue;
      if (j >= n_) {
        r[j - n_] -= x_[j];
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) r[col_row_[k]] -= col_val_[k] * x_[j];
      }
    }
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) worst = std::max(worst, std::abs(r[i]) / (1.0 + std::abs(rhs_[i])));
    return worst;
  }

  void phase_two_costs(Eigen::VectorXd& cb) const {
    cb.resize(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
  }

  [[nodiscard]] bool dual_feasible() const {
    Eigen::VectorXd cb;
    phase_two_costs(cb);
    Eigen::VectorXd y = cb;
    factor_.btran(y);
    const double tol = 1e-7;
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == BasisStatus::Basic || lo_[j] == hi_[j]) continue;
      const double d = cost_[j] - dot_column(y, j);
      if (status_[j] == BasisStatus::AtLower && d < -tol) return false;
      if (status_[j] == BasisStatus::AtUpper && d > tol) return false;
      if (status_[j] == BasisStatus::Free && std::abs(d) > tol) return false;
    }
    return true;
  }

  void pivot(int r, int q, const Eigen::VectorXd& alpha, BasisStatus leaving_status) {
    const int leaving = head_[r];
    factor_.update(r, alpha);
    status_[leaving] = leaving_status;
    pos_[leaving] = -1;
    head_[r] = q;
    pos_[q] = r;
    status_[q] = BasisStatus::Basic;
  }

  void count_iteration() {
    ++iterations_;
    if (iterations_ > opt_.max_iterations) {
      throw SolverFailure("simplex iteration limit exceeded (possible cycling)");
    }
    if (factor_.num_updates() >= std::max(1, opt_.reinvert_interval)) {
      reinvert();
    } else if (iterations_ % opt_.refresh_interval == 0) {
      recompute_basics();
    }
  }

  // Harris two-pass ratio test; in phase one, infeasible basics block only
  // where they regain feasibility.
  Ratio primal_ratio(const Eigen::VectorXd& alpha, double dir, bool phase1) const {
    const double ftol = opt_.feasibility_tol;
    auto target_of = [&](int i, double rate, double& target) {
      const int j = head_[i];
      const double x = x_[j];
      if (phase1 && x < lo_[j] - ftol) {
        if (rate <= 0) return false;
        target = lo_[j];
        return true;
      }
      if (phase1 && x > hi_[j] + ftol) {
        if (rate >= 0) return false;
        target = hi_[j];
        return true;
      }
      target = rate < 0 ? lo_[j] : hi_[j];
      return std::isfinite(target);
    };

    Ratio best;
    if (bland_) {
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
        const double rate = -dir * alpha[i];
        double target;
        if (!target_of(i, rate, target)) continue;
        const double ratio = std::max(0.0, (target - x_[head_[i]]) / rate);
        if (best.row < 0 || ratio < best.step - 1e-12 ||
            (ratio <= best.step + 1e-12 && head_[i] < head_[best.row])) {
          best.row = i;
          best.step = ratio;
          best.to_upper = target == hi_[head_[i]];
        }
      }
      return best;
    }

    double theta_max = kInfinity;
    for (int i = 0; i < m_; ++i) {
      if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
      const double rate = -dir * alpha[i];
      double target;
      if (!target_of(i, rate, target)) continue;
      const double relaxed = rate < 0 ? (x_[head_[i]] - target + ftol) / (-rate) : (target - x_[head_[i]] + ftol) / rate;
      theta_max = std::min(theta_max, relaxed);
    }
    if (!std::isfinite(theta_max)) return best;
    double best_pivot = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
      const double rate = -dir * alpha[i];
      double target;
      if (!target_of(i, rate, target)) continue;
      const double ratio = (target - x_[head_[i]]) / rate;
      if (ratio <= theta_max && std::abs(alpha[i]) > best_pivot) {
        best_pivot = std::abs(alpha[i]);
        best.row = i;
        best.step = std::max(0.0, ratio);
        best.to_upper = target == hi_[head_[i]];
      }
    }
    return best;
  }

  LpSolution run_primal() {
    Eigen::VectorXd cb(m_), y(m_), alpha(m_);
    bool verified = false;
    for (;;) {
      // Phase selection and basic costs.
      bool phase1 = false;
      for (int i = 0; i < m_; ++i) {
        const int j = head_[i];
        if (x_[j] < lo_[j] - opt_.feasibility_tol) {
          cb[i] = -1.0;
          phase1 = true;
        } else if (x_[j] > hi_[j] + opt_.feasibility_tol) {
          cb[i] = 1.0;
          phase1 = true;
        } else {
          cb[i] = 0.0;
        }
      }
      if (!phase1) phase_two_costs(cb);
      y = cb;
      factor_.btran(y);

      int q = -1;
      double best = 0.0;
      double dq = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        const BasisStatus st = status_[j];
        if (st == BasisStatus::Basic || lo_[j] == hi_[j]) continue;
        const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(y, j);
        bool eligible = false;
        if (st == BasisStatus::AtLower) eligible = d < -opt_.optimality_tol;
        else if (st == BasisStatus::AtUpper) eligible = d > opt_.optimality_tol;
        else eligible = std::abs(d) > opt_.optimality_tol;
        if (!eligible) continue;
        if (bland_) {
          q = j;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dq = d;
        }
      }

      if (q < 0) {
        // Candidate termination: confirm on a freshly computed basis.
        if (!verified && iterations_ > 0) {
          recompute_basics();
          if (max_residual() > 1e-9) reinvert();
          verified = true;
          continue;
        }
        return phase1 ? make_infeasible(y) : make_optimal(y);
      }
      verified = false;

      const double dir = dq < 0 ? 1.0 : -1.0;
      ftran(q, alpha);
      Ratio ratio = primal_ratio(alpha, dir, phase1);
      const double range = hi_[q] - lo_[q];
      const bool can_flip = status_[q] != BasisStatus::Free && std::isfinite(range);

      if (ratio.row < 0 && !can_flip) {
        if (phase1) throw SolverFailure("phase one became unbounded (numerical trouble)");
        return make_unbounded(q, dir, alpha);
      }

      double step;
      if (can_flip && (ratio.row < 0 || range <= ratio.step)) {
        step = range;
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * step * alpha[i];
        if (status_[q] == BasisStatus::AtLower) {
          status_[q] = BasisStatus::AtUpper;
          x_[q] = hi_[q];
        } else {
          status_[q] = BasisStatus::AtLower;
          x_[q] = lo_[q];
        }
      } else {
        step = ratio.step;
        const int r = ratio.row;
        const int leaving = head_[r];
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * step * alpha[i];
        x_[q] += dir * step;
        const bool fixed = lo_[leaving] == hi_[leaving];
        x_[leaving] = ratio.to_upper ? hi_[leaving] : lo_[leaving];
        pivot(r, q, alpha, (ratio.to_upper && !fixed) ? BasisStatus::AtUpper : BasisStatus::AtLower);
      }

      if (step <= 1e-12) {
        if (++degenerate_run_ >= opt_.bland_threshold) bland_ = true;
      } else {
        degenerate_run_ = 0;
        bland_ = false;
      }
      count_iteration();
    }
  }

  // Dual simplex from a dual-feasible basis; stops when primal feasible or
  // when no entering column exists (primal phase one then settles status).
  void run_dual() {
    Eigen::VectorXd cb(m_), y(m_), alpha(m_);
    std::vector<double> d(n_ + m_), arow(n_ + m_);
    for (;;) {
      int r = -1;
      double worst = opt_.feasibility_tol;
      for (int i = 0; i < m_; ++i) {
        const double v = infeasibility_of(head_[i]);
        if (v > worst) {
          worst = v;
          r = i;
        }
      }
      if (r < 0) return;
      const int leaving = head_[r];
      const bool increase = x_[leaving] < lo_[leaving];
      const double target = increase ? lo_[leaving] : hi_[leaving];
      const double delta = std::abs(target - x_[leaving]);

      phase_two_costs(cb);
      y = cb;
      factor_.btran(y);
      Eigen::VectorXd rho = Eigen::VectorXd::Zero(m_);
      rho[r] = 1.0;
      factor_.btran(rho);

      // x_r moves by -alpha_rj * dx_j when nonbasic j moves by dx_j.
      double theta_max = kInfinity;
      for (int j = 0; j < n_ + m_; ++j) {
        arow[j] = 0.0;
        if (status_[j] == BasisStatus::Basic || lo_[j] == hi_[j]) continue;
        const double a = dot_column(rho, j);
        arow[j] = a;
        if (std::abs(a) <= opt_.pivot_tol) continue;
        const double s = increase ? -a : a;  // dx_j direction that helps, signed
        const BasisStatus st = status_[j];
        if (!((st == BasisStatus::AtLower && s > 0) || (st == BasisStatus::AtUpper && s < 0) ||
              st == BasisStatus::Free)) {
          continue;
        }
        d[j] = cost_[j] - dot_column(y, j);
        theta_max = std::min(theta_max, (std::abs(d[j]) + 1e-9) / std::abs(a));
      }
      if (!std::isfinite(theta_max)) return;
      int q = -1;
      double best_pivot = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        const double a = arow[j];
        if (status_[j] == BasisStatus::Basic || lo_[j] == hi_[j] || std::abs(a) <= opt_.pivot_tol) continue;
        const double s = increase ? -a : a;
        const BasisStatus st = status_[j];
        if (!((st == BasisStatus::AtLower && s > 0) || (st == BasisStatus::AtUpper && s < 0) ||
              st == BasisStatus::Free)) {
          continue;
        }
        if (std::abs(d[j]) / std::abs(a) <= theta_max && std::abs(a) > best_pivot) {
          best_pivot = std::abs(a);
          q = j;
        }
      }
      if (q < 0) return;

      const double a_rq = arow[q];
      const double dir = increase ? (a_rq < 0 ? 1.0 : -1.0) : (a_rq > 0 ? 1.0 : -1.0);
      const double step = delta / std::abs(a_rq);
      ftran(q, alpha);
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * step * alpha[i];
      x_[q] += dir * step;
      x_[leaving] = target;
      const bool fixed = lo_[leaving] == hi_[leaving];
      pivot(r, q, alpha, (!increase && !fixed) ? BasisStatus::AtUpper : BasisStatus::AtLower);
      count_iteration();
    }
  }

  void fill_common(LpSolution& sol) const {
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.column_basis.assign(status_.begin(), status_.begin() + n_);
    sol.row_basis.assign(status_.begin() + n_, status_.end());
    sol.row_activity.resize(m_);
    for (int i = 0; i < m_; ++i) sol.row_activity[i] = rhs_[i] - x_[n_ + i];
  }

  LpSolution make_optimal(const Eigen::VectorXd& y) const {
    LpSolution sol;
    sol.status = Status::Optimal;
    fill_common(sol);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
    sol.objective = obj;
    sol.row_duals.assign(y.data(), y.data() + m_);
    for (int i = 0; i < m_; ++i) sol.duals.emplace(labels_[i], y[i]);
    sol.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = cost_[j] - dot_column(y, j);
    return sol;
  }

  LpSolution make_infeasible(const Eigen::VectorXd& y) const {
    LpSolution sol;
    sol.status = Status::Infeasible;
    fill_common(sol);
    sol.ray.assign(y.data(), y.data() + m_);
    for (int i = 0; i < m_; ++i) {
      if (std::abs(y[i]) > 1e-9) sol.infeasible_rows.push_back(labels_[i]);
    }
    return sol;
  }

  LpSolution make_unbounded(int q, double dir, const Eigen::VectorXd& alpha) const {
    LpSolution sol;
    sol.status = Status::Unbounded;
    fill_common(sol);
    sol.ray.assign(n_, 0.0);
    if (q < n_) sol.ray[q] = dir;
    for (int i = 0; i < m_; ++i) {
      if (head_[i] < n_) sol.ray[head_[i]] = -dir * alpha[i];
    }
    return sol;
  }

  int n_, m_;
  SimplexOptions opt_;
  std::vector<std::string> labels_;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> cost_, lo_, hi_, rhs_;
  std::vector<BasisStatus> status_;
  std::vector<double> x_;
  std::vector<int> pos_, head_;
  BasisFactor factor_;
  int iterations_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
  bool solved_once_ = false;
};

/// Solver interface; SimplexSolver is the bundled implementation.
class Solver {
 public:
  virtual ~Solver() = default;
  [[nodiscard]] virtual LpSolution solve(const LpModel& model) const = 0;
};

class SimplexSolver final : public Solver {
 public:
  explicit SimplexSolver(SimplexOptions options = {}) : options_(options) {}
  [[nodiscard]] LpSolution solve(const LpModel& model) const override {
    SimplexEngine engine(model, options_);
    return engine.solve();
  }

 private:
  SimplexOptions options_;
};

inline LpSolution solve_lp(const LpModel& model) { return SimplexSolver{}.solve(model); }

/// Duality gap |c'x - (b'y + sum of bound terms)| for an optimal solution.
inline double duality_gap(const LpModel& model, const LpSolution& sol) {
  double primal = 0.0, dual = 0.0;
  for (int j = 0; j < model.num_variables(); ++j) {
    primal += model.cost(j) * sol.x[j];
    dual += sol.reduced_costs[j] * sol.x[j];
  }
  for (int i = 0; i < model.num_rows(); ++i) dual += model.rhs(i) * sol.row_duals[i];
  return std::abs(primal - dual);
}

/// Writes the model in CPLEX LP text format, for cross-checking with external solvers.
inline void write_lp_format(const LpModel& model, std::ostream& out) {
  auto col_name = [&](int j) { return model.name(j).empty() ? "x" + std::to_string(j) : model.name(j); };
  auto sanitize = [](std::string s) {
    for (char& c : s) {
      if (c == '[' || c == ']' || c == ',' || c == ' ') c = '_';
    }
    return s;
  };
  out.precision(17);
  out << "\\ generated by mgc::lp\nMinimize\n obj:";
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.cost(j) != 0.0) out << ' ' << (model.cost(j) < 0 ? "- " : "+ ") << std::abs(model.cost(j)) << ' ' << sanitize(col_name(j));
  }
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_rows(); ++i) {
    out << ' ' << sanitize(model.label(i)) << ':';
    bool any = false;
    for (int j = 0; j < model.num_variables(); ++j) {
      const double v = model.coefficient(i, j);
      if (v == 0.0) continue;
      any = true;
      out << ' ' << (v < 0 ? "- " : "+ ") << std::abs(v) << ' ' << sanitize(col_name(j));
    }
    if (!any) out << " 0 " << sanitize(col_name(0));
    const char* op = model.sense(i) == Sense::LessEqual ? "<=" : model.sense(i) == Sense::Equal ? "=" : ">=";
    out << ' ' << op << ' ' << model.rhs(i) << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const double lo = model.lower(j), hi = model.upper(j);
    const std::string nm = sanitize(col_name(j));
    if (std::isinf(lo) && std::isinf(hi)) {
      out << ' ' << nm << " free\n";
    } else {
      out << ' ';
      if (std::isinf(lo)) out << "-inf"; else out << lo;
      out << " <= " << nm << " <= ";
      if (std::isinf(hi)) out << "+inf"; else out << hi;
      out << '\n';
    }
  }
  out << "End\n";
}

}  // namespace mgc::lp

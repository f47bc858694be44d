#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "persuasion/error.hpp"
#include "persuasion/matrix.hpp"

namespace persuasion::lp {

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct LinearConstraint {
  Vector coefficients;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

/// maximize c^T x  subject to  rows (<=, >=, =) rhs,  x >= 0.
struct LinearProgram {
  Vector objective;
  std::vector<LinearConstraint> constraints;

  std::size_t variable_count() const noexcept { return objective.size(); }

  void add(Vector coefficients, Sense sense, double rhs) {
    require(coefficients.size() == objective.size(), ErrorCode::kDimensionMismatch,
            "constraint width differs from objective");
    constraints.push_back({std::move(coefficients), sense, rhs});
  }
};

struct SimplexOptions {
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-11;
  double feasibility_tolerance = 1e-9;
  double duality_gap_tolerance = 1e-7;
  std::size_t max_iterations = 200000;
};

struct LpSolution {
  Vector x;
  double objective = 0.0;
  Vector duals;  // one per constraint, in the original row orientation
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

/// Dense tableau for the two-phase primal simplex with Bland's rule.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    const std::size_t n = lp.variable_count();
    rows_ = lp.constraints.size();

    std::size_t extra = 0;
    for (const auto& c : lp.constraints) extra += c.sense == Sense::kEqual ? 1 : (c.sense == Sense::kGreaterEqual ? 2 : 1);
    cols_ = n + extra;
    table_.assign(rows_, Vector(cols_ + 1, 0.0));
    basis_.assign(rows_, 0);
    unit_column_.assign(rows_, 0);
    flipped_.assign(rows_, false);
    scale_.assign(rows_, 1.0);
    artificial_.assign(cols_, false);

    std::size_t next = n;
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto& c = lp.constraints[i];
      Sense sense = c.sense;
      double scale = std::abs(c.rhs);
      for (double a : c.coefficients) scale = std::max(scale, std::abs(a));
      scale_[i] = scale > 0.0 ? 1.0 / scale : 1.0;
      const double factor = (c.rhs < 0.0 ? -1.0 : 1.0) * scale_[i];
      if (c.rhs < 0.0) {
        flipped_[i] = true;
        if (sense == Sense::kLessEqual) sense = Sense::kGreaterEqual;
        else if (sense == Sense::kGreaterEqual) sense = Sense::kLessEqual;
      }
      for (std::size_t j = 0; j < n; ++j) table_[i][j] = factor * c.coefficients[j];
      table_[i][cols_] = factor * c.rhs;
      if (sense == Sense::kLessEqual) {
        table_[i][next] = 1.0;
        unit_column_[i] = next++;
      } else {
        if (sense == Sense::kGreaterEqual) table_[i][next++] = -1.0;
        table_[i][next] = 1.0;
        artificial_[next] = true;
        unit_column_[i] = next++;
      }
      basis_[i] = unit_column_[i];
    }
    structural_ = n;
    column_scale_.assign(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      double top = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) top = std::max(top, std::abs(table_[i][j]));
      if (top > 0.0) column_scale_[j] = 1.0 / top;
      for (std::size_t i = 0; i < rows_; ++i) table_[i][j] *= column_scale_[j];
    }
    original_ = table_;
  }

  void run_phase_one() {
    Vector cost(cols_, 0.0);
    bool any = false;
    for (std::size_t j = 0; j < cols_; ++j)
      if (artificial_[j]) {
        cost[j] = -1.0;
        any = true;
      }
    if (!any) return;
    set_cost(cost);
    iterate(/*allow_artificial=*/true);
    if (objective_value() < -opt_.feasibility_tolerance)
      fail(ErrorCode::kInfeasible, "phase one ended with infeasibility " + std::to_string(-objective_value()));
    evict_artificials();
  }

  void run_phase_two(const Vector& c) {
    Vector cost(cols_, 0.0);
    for (std::size_t j = 0; j < structural_; ++j) cost[j] = c[j] * column_scale_[j];
    set_cost(cost);
    iterate(/*allow_artificial=*/false);
  }

  Vector primal() const {
    Vector x(structural_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      if (basis_[i] < structural_) x[basis_[i]] = std::max(0.0, table_[i][cols_]) * column_scale_[basis_[i]];
    return x;
  }

  /// y_i = -(reduced cost of the row's initial unit column).
  Vector duals() const {
    Vector y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double yi = -reduced_[unit_column_[i]];
      y[i] = (flipped_[i] ? -yi : yi) * scale_[i];
    }
    return y;
  }

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  void set_cost(const Vector& cost) {
    cost_ = cost;
    reduced_ = cost;
    value_ = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * table_[i][j];
      value_ += cb * table_[i][cols_];
    }
  }

  double objective_value() const { return value_; }

  /// Swaps q into the basis at row r; refuses (returns false) if the new
  /// basis is numerically singular.
  bool pivot(std::size_t r, std::size_t q) {
    const std::size_t leaving = basis_[r];
    basis_[r] = q;
    if (!refactor()) {
      basis_[r] = leaving;
      return false;
    }
    set_cost(cost_);
    return true;
  }

  /// Rebuilds the tableau as B^-1 [A | b] from the original rows, so rounding
  /// does not accumulate across pivots. Returns false for a singular basis.
  bool refactor() {
    const std::size_t width = rows_ + cols_ + 1;
    std::vector<Vector> aug(rows_, Vector(width, 0.0));
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < rows_; ++k) aug[i][k] = original_[i][basis_[k]];
      std::copy(original_[i].begin(), original_[i].end(), aug[i].begin() + static_cast<long>(rows_));
    }
    for (std::size_t k = 0; k < rows_; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < rows_; ++i)
        if (std::abs(aug[i][k]) > std::abs(aug[p][k])) p = i;
      if (std::abs(aug[p][k]) < 1e-15) return false;
      std::swap(aug[p], aug[k]);
      const double d = aug[k][k];
      for (double& x : aug[k]) x /= d;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (i == k) continue;
        const double f = aug[i][k];
        if (f == 0.0) continue;
        for (std::size_t j = k; j < width; ++j) aug[i][j] -= f * aug[k][j];
      }
    }
    for (std::size_t k = 0; k < rows_; ++k) {
      std::copy(aug[k].begin() + static_cast<long>(rows_), aug[k].end(), table_[k].begin());
      table_[k][basis_[k]] = 1.0;
      if (std::abs(table_[k][cols_]) < 1e-14) table_[k][cols_] = 0.0;
    }
    return true;
  }

  void iterate(bool allow_artificial) {
    std::vector<bool> blocked(cols_, false);
    for (;;) {
      if (++iterations_ > opt_.max_iterations)
        fail(ErrorCode::kIterationLimit, "simplex exceeded " + std::to_string(opt_.max_iterations) + " pivots");
      // Bland: lowest-index improving column.
      std::size_t q = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if ((!allow_artificial && artificial_[j]) || blocked[j]) continue;
        if (reduced_[j] > opt_.optimality_tolerance) {
          q = j;
          break;
        }
      }
      if (q == cols_) return;

      double best = kInfinity;
      for (std::size_t i = 0; i < rows_; ++i)
        if (table_[i][q] > opt_.pivot_tolerance) best = std::min(best, std::max(0.0, table_[i][cols_]) / table_[i][q]);
      // Among minimum-ratio rows take the largest pivot, then the lowest basic index.
      std::size_t r = rows_;
      for (std::size_t i = 0; i < rows_ && best < kInfinity; ++i) {
        const double a = table_[i][q];
        if (a <= opt_.pivot_tolerance || std::max(0.0, table_[i][cols_]) / a > best + 1e-12) continue;
        if (r == rows_ || a > table_[r][q] * (1.0 + 1e-9) ||
            (a >= table_[r][q] * (1.0 - 1e-9) && basis_[i] < basis_[r]))
          r = i;
      }
      if (r == rows_) fail(ErrorCode::kLpNumericallyUnstable, "objective unbounded along column " + std::to_string(q));
      if (pivot(r, q))
        std::fill(blocked.begin(), blocked.end(), false);
      else
        blocked[q] = true;
    }
  }

  void evict_artificials() {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!artificial_[basis_[i]]) continue;
      std::vector<bool> tried(cols_, false);
      for (;;) {
        std::size_t best = cols_;
        double mag = opt_.pivot_tolerance;
        for (std::size_t j = 0; j < cols_; ++j) {
          if (artificial_[j] || tried[j]) continue;
          if (std::abs(table_[i][j]) > mag) {
            mag = std::abs(table_[i][j]);
            best = j;
          }
        }
        // A row with no usable column is redundant; its artificial stays basic at 0.
        if (best == cols_ || pivot(i, best)) break;
        tried[best] = true;
      }
    }
  }

  SimplexOptions opt_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t structural_ = 0;
  std::vector<Vector> table_;  // rows_ x (cols_ + 1); last column is the rhs
  std::vector<Vector> original_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> unit_column_;
  std::vector<bool> flipped_;
  Vector scale_;
  Vector column_scale_;
  std::vector<bool> artificial_;
  Vector cost_;
  Vector reduced_;
  double value_ = 0.0;
  std::size_t iterations_ = 0;
};

}  // namespace detail

/// Certificate residuals computed from the original data, independent of the tableau.
inline void certify(const LinearProgram& lp, LpSolution& sol) {
  const std::size_t n = lp.variable_count();
  double primal_res = 0.0;
  for (double x : sol.x) primal_res = std::max(primal_res, -x);
  Vector aty(n, 0.0);
  double by = 0.0;
  double dual_res = 0.0;
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const auto& c = lp.constraints[i];
    const double lhs = dot(c.coefficients, sol.x);
    switch (c.sense) {
      case Sense::kLessEqual:
        primal_res = std::max(primal_res, lhs - c.rhs);
        dual_res = std::max(dual_res, -sol.duals[i]);
        break;
      case Sense::kGreaterEqual:
        primal_res = std::max(primal_res, c.rhs - lhs);
        dual_res = std::max(dual_res, sol.duals[i]);
        break;
      case Sense::kEqual:
        primal_res = std::max(primal_res, std::abs(lhs - c.rhs));
        break;
    }
    for (std::size_t j = 0; j < n; ++j) aty[j] += c.coefficients[j] * sol.duals[i];
    by += c.rhs * sol.duals[i];
  }
  for (std::size_t j = 0; j < n; ++j) dual_res = std::max(dual_res, lp.objective[j] - aty[j]);
  sol.primal_residual = primal_res;
  sol.dual_residual = dual_res;
  sol.dual_objective = by;
  sol.duality_gap = std::abs(sol.objective - by);
}

/// Solves the program and checks the primal/dual certificate; throws
/// INFEASIBLE, ITERATION_LIMIT or LP_NUMERICALLY_UNSTABLE.
inline LpSolution lp_solve(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  for (const auto& c : lp.constraints)
    require(c.coefficients.size() == lp.variable_count(), ErrorCode::kDimensionMismatch,
            "constraint width differs from objective");
  detail::Tableau tableau(lp, opt);
  tableau.run_phase_one();
  tableau.run_phase_two(lp.objective);

  LpSolution sol;
  sol.x = tableau.primal();
  sol.objective = dot(lp.objective, sol.x);
  sol.duals = tableau.duals();
  sol.iterations = tableau.iterations();
  certify(lp, sol);
  if (sol.primal_residual > opt.feasibility_tolerance || sol.dual_residual > opt.feasibility_tolerance ||
      sol.duality_gap > opt.duality_gap_tolerance)
    fail(ErrorCode::kLpNumericallyUnstable,
         "certificate check failed (primal " + std::to_string(sol.primal_residual) + ", dual " +
             std::to_string(sol.dual_residual) + ", gap " + std::to_string(sol.duality_gap) + ")");
  return sol;
}

}  // namespace persuasion::lp

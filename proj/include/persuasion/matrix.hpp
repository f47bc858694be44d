#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace persuasion {

using Vector = std::vector<double>;

/// Absolute tolerances shared by feasibility and set-membership tests.
struct Tolerances {
  double eps_num = 1e-9;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Dense row-major matrix. Instances are desk-scale, so nothing fancier is needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<Vector>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix out(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      assert(rows[r].size() == cols);
      std::copy(rows[r].begin(), rows[r].end(), out.row(r).begin());
    }
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<Vector> to_rows() const {
    std::vector<Vector> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double sum(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  assert(p.size() == q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

/// True when entries are >= -eps and sum to one within `sum_tol`.
inline bool is_distribution(std::span<const double> p, double sum_tol, double eps = 0.0) {
  if (p.empty()) return false;
  for (double x : p)
    if (!(x >= -eps) || !std::isfinite(x)) return false;
  return std::abs(sum(p) - 1.0) <= sum_tol;
}

inline std::size_t argmax(std::span<const double> xs) {
  return static_cast<std::size_t>(std::distance(xs.begin(), std::max_element(xs.begin(), xs.end())));
}

}  // namespace persuasion

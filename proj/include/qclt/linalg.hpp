#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qclt/error.hpp"

namespace qclt {

using Vector = std::vector<double>;

/// Dense row-major matrix. Chains handled here are desk-scale, so no
/// expression templates or blocking.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) {
        throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
      }
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix product shapes");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// (A v)(i) = sum_j A(i,j) v(j): the operator action Qf.
inline Vector matvec(const Matrix& a, std::span<const double> v) {
  if (a.cols() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix-vector shapes");
  }
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * v[j];
    out[i] = s;
  }
  return out;
}

/// (v A)(j) = sum_i v(i) A(i,j): evolution of a distribution.
inline Vector vecmat(std::span<const double> v, const Matrix& a) {
  if (a.rows() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch, "vector-matrix shapes");
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (v[i] == 0.0) continue;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += v[i] * r[j];
  }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "max_abs_diff shapes");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "max_abs_diff lengths");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

struct LinearSolution {
  Vector x;
  /// Smallest |pivot| relative to the largest |pivot| seen.
  double min_pivot_ratio = 0.0;
};

/// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
/// falls below `singular_tol` times the largest entry of A.
inline std::optional<LinearSolution> solve_linear(Matrix a, Vector b,
                                                  double singular_tol = 1e-13) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "solve_linear shapes");
  }
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  if (n == 0) return LinearSolution{{}, 1.0};
  if (scale == 0.0) return std::nullopt;

  double min_pivot = std::numeric_limits<double>::infinity();
  double max_pivot = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    const double pivot = std::abs(a(p, k));
    if (pivot <= singular_tol * scale) return std::nullopt;
    min_pivot = std::min(min_pivot, pivot);
    max_pivot = std::max(max_pivot, pivot);
    if (p != k) {
      std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(p).begin());
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / a(k, k);
      if (factor == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
      b[i] -= factor * b[k];
    }
  }
  Vector x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return LinearSolution{std::move(x), min_pivot / max_pivot};
}

/// Eigenpairs of a symmetric matrix. `vectors` holds the orthonormal
/// eigenvectors as columns; values are sorted ascending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations. Converged once the off-diagonal Frobenius norm
/// drops to `rel_tol * ||S||_F`.
inline SymmetricEigen jacobi_eigen(Matrix s, double rel_tol = 1e-13,
                                   int max_sweeps = 100) {
  const std::size_t n = s.rows();
  if (!s.square()) throw Error(ErrorKind::DimensionMismatch, "jacobi_eigen");
  Matrix v = Matrix::identity(n);
  const double target = rel_tol * frobenius_norm(s);

  auto off_norm = [&] {
    double o = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) o += s(i, j) * s(i, j);
    return std::sqrt(o);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (sweep++ >= max_sweeps) {
      throw Error(ErrorKind::JacobiNoConvergence,
                  "off-diagonal norm did not reach tolerance");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s(p, q);
        if (apq == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s(k, p);
          const double skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s(p, k);
          const double sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s(a, a) < s(b, b); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = s(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace qclt

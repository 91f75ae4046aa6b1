#pragma once

// Small dense linear algebra: just enough for GLS regressions, Newton steps
// and envelope scale matrices (dimensions here are tiny, a handful at most).

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "gbp/errors.hpp"

namespace gbp {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return d_.empty(); }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec d_;
};

inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// x' A x for square A
inline double quad_form(const Mat& a, const Vec& x) {
  return dot(x, matvec(a, x));
}

// Cholesky factor L (lower) of a symmetric positive definite matrix.
inline Mat cholesky(const Mat& a) {
  const std::size_t n = a.rows();
  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw matrix_error("cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline Vec chol_solve(const Mat& l, const Vec& b) {
  const std::size_t n = l.rows();
  Vec y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

inline double chol_log_det(const Mat& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

inline Vec solve_spd(const Mat& a, const Vec& b) { return chol_solve(cholesky(a), b); }

inline Mat inverse_spd(const Mat& a) {
  const std::size_t n = a.rows();
  Mat l = cholesky(a);
  Mat inv(n, n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col = chol_solve(l, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  // symmetrize against roundoff
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = inv(j, i) = v;
    }
  return inv;
}

// Numerical rank via Householder QR with column pivoting; columns whose
// remaining diagonal falls below tol_rel * |R_00| are treated as dependent.
inline std::size_t qr_rank(Mat a, double tol_rel = 1e-10) {
  const std::size_t mrows = a.rows(), ncols = a.cols();
  const std::size_t steps = mrows < ncols ? mrows : ncols;
  std::vector<double> colnorm(ncols);
  double r00 = 0.0;
  std::size_t rank = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    // pivot: largest remaining column norm
    std::size_t piv = k;
    double best = -1.0;
    for (std::size_t j = k; j < ncols; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < mrows; ++i) s += a(i, j) * a(i, j);
      colnorm[j] = std::sqrt(s);
      if (colnorm[j] > best) {
        best = colnorm[j];
        piv = j;
      }
    }
    if (piv != k)
      for (std::size_t i = 0; i < mrows; ++i) std::swap(a(i, k), a(i, piv));
    double alpha = colnorm[piv];
    if (k == 0) r00 = alpha;
    if (!(alpha > tol_rel * r00) || alpha == 0.0) break;
    ++rank;
    // Householder vector for column k
    double akk = a(k, k);
    double beta = akk >= 0.0 ? -alpha : alpha;
    std::vector<double> v(mrows - k);
    v[0] = akk - beta;
    for (std::size_t i = k + 1; i < mrows; ++i) v[i - k] = a(i, k);
    double vnorm2 = 0.0;
    for (double t : v) vnorm2 += t * t;
    if (vnorm2 == 0.0) continue;
    for (std::size_t j = k; j < ncols; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < mrows; ++i) s += v[i - k] * a(i, j);
      s *= 2.0 / vnorm2;
      for (std::size_t i = k; i < mrows; ++i) a(i, j) -= s * v[i - k];
    }
  }
  return rank;
}

}  // namespace gbp

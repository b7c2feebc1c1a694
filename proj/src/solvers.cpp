#include "solvers.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"

namespace hicast {

namespace {

// In-place lower Cholesky; returns false on a non-positive pivot.
bool cholesky(DenseMatrix& a) {
  const std::size_t n = a.n_rows;
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double ljj = std::sqrt(diag);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
      a(i, j) = v / ljj;
    }
  }
  return true;
}

DenseMatrix cholesky_solve(const DenseMatrix& l, const DenseMatrix& b) {
  const std::size_t n = l.n_rows;
  DenseMatrix x = b;
  // Forward then backward substitution, column by column of the RHS.
  for (std::size_t c = 0; c < b.n_cols; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, c);
      for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * x(k, c);
      x(i, c) = v / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double v = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) v -= l(k, ii) * x(k, c);
      x(ii, c) = v / l(ii, ii);
    }
  }
  return x;
}

}  // namespace

DenseMatrix solve_spd(DenseMatrix a, const DenseMatrix& b) {
  require(a.n_rows == a.n_cols, ErrorCode::invalid_argument, "solve_spd: A not square");
  require(a.n_rows == b.n_rows, ErrorCode::invalid_argument, "solve_spd: size mismatch");
  if (a.n_rows == 0) return DenseMatrix(0, b.n_cols);
  DenseMatrix attempt = a;
  if (cholesky(attempt)) return cholesky_solve(attempt, b);
  double trace = 0.0;
  for (std::size_t i = 0; i < a.n_rows; ++i) trace += a(i, i);
  const double jitter = 1e-10 * trace / static_cast<double>(a.n_rows);
  for (std::size_t i = 0; i < a.n_rows; ++i) a(i, i) += jitter;
  if (cholesky(a)) return cholesky_solve(a, b);
  fail(ErrorCode::numeric,
       "solve_spd: matrix is singular even with jitter; consider a shrunk or "
       "weighted estimator");
}

Svd svd(const DenseMatrix& a) {
  if (a.n_rows < a.n_cols) {
    Svd t = svd(transposed(a));
    return Svd{std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  const std::size_t m = a.n_rows, n = a.n_cols;
  DenseMatrix w = a;
  DenseMatrix v = DenseMatrix::identity(n);

  // One-sided Jacobi: orthogonalize column pairs until all are decoupled.
  const double eps = 1e-14;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += w(i, p) * w(i, p);
          aqq += w(i, q) * w(i, q);
          apq += w(i, p) * w(i, q);
        }
        if (std::fabs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Svd out;
  out.s.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm += w(i, j) * w(i, j);
    out.s[j] = std::sqrt(norm);
    order[j] = j;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return out.s[x] > out.s[y]; });

  Svd sorted;
  sorted.s.resize(n);
  sorted.u = DenseMatrix(m, n);
  sorted.v = DenseMatrix(n, n);
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t j = order[jj];
    sorted.s[jj] = out.s[j];
    const double inv = out.s[j] > 0.0 ? 1.0 / out.s[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) sorted.u(i, jj) = w(i, j) * inv;
    for (std::size_t i = 0; i < n; ++i) sorted.v(i, jj) = v(i, j);
  }
  return sorted;
}

namespace {

DenseMatrix lstsq_minnorm_svd(const DenseMatrix& a, const DenseMatrix& b) {
  Svd dec = svd(a);
  const double smax = dec.s.empty() ? 0.0 : dec.s[0];
  const double tol = std::max(a.n_rows, a.n_cols) * 1e-14 * smax;
  // X = V diag(1/s) U^T B with small singular values dropped.
  DenseMatrix utb = matmul(transposed(dec.u), b);
  for (std::size_t k = 0; k < dec.s.size(); ++k) {
    const double inv = dec.s[k] > tol ? 1.0 / dec.s[k] : 0.0;
    for (std::size_t c = 0; c < utb.n_cols; ++c) utb(k, c) *= inv;
  }
  return matmul(dec.v, utb);
}

}  // namespace

DenseMatrix lstsq(const DenseMatrix& a, const DenseMatrix& b, bool* rank_deficient) {
  require(a.n_rows == b.n_rows, ErrorCode::invalid_argument, "lstsq: size mismatch");
  if (rank_deficient) *rank_deficient = false;
  const std::size_t m = a.n_rows, n = a.n_cols;
  if (m < n) {
    if (rank_deficient) *rank_deficient = true;
    return lstsq_minnorm_svd(a, b);
  }

  // Householder QR applied jointly to A and the RHS.
  DenseMatrix r = a;
  DenseMatrix qtb = b;
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += r(i, k) * r(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = r(k, k) > 0 ? -norm : norm;
    std::vector<double> v(m - k);
    v[0] = r(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = r(i, k);
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 == 0.0) continue;
    auto reflect = [&](DenseMatrix& mtx, std::size_t col_begin) {
      for (std::size_t j = col_begin; j < mtx.n_cols; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < m; ++i) dot += v[i - k] * mtx(i, j);
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < m; ++i) mtx(i, j) -= f * v[i - k];
      }
    };
    reflect(r, k);
    reflect(qtb, 0);
    r(k, k) = alpha;
    for (std::size_t i = k + 1; i < m; ++i) r(i, k) = 0.0;
  }

  double rmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) rmax = std::max(rmax, std::fabs(r(k, k)));
  const double tol = std::max(m, n) * 1e-13 * rmax;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::fabs(r(k, k)) <= tol) {
      if (rank_deficient) *rank_deficient = true;
      return lstsq_minnorm_svd(a, b);
    }
  }

  DenseMatrix x(n, b.n_cols);
  for (std::size_t c = 0; c < b.n_cols; ++c) {
    for (std::size_t kk = n; kk-- > 0;) {
      double vsum = qtb(kk, c);
      for (std::size_t j = kk + 1; j < n; ++j) vsum -= r(kk, j) * x(j, c);
      x(kk, c) = vsum / r(kk, kk);
    }
  }
  return x;
}

}  // namespace hicast

#pragma once

#include <vector>

#include "linalg.hpp"

namespace hicast {

// Solves A X = B for symmetric positive definite A via Cholesky. On a failed
// factorization adds 1e-10 * trace/n to the diagonal and retries once, then
// throws Error(numeric).
DenseMatrix solve_spd(DenseMatrix a, const DenseMatrix& b);

// Thin SVD A = U diag(s) V^T (one-sided Jacobi), singular values descending.
struct Svd {
  DenseMatrix u;
  std::vector<double> s;
  DenseMatrix v;
};
Svd svd(const DenseMatrix& a);

// min ||A X - B||_F. Householder QR when A has full column rank, otherwise
// the SVD-based minimum-norm solution. rank_deficient reports which path ran.
DenseMatrix lstsq(const DenseMatrix& a, const DenseMatrix& b,
                  bool* rank_deficient = nullptr);

}  // namespace hicast

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace hicast {

// ---------------------------------------------------------------------------
// Dense row-major matrix of doubles. Holds forecast grids, gradients and the
// reconciliation G matrices; everything numeric in this library is 64-bit.
// ---------------------------------------------------------------------------
struct DenseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> values;  // row-major, length n_rows * n_cols

  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : n_rows(rows), n_cols(cols), values(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }

  static DenseMatrix identity(std::size_t n);
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transposed(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// ---------------------------------------------------------------------------
// Compressed sparse row matrix.
//
// Canonical form: row offsets non-decreasing, column indices strictly
// increasing within each row, no explicitly stored zeros. All constructors
// canonicalize, so equality of canonical instances is plain memberwise
// equality.
// ---------------------------------------------------------------------------
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Duplicates are summed, zeros dropped. Throws on out-of-bounds indices.
  static SparseMatrix from_triplets(std::span<const std::size_t> rows,
                                    std::span<const std::size_t> cols,
                                    std::span<const double> vals,
                                    std::size_t n_rows, std::size_t n_cols);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const DenseMatrix& dense);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return cols_.size(); }

  std::span<const std::size_t> row_offsets() const { return offsets_; }
  std::span<const std::uint32_t> col_indices() const { return cols_; }
  std::span<const double> values() const { return vals_; }

  bool operator==(const SparseMatrix& other) const = default;

 private:
  friend SparseMatrix transpose(const SparseMatrix&);
  friend SparseMatrix spmm(const SparseMatrix&, const SparseMatrix&);
  friend SparseMatrix scale_rows(const SparseMatrix&, std::span<const double>);
  friend SparseMatrix scale_cols(const SparseMatrix&, std::span<const double>);

  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> offsets_ = {0};
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

// Products. Shapes are checked; cost is O(nnz(sparse) * dense width).
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);
DenseMatrix spmm(const DenseMatrix& a, const SparseMatrix& b);
SparseMatrix spmm(const SparseMatrix& a, const SparseMatrix& b);

SparseMatrix transpose(const SparseMatrix& a);
std::vector<double> row_sums(const SparseMatrix& a);

// Elementwise A[i,j] * v[i] (rows) or A[i,j] * v[j] (cols). The vector feeds
// reciprocal denominators upstream, so zero entries are rejected.
SparseMatrix scale_rows(const SparseMatrix& a, std::span<const double> v);
SparseMatrix scale_cols(const SparseMatrix& a, std::span<const double> v);

DenseMatrix to_dense(const SparseMatrix& a);
double sparsity(const SparseMatrix& a);

// Text dump for debugging, 1-based coordinate format.
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

}  // namespace hicast

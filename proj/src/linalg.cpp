#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "common.hpp"

namespace hicast {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.n_cols == b.n_rows, ErrorCode::invalid_argument,
          "matmul: inner dimensions differ");
  DenseMatrix c(a.n_rows, b.n_cols);
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    for (std::size_t k = 0; k < a.n_cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.values[k * b.n_cols];
      double* crow = &c.values[i * c.n_cols];
      for (std::size_t j = 0; j < b.n_cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix transposed(const DenseMatrix& a) {
  DenseMatrix t(a.n_cols, a.n_rows);
  for (std::size_t i = 0; i < a.n_rows; ++i)
    for (std::size_t j = 0; j < a.n_cols; ++j) t(j, i) = a(i, j);
  return t;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.n_rows == b.n_rows && a.n_cols == b.n_cols,
          ErrorCode::invalid_argument, "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    m = std::max(m, std::fabs(a.values[k] - b.values[k]));
  return m;
}

SparseMatrix SparseMatrix::from_triplets(std::span<const std::size_t> rows,
                                         std::span<const std::size_t> cols,
                                         std::span<const double> vals,
                                         std::size_t n_rows, std::size_t n_cols) {
  require(rows.size() == cols.size() && cols.size() == vals.size(),
          ErrorCode::invalid_argument, "from_triplets: array lengths differ");
  const std::size_t nnz_in = rows.size();
  for (std::size_t k = 0; k < nnz_in; ++k) {
    require(rows[k] < n_rows && cols[k] < n_cols, ErrorCode::invalid_argument,
            "from_triplets: index (" + std::to_string(rows[k]) + "," +
                std::to_string(cols[k]) + ") outside " + std::to_string(n_rows) +
                "x" + std::to_string(n_cols));
  }

  // Counting sort by row, then sort each row segment by column and merge
  // duplicates. Keeps construction O(nnz log row_nnz).
  std::vector<std::size_t> count(n_rows + 1, 0);
  for (std::size_t k = 0; k < nnz_in; ++k) count[rows[k] + 1]++;
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::size_t> order(nnz_in);
  {
    std::vector<std::size_t> cursor(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < nnz_in; ++k) order[cursor[rows[k]]++] = k;
  }

  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.offsets_.assign(n_rows + 1, 0);
  m.cols_.reserve(nnz_in);
  m.vals_.reserve(nnz_in);
  std::vector<std::pair<std::uint32_t, double>> rowbuf;
  for (std::size_t r = 0; r < n_rows; ++r) {
    rowbuf.clear();
    for (std::size_t p = count[r]; p < count[r + 1]; ++p) {
      const std::size_t k = order[p];
      rowbuf.emplace_back(static_cast<std::uint32_t>(cols[k]), vals[k]);
    }
    std::sort(rowbuf.begin(), rowbuf.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t i = 0;
    while (i < rowbuf.size()) {
      std::uint32_t col = rowbuf[i].first;
      double sum = 0.0;
      while (i < rowbuf.size() && rowbuf[i].first == col) sum += rowbuf[i++].second;
      if (sum != 0.0) {
        m.cols_.push_back(col);
        m.vals_.push_back(sum);
      }
    }
    m.offsets_[r + 1] = m.cols_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.n_rows_ = m.n_cols_ = n;
  m.offsets_.resize(n + 1);
  m.cols_.resize(n);
  m.vals_.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.offsets_[i + 1] = i + 1;
    m.cols_[i] = static_cast<std::uint32_t>(i);
  }
  return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
  SparseMatrix m;
  m.n_rows_ = dense.n_rows;
  m.n_cols_ = dense.n_cols;
  m.offsets_.assign(dense.n_rows + 1, 0);
  for (std::size_t i = 0; i < dense.n_rows; ++i) {
    for (std::size_t j = 0; j < dense.n_cols; ++j) {
      const double v = dense(i, j);
      if (v != 0.0) {
        m.cols_.push_back(static_cast<std::uint32_t>(j));
        m.vals_.push_back(v);
      }
    }
    m.offsets_[i + 1] = m.cols_.size();
  }
  return m;
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
  require(a.n_cols() == b.n_rows, ErrorCode::invalid_argument,
          "spmm(sparse,dense): inner dimensions differ");
  DenseMatrix c(a.n_rows(), b.n_cols);
  const auto off = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    double* crow = &c.values[i * c.n_cols];
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) {
      const double v = vals[p];
      const double* brow = &b.values[static_cast<std::size_t>(cols[p]) * b.n_cols];
      for (std::size_t j = 0; j < b.n_cols; ++j) crow[j] += v * brow[j];
    }
  }
  return c;
}

DenseMatrix spmm(const DenseMatrix& a, const SparseMatrix& b) {
  require(a.n_cols == b.n_rows(), ErrorCode::invalid_argument,
          "spmm(dense,sparse): inner dimensions differ");
  DenseMatrix c(a.n_rows, b.n_cols());
  const auto off = b.row_offsets();
  const auto cols = b.col_indices();
  const auto vals = b.values();
  for (std::size_t i = 0; i < a.n_rows; ++i) {
    const double* arow = &a.values[i * a.n_cols];
    double* crow = &c.values[i * c.n_cols];
    for (std::size_t k = 0; k < a.n_cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      for (std::size_t p = off[k]; p < off[k + 1]; ++p) crow[cols[p]] += aik * vals[p];
    }
  }
  return c;
}

SparseMatrix spmm(const SparseMatrix& a, const SparseMatrix& b) {
  require(a.n_cols() == b.n_rows(), ErrorCode::invalid_argument,
          "spmm(sparse,sparse): inner dimensions differ");
  SparseMatrix c;
  c.n_rows_ = a.n_rows();
  c.n_cols_ = b.n_cols();
  c.offsets_.assign(a.n_rows() + 1, 0);

  // Gustavson: dense accumulator per output row, emitted in sorted column
  // order so the result is canonical.
  std::vector<double> acc(b.n_cols(), 0.0);
  std::vector<std::uint32_t> touched;
  const auto aoff = a.row_offsets();
  const auto acols = a.col_indices();
  const auto avals = a.values();
  const auto boff = b.row_offsets();
  const auto bcols = b.col_indices();
  const auto bvals = b.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    touched.clear();
    for (std::size_t p = aoff[i]; p < aoff[i + 1]; ++p) {
      const double av = avals[p];
      const std::size_t k = acols[p];
      for (std::size_t q = boff[k]; q < boff[k + 1]; ++q) {
        const std::uint32_t j = bcols[q];
        if (acc[j] == 0.0) touched.push_back(j);
        acc[j] += av * bvals[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t j : touched) {
      if (acc[j] != 0.0) {
        c.cols_.push_back(j);
        c.vals_.push_back(acc[j]);
      }
      acc[j] = 0.0;
    }
    c.offsets_[i + 1] = c.cols_.size();
  }
  return c;
}

SparseMatrix transpose(const SparseMatrix& a) {
  SparseMatrix t;
  t.n_rows_ = a.n_cols();
  t.n_cols_ = a.n_rows();
  t.offsets_.assign(a.n_cols() + 1, 0);
  t.cols_.resize(a.nnz());
  t.vals_.resize(a.nnz());
  const auto off = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t p = 0; p < a.nnz(); ++p) t.offsets_[cols[p] + 1]++;
  std::partial_sum(t.offsets_.begin(), t.offsets_.end(), t.offsets_.begin());
  std::vector<std::size_t> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) {
      const std::size_t dst = cursor[cols[p]]++;
      t.cols_[dst] = static_cast<std::uint32_t>(i);
      t.vals_[dst] = vals[p];
    }
  }
  return t;
}

std::vector<double> row_sums(const SparseMatrix& a) {
  std::vector<double> sums(a.n_rows(), 0.0);
  const auto off = a.row_offsets();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) sums[i] += vals[p];
  return sums;
}

namespace {
void check_scale_vector(std::span<const double> v, std::size_t expected,
                        const char* what) {
  require(v.size() == expected, ErrorCode::invalid_argument,
          std::string(what) + ": scale vector length mismatch");
  for (double x : v)
    require(x != 0.0, ErrorCode::invalid_argument,
            std::string(what) + ": zero scale entry");
}
}  // namespace

SparseMatrix scale_rows(const SparseMatrix& a, std::span<const double> v) {
  check_scale_vector(v, a.n_rows(), "scale_rows");
  SparseMatrix m = a;
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t p = m.offsets_[i]; p < m.offsets_[i + 1]; ++p)
      m.vals_[p] *= v[i];
  return m;
}

SparseMatrix scale_cols(const SparseMatrix& a, std::span<const double> v) {
  check_scale_vector(v, a.n_cols(), "scale_cols");
  SparseMatrix m = a;
  for (std::size_t p = 0; p < m.vals_.size(); ++p) m.vals_[p] *= v[m.cols_[p]];
  return m;
}

DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix d(a.n_rows(), a.n_cols());
  const auto off = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t p = off[i]; p < off[i + 1]; ++p) d(i, cols[p]) = vals[p];
  return d;
}

double sparsity(const SparseMatrix& a) {
  const std::size_t cells = a.n_rows() * a.n_cols();
  if (cells == 0) return 1.0;
  return 1.0 - static_cast<double>(a.nnz()) / static_cast<double>(cells);
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows() << " " << a.n_cols() << " " << a.nnz() << "\n";
  const auto off = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  out.precision(17);
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t p = off[i]; p < off[i + 1]; ++p)
      out << (i + 1) << " " << (cols[p] + 1) << " " << vals[p] << "\n";
}

}  // namespace hicast

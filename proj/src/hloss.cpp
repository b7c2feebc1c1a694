#include "hloss.hpp"

#include <cmath>
#include <vector>

#include "common.hpp"

namespace hicast {

namespace {

std::vector<double> reciprocal(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] != 0.0, ErrorCode::numeric, "zero denominator entry");
    r[i] = 1.0 / v[i];
  }
  return r;
}

void check_grid_shape(const ObjectiveContext& ctx, const DenseMatrix& m,
                      const char* what) {
  require(m.n_rows == ctx.cs.n_b && m.n_cols == ctx.te.n_b,
          ErrorCode::invalid_argument,
          std::string(what) + ": expected " + std::to_string(ctx.cs.n_b) + "x" +
              std::to_string(ctx.te.n_b) + " bottom-level grid");
}

// S_cs * E * S_te^T: aggregate a bottom-level grid across both hierarchies.
DenseMatrix aggregate_grid(const Hierarchy& cs, const Hierarchy& te,
                           const DenseMatrix& grid) {
  DenseMatrix left = spmm(cs.S, grid);            // n_cs x n_b_te
  return spmm(left, transpose(te.S));             // n_cs x n_te
}

}  // namespace

ObjectiveContext make_context(Hierarchy cs, Hierarchy te,
                              std::vector<SampleCell> index_map) {
  ObjectiveContext ctx;
  ctx.A = scale_cols(transpose(cs.S), reciprocal(cs.d));
  ctx.B = scale_rows(te.S, reciprocal(te.d));

  // The middle factor 1/(d_cs d_te^T) is rank one, so the constant
  // second-order derivative collapses to an outer product of the two
  // column-sum vectors of A and B.
  std::vector<double> a(cs.n_b, 0.0);
  {
    const auto off = cs.S.row_offsets();
    const auto cols = cs.S.col_indices();
    const auto vals = cs.S.values();
    for (std::size_t i = 0; i < cs.S.n_rows(); ++i)
      for (std::size_t p = off[i]; p < off[i + 1]; ++p)
        a[cols[p]] += vals[p] / cs.d[i];
  }
  std::vector<double> b(te.n_b, 0.0);
  {
    const auto off = te.S.row_offsets();
    const auto cols = te.S.col_indices();
    const auto vals = te.S.values();
    for (std::size_t i = 0; i < te.S.n_rows(); ++i)
      for (std::size_t p = off[i]; p < off[i + 1]; ++p)
        b[cols[p]] += vals[p] / te.d[i];
  }
  ctx.hess = DenseMatrix(cs.n_b, te.n_b);
  for (std::size_t i = 0; i < cs.n_b; ++i)
    for (std::size_t j = 0; j < te.n_b; ++j) ctx.hess(i, j) = a[i] * b[j];

  std::vector<std::uint8_t> seen(cs.n_b * te.n_b, 0);
  for (const SampleCell& cell : index_map) {
    require(cell.row < cs.n_b && cell.col < te.n_b, ErrorCode::invalid_argument,
            "make_context: sample cell outside grid");
    std::uint8_t& flag = seen[static_cast<std::size_t>(cell.row) * te.n_b + cell.col];
    require(!flag, ErrorCode::invalid_argument,
            "make_context: duplicate sample cell (" + std::to_string(cell.row) +
                "," + std::to_string(cell.col) + ")");
    flag = 1;
  }

  ctx.cs = std::move(cs);
  ctx.te = std::move(te);
  ctx.index_map = std::move(index_map);
  return ctx;
}

double hloss_value(const ObjectiveContext& ctx, const DenseMatrix& y_hat_b,
                   const DenseMatrix& y_b) {
  check_grid_shape(ctx, y_hat_b, "hloss_value");
  check_grid_shape(ctx, y_b, "hloss_value");
  DenseMatrix err = y_hat_b;
  for (std::size_t k = 0; k < err.values.size(); ++k) err.values[k] -= y_b.values[k];
  DenseMatrix residual = aggregate_grid(ctx.cs, ctx.te, err);
  double loss = 0.0;
  for (std::size_t i = 0; i < residual.n_rows; ++i) {
    const double di = ctx.cs.d[i];
    for (std::size_t j = 0; j < residual.n_cols; ++j) {
      const double r = residual(i, j);
      loss += 0.5 * r * r / (di * ctx.te.d[j]);
    }
  }
  return loss;
}

DenseMatrix hloss_gradient(const ObjectiveContext& ctx, const DenseMatrix& y_hat_b,
                           const DenseMatrix& y_b) {
  check_grid_shape(ctx, y_hat_b, "hloss_gradient");
  check_grid_shape(ctx, y_b, "hloss_gradient");
  DenseMatrix err = y_hat_b;
  for (std::size_t k = 0; k < err.values.size(); ++k) err.values[k] -= y_b.values[k];
  DenseMatrix residual = aggregate_grid(ctx.cs, ctx.te, err);
  DenseMatrix left = spmm(ctx.A, residual);  // n_b_cs x n_te
  return spmm(left, ctx.B);                  // n_b_cs x n_b_te
}

GradHess hloss_objective(const ObjectiveContext& ctx,
                         std::span<const double> predictions,
                         std::span<const double> targets) {
  require(predictions.size() == ctx.index_map.size() &&
              targets.size() == ctx.index_map.size(),
          ErrorCode::invalid_argument, "hloss_objective: sample count mismatch");
  DenseMatrix y_hat(ctx.cs.n_b, ctx.te.n_b);
  DenseMatrix y(ctx.cs.n_b, ctx.te.n_b);
  for (std::size_t s = 0; s < ctx.index_map.size(); ++s) {
    const SampleCell& cell = ctx.index_map[s];
    y_hat(cell.row, cell.col) = predictions[s];
    y(cell.row, cell.col) = targets[s];
  }
  DenseMatrix grad = hloss_gradient(ctx, y_hat, y);
  GradHess gh;
  gh.grad.resize(ctx.index_map.size());
  gh.hess.resize(ctx.index_map.size());
  for (std::size_t s = 0; s < ctx.index_map.size(); ++s) {
    const SampleCell& cell = ctx.index_map[s];
    gh.grad[s] = grad(cell.row, cell.col);
    gh.hess[s] = ctx.hess(cell.row, cell.col);
  }
  return gh;
}

double hloss_metric(const ObjectiveContext& ctx, std::span<const double> predictions,
                    std::span<const double> targets) {
  require(predictions.size() == ctx.index_map.size() &&
              targets.size() == ctx.index_map.size(),
          ErrorCode::invalid_argument, "hloss_metric: sample count mismatch");
  DenseMatrix y_hat(ctx.cs.n_b, ctx.te.n_b);
  DenseMatrix y(ctx.cs.n_b, ctx.te.n_b);
  for (std::size_t s = 0; s < ctx.index_map.size(); ++s) {
    const SampleCell& cell = ctx.index_map[s];
    y_hat(cell.row, cell.col) = predictions[s];
    y(cell.row, cell.col) = targets[s];
  }
  return hloss_value(ctx, y_hat, y);
}

GradHess squared_error_objective(std::span<const double> predictions,
                                 std::span<const double> targets) {
  require(predictions.size() == targets.size(), ErrorCode::invalid_argument,
          "squared_error_objective: length mismatch");
  GradHess gh;
  gh.grad.resize(predictions.size());
  gh.hess.assign(predictions.size(), 1.0);
  for (std::size_t i = 0; i < predictions.size(); ++i)
    gh.grad[i] = predictions[i] - targets[i];
  return gh;
}

double squared_error_metric(std::span<const double> predictions,
                            std::span<const double> targets) {
  require(predictions.size() == targets.size(), ErrorCode::invalid_argument,
          "squared_error_metric: length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    loss += 0.5 * e * e;
  }
  return loss;
}

namespace {
void check_tweedie_inputs(std::span<const double> scores,
                          std::span<const double> targets, double rho) {
  require(scores.size() == targets.size(), ErrorCode::invalid_argument,
          "tweedie: length mismatch");
  require(rho > 1.0 && rho < 2.0, ErrorCode::invalid_argument,
          "tweedie: rho must lie in (1, 2)");
  for (double y : targets)
    require(y >= 0.0, ErrorCode::invalid_argument, "tweedie: negative target");
}
}  // namespace

GradHess tweedie_objective(std::span<const double> raw_scores,
                           std::span<const double> targets, double rho) {
  check_tweedie_inputs(raw_scores, targets, rho);
  GradHess gh;
  gh.grad.resize(raw_scores.size());
  gh.hess.resize(raw_scores.size());
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    const double f = raw_scores[i];
    const double y = targets[i];
    const double e1 = std::exp((1.0 - rho) * f);
    const double e2 = std::exp((2.0 - rho) * f);
    gh.grad[i] = -y * e1 + e2;
    gh.hess[i] = -(1.0 - rho) * y * e1 + (2.0 - rho) * e2;
  }
  return gh;
}

double tweedie_metric(std::span<const double> raw_scores,
                      std::span<const double> targets, double rho) {
  check_tweedie_inputs(raw_scores, targets, rho);
  double loss = 0.0;
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    const double f = raw_scores[i];
    const double y = targets[i];
    loss += -y * std::exp((1.0 - rho) * f) / (1.0 - rho) +
            std::exp((2.0 - rho) * f) / (2.0 - rho);
  }
  return loss;
}

namespace dense_ref {

namespace {
DenseMatrix outer_denominator(const Hierarchy& cs, const Hierarchy& te) {
  DenseMatrix d(cs.n_rows(), te.n_rows());
  for (std::size_t i = 0; i < d.n_rows; ++i)
    for (std::size_t j = 0; j < d.n_cols; ++j) d(i, j) = cs.d[i] * te.d[j];
  return d;
}
}  // namespace

double value(const Hierarchy& cs, const Hierarchy& te, const DenseMatrix& y_hat_b,
             const DenseMatrix& y_b) {
  DenseMatrix s_cs = to_dense(cs.S);
  DenseMatrix s_te_t = transposed(to_dense(te.S));
  DenseMatrix y_tilde = matmul(matmul(s_cs, y_hat_b), s_te_t);
  DenseMatrix y_full = matmul(matmul(s_cs, y_b), s_te_t);
  DenseMatrix denom = outer_denominator(cs, te);
  double loss = 0.0;
  for (std::size_t k = 0; k < y_tilde.values.size(); ++k) {
    const double e = y_full.values[k] - y_tilde.values[k];
    loss += 0.5 * e * e / denom.values[k];
  }
  return loss;
}

DenseMatrix gradient(const Hierarchy& cs, const Hierarchy& te,
                     const DenseMatrix& y_hat_b, const DenseMatrix& y_b) {
  DenseMatrix s_cs = to_dense(cs.S);
  DenseMatrix s_te = to_dense(te.S);
  DenseMatrix y_tilde = matmul(matmul(s_cs, y_hat_b), transposed(s_te));
  DenseMatrix y_full = matmul(matmul(s_cs, y_b), transposed(s_te));
  DenseMatrix denom = outer_denominator(cs, te);
  DenseMatrix inner(y_tilde.n_rows, y_tilde.n_cols);
  for (std::size_t k = 0; k < inner.values.size(); ++k)
    inner.values[k] = (y_tilde.values[k] - y_full.values[k]) / denom.values[k];
  return matmul(matmul(transposed(s_cs), inner), s_te);
}

DenseMatrix second_derivative(const Hierarchy& cs, const Hierarchy& te) {
  DenseMatrix s_cs = to_dense(cs.S);
  DenseMatrix s_te = to_dense(te.S);
  DenseMatrix denom = outer_denominator(cs, te);
  DenseMatrix inner(denom.n_rows, denom.n_cols);
  for (std::size_t k = 0; k < inner.values.size(); ++k)
    inner.values[k] = 1.0 / denom.values[k];
  return matmul(matmul(transposed(s_cs), inner), s_te);
}

}  // namespace dense_ref

}  // namespace hicast

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hierarchy.hpp"
#include "linalg.hpp"

namespace hicast {

// Per-sample first and second derivatives, the booster's view of any
// objective.
struct GradHess {
  std::vector<double> grad;
  std::vector<double> hess;
};

// Maps a flat training sample onto its cell of the (bottom series x bottom
// timestep) grid.
struct SampleCell {
  std::uint32_t row = 0;  // bottom series index
  std::uint32_t col = 0;  // bottom timestep index
};

// Everything about the hierarchical loss that does not depend on forecast
// values, computed once before training:
//   A    = (S_cs)^T with columns scaled by 1/d_cs     (n_b_cs x n_cs)
//   B    = S_te with rows scaled by 1/d_te            (n_te x n_b_te)
//   hess = (S_cs)^T (1 / (d_cs d_te^T)) S_te, strictly positive everywhere.
struct ObjectiveContext {
  Hierarchy cs;
  Hierarchy te;
  SparseMatrix A;
  SparseMatrix B;
  DenseMatrix hess;
  std::vector<SampleCell> index_map;
};

// index_map must hit each grid cell at most once; cells without a sample are
// treated as zero in both forecasts and targets.
ObjectiveContext make_context(Hierarchy cs, Hierarchy te,
                              std::vector<SampleCell> index_map);

// Loss over all n_cs x n_te aggregated cells: sum of squared aggregated
// errors, halved, divided elementwise by the outer product of the
// denominator vectors.
double hloss_value(const ObjectiveContext& ctx, const DenseMatrix& y_hat_b,
                   const DenseMatrix& y_b);

// d/dY_hat of hloss_value, shape n_b_cs x n_b_te. Evaluated in the
// precomputed form A * (S_cs (Y_hat - Y) S_te^T) * B, materializing the
// aggregated residual once per call.
DenseMatrix hloss_gradient(const ObjectiveContext& ctx, const DenseMatrix& y_hat_b,
                           const DenseMatrix& y_b);

// Scatter flat samples onto the grid, differentiate, gather back.
GradHess hloss_objective(const ObjectiveContext& ctx,
                         std::span<const double> predictions,
                         std::span<const double> targets);
double hloss_metric(const ObjectiveContext& ctx, std::span<const double> predictions,
                    std::span<const double> targets);

// Baseline objectives behind the same per-sample interface.
GradHess squared_error_objective(std::span<const double> predictions,
                                 std::span<const double> targets);
double squared_error_metric(std::span<const double> predictions,
                            std::span<const double> targets);

// Tweedie deviance with log link on raw scores f: grad and hess of
//   -y e^{(1-rho) f} / (1-rho) + e^{(2-rho) f} / (2-rho),  1 < rho < 2.
GradHess tweedie_objective(std::span<const double> raw_scores,
                           std::span<const double> targets, double rho = 1.5);
double tweedie_metric(std::span<const double> raw_scores,
                      std::span<const double> targets, double rho = 1.5);

// Straight-line evaluation of the loss, gradient and second-order derivative
// on fully densified matrices with explicit elementwise division. Slow on
// purpose; this is the benchmark's dense path and the equivalence route the
// sparse kernels are checked against.
namespace dense_ref {
double value(const Hierarchy& cs, const Hierarchy& te, const DenseMatrix& y_hat_b,
             const DenseMatrix& y_b);
DenseMatrix gradient(const Hierarchy& cs, const Hierarchy& te,
                     const DenseMatrix& y_hat_b, const DenseMatrix& y_b);
DenseMatrix second_derivative(const Hierarchy& cs, const Hierarchy& te);
}  // namespace dense_ref

}  // namespace hicast

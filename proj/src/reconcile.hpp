#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierarchy.hpp"
#include "linalg.hpp"

namespace hicast {

// In-sample forecast errors, one row per hierarchy node, one column per
// training timestep.
struct ResidualPanel {
  DenseMatrix values;  // n x T_in
};

enum class ReconcileMethod {
  base,        // pass forecasts through untouched
  bottom_up,   // G = [0 I]
  ols,         // W = I
  wls_struct,  // W = diag(row sums of S)
  wls_var,     // W = diag of in-sample error variances
  mint_shrink, // W = shrunk covariance of in-sample errors
  erm,         // G learned by empirical risk minimization
};

ReconcileMethod parse_reconcile_method(const std::string& name);
std::string reconcile_method_name(ReconcileMethod m);

struct Reconciler {
  ReconcileMethod method = ReconcileMethod::base;
  SparseMatrix S;              // copy of the hierarchy's summing matrix
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  DenseMatrix G;               // n_b x n, empty for base/bottom_up
  double shrinkage = 0.0;      // lambda-hat, mint_shrink only
  bool used_pseudo_inverse = false;
  std::vector<std::string> warnings;

  std::size_t n_rows() const { return n_a + n_b; }
};

// residuals are required for wls_var and mint_shrink (T_in >= 2).
Reconciler fit_reconciler(ReconcileMethod method, const Hierarchy& h,
                          const ResidualPanel* residuals = nullptr);

// Closed form G = J - J W U (U^T W U)^{-1} U^T for an explicit weight
// matrix; ols / wls / mint all route through here.
Reconciler fit_with_weight(ReconcileMethod method, const Hierarchy& h, DenseMatrix w);

// Learns G = P minimizing ||Y_train - S P Yhat_train||_F via two
// least-squares solves (minimum-norm on rank deficiency).
Reconciler fit_erm(const Hierarchy& h, const DenseMatrix& y_train,
                   const DenseMatrix& yhat_train);

// base_forecasts has one entry per hierarchy node; the result is the full
// reconciled vector S G y-hat (or the input itself for the base method).
std::vector<double> reconcile(const Reconciler& r, std::span<const double> base_forecasts);

// S b for bottom-level forecasts; coherent by construction.
std::vector<double> bottom_up(const Hierarchy& h, std::span<const double> bottom_forecasts);

// Schafer-Strimmer shrinkage of a residual panel: intensity lambda-hat on
// standardized correlations, clamped to [0, 1]. Exposed for tests.
double shrinkage_intensity(const DenseMatrix& residuals);

std::string reconciler_to_json(const Reconciler& r);
Reconciler reconciler_from_json(const std::string& text);
void save_reconciler(const Reconciler& r, const std::string& path);
Reconciler load_reconciler(const std::string& path);

}  // namespace hicast

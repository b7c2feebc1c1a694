#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hierarchy.hpp"
#include "linalg.hpp"

namespace hicast {

struct LevelScore {
  std::string level;
  double rmse = 0.0;
  double mae = 0.0;
  double rel_rmse = std::numeric_limits<double>::quiet_NaN();
  double rel_mae = std::numeric_limits<double>::quiet_NaN();
  double rmse_std = std::numeric_limits<double>::quiet_NaN();  // across seeds
  double mae_std = std::numeric_limits<double>::quiet_NaN();
};

struct EvalReport {
  std::vector<LevelScore> rows;  // one per level, then "all_series"
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
  double reconcile_seconds = 0.0;

  const LevelScore* find(const std::string& level) const;
};

// Bottom forecasts/actuals are n_b x horizon; every level is scored on its
// S-aggregated values. rel columns are filled when a baseline is passed.
EvalReport evaluate(const DenseMatrix& bottom_forecasts,
                    const DenseMatrix& bottom_actuals, const Hierarchy& h,
                    const EvalReport* baseline = nullptr);

// Scores a full n x horizon forecast matrix per level without aggregating the
// forecast side (base forecasts of the separate/global scenarios may be
// incoherent on purpose); actuals are still aggregated from the bottom.
EvalReport evaluate_full(const DenseMatrix& full_forecasts,
                         const DenseMatrix& bottom_actuals, const Hierarchy& h,
                         const EvalReport* baseline = nullptr);

// Element-wise mean and standard deviation across seed runs.
EvalReport aggregate_reports(std::span<const EvalReport> runs);

std::string report_to_csv(const EvalReport& r);
EvalReport report_from_csv(const std::string& text);
std::string report_to_table(const EvalReport& r);

}  // namespace hicast

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "evaluate.hpp"
#include "features.hpp"
#include "gbdt.hpp"
#include "hierarchy.hpp"
#include "panel.hpp"
#include "reconcile.hpp"

namespace hicast {

// Resolved configuration of one experiment run. Everything needed to
// reproduce a run lands in run.json.
struct RunConfig {
  std::string scenario = "bottom-up";  // bottom-up | separate-aggregations | global
  std::string objective = "sl";        // sl | tl | hl
  std::string metric = "sl";           // sl | tl | hl
  std::string reconciliation = "none";
  int horizon = 28;
  int valid_days = 28;
  int test_days = 28;
  int residual_days = 56;
  double tweedie_rho = 1.5;
  bool use_cross_sectional = true;
  std::vector<std::string> temporal_frequencies;
  bool random_hierarchy = false;
  int random_max_levels = 10;
  int random_max_categories = 100;
  std::uint64_t seed = 0;
  TrainConfig train;

  // Rejects combinations outside the experiment grid: the hierarchical loss
  // trains bottom-level models only, and reconciliation applies to the
  // non-coherent scenarios only.
  void validate() const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct TrainedModel {
  std::string level_name;
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  Booster booster;
};

struct ScenarioResult {
  EvalReport report;
  std::vector<TrainedModel> models;
  DenseMatrix forecasts_full;       // n x horizon after aggregation/reconciliation
  DenseMatrix base_forecasts_full;  // pre-reconciliation
  double base_coherence_violation = 0.0;
  double shrinkage = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
  double reconcile_seconds = 0.0;
};

// End-to-end train -> forecast -> (reconcile) -> evaluate on the panel's
// rolling split: train window, then valid_days, then test_days at the end.
ScenarioResult scenario_run(const PanelDataset& p, const Hierarchy& h,
                            const RunConfig& cfg);

// Trains the scenario's model(s) without forecasting; used by the train
// command.
std::vector<TrainedModel> train_models(const PanelDataset& p, const Hierarchy& h,
                                       const RunConfig& cfg);

// One-day-ahead model applied recursively: step k sees predictions of steps
// < k as pseudo-history. Returns series x horizon in demand units.
DenseMatrix recursive_forecast(const Booster& booster, const PanelDataset& p,
                               const SeriesIdentity* identity, std::size_t start_day,
                               int horizon, const std::string& objective);

enum class NaiveKind { naive, seasonal_naive };
DenseMatrix naive_forecast(const PanelDataset& p, NaiveKind kind, int period,
                           std::size_t start_day, int horizon);

// One-step-ahead fitted values over the tail of the training window for all
// hierarchy rows; reconcilers are fit on actual - predicted.
struct InSampleWindow {
  std::size_t day_begin = 0;
  DenseMatrix actual;     // n x window
  DenseMatrix predicted;  // n x window
};
InSampleWindow insample_window(const PanelDataset& p, const Hierarchy& h,
                               const RunConfig& cfg,
                               std::span<const TrainedModel> models);

// The slice of the panel a model trains and predicts on: the original
// panel for the bottom level, an aggregate panel otherwise.
PanelDataset panel_for_model(const PanelDataset& p, const Hierarchy& h,
                             const TrainedModel& m);

// Model file: booster plus its hierarchy placement and objective.
void save_model(const TrainedModel& m, const std::string& objective,
                const std::string& path);
TrainedModel load_model(const std::string& path, std::string* objective_out);

// Non-overlapping validation windows of valid_days each, walking backwards
// from the test window; window i trains on everything before it.
struct ValidationWindow {
  std::size_t train_end = 0;
  std::size_t valid_begin = 0;
  std::size_t valid_end = 0;
};
std::vector<ValidationWindow> rolling_validation_windows(std::size_t n_days,
                                                         int test_days, int valid_days,
                                                         int n_sets);

// Uniform random search over the usual tuning ranges (regularization, leaf
// count, sampling fractions, child counts), scored by the mean best
// validation metric across rolling windows. Deterministic per cfg.seed.
TrainConfig random_search(const PanelDataset& p, const Hierarchy& h,
                          const RunConfig& base, int n_trials, int n_sets);

// Objective / metric factories shared by scenario_run and the CLI. The
// metric evaluates on demand-scale values (scores pass through the
// objective's inverse link first).
Objective make_objective(const std::string& name, const RunConfig& cfg,
                         const PanelDataset& p, const Hierarchy& h_objective,
                         const FeatureFrame& frame, std::size_t window_begin,
                         std::size_t window_days);
Metric make_metric(const std::string& name, const RunConfig& cfg,
                   const PanelDataset& p, const Hierarchy& h_metric,
                   const FeatureFrame& frame, std::size_t window_begin,
                   std::size_t window_days, const std::string& objective_name);

}  // namespace hicast

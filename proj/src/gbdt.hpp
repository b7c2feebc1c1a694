#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hloss.hpp"

namespace hicast {

// Quantile bin edges of one feature. Bin 0 is reserved for missing values
// (NaN); finite values map to bins 1..n_value_bins in value order, so a
// threshold split can isolate the missing bin at the low end.
struct FeatureBinning {
  std::vector<double> upper_bounds;  // n_value_bins - 1 strictly increasing cuts

  std::size_t n_bins() const { return upper_bounds.size() + 2; }
  std::uint8_t bin_of(double value) const;
};

struct BinnedDataset {
  std::size_t n_samples = 0;
  std::vector<std::string> feature_names;
  std::vector<FeatureBinning> binning;
  std::vector<std::vector<std::uint8_t>> bins;  // [feature][sample]
  std::vector<double> targets;
  std::vector<double> weights;  // empty means all ones
};

// Learns quantile bin edges (max_bins value bins, capped at 255) and bins the
// columns. Few distinct values bin losslessly.
BinnedDataset bin_features(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& columns,
                           std::span<const double> targets, int max_bins = 255);

// Bins new data with an existing schema (validation / prediction path).
BinnedDataset apply_binning(const std::vector<std::string>& names,
                            const std::vector<FeatureBinning>& binning,
                            const std::vector<std::vector<double>>& columns,
                            std::span<const double> targets);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  std::uint8_t split_bin = 0; // go left when bin <= split_bin
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         // leaf weight, unscaled by the learning rate
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict_row(const BinnedDataset& data, std::size_t sample) const;
};

struct TrainConfig {
  int n_estimators = 2000;
  double learning_rate = 0.05;
  int num_leaves = 31;
  int min_child_samples = 20;
  double lambda_l2 = 0.0;
  double lambda_l1 = 0.0;
  double feature_fraction = 1.0;
  double bagging_fraction = 1.0;
  int bagging_freq = 1;
  int early_stopping_rounds = 0;  // 0 disables early stopping
  std::uint64_t rng_seed = 0;
  int max_bins = 255;

  void validate() const;
};

// Per-sample objective; the gradient callback sees the full training
// prediction vector once per iteration, which is what lets the hierarchical
// loss couple samples.
struct Objective {
  enum class Link { identity, log };
  std::function<GradHess(std::span<const double> predictions)> gradients;
  Link link = Link::identity;
};

struct Metric {
  std::string name;
  std::function<double(std::span<const double> predictions)> value;
};

struct IterationRecord {
  int iteration = 0;
  double train_metric = std::numeric_limits<double>::quiet_NaN();
  double valid_metric = std::numeric_limits<double>::quiet_NaN();
};

struct Booster {
  TrainConfig config;
  double base_score = 0.0;
  int best_iteration = 0;  // number of trees used by predict
  std::vector<Tree> trees;
  std::vector<std::string> feature_names;
  std::vector<FeatureBinning> binning;
  std::vector<IterationRecord> log;  // not serialized

  std::vector<double> predict(const BinnedDataset& data) const;

  std::string to_json() const;
  static Booster from_json(const std::string& text);
  void save(const std::string& path) const;
  static Booster load(const std::string& path);
};

// Newton boosting with histogram split finding and leaf-wise growth. valid,
// train_metric and valid_metric may be null; early stopping needs both a
// validation set and a validation metric.
Booster fit(const BinnedDataset& train, const BinnedDataset* valid,
            const Objective& objective, const Metric* train_metric,
            const Metric* valid_metric, const TrainConfig& config);

}  // namespace hicast

#include "gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "common.hpp"

namespace hicast {

std::uint8_t FeatureBinning::bin_of(double value) const {
  if (std::isnan(value)) return 0;
  // Binary search over the cut points; bins are 1-based after the missing bin.
  std::size_t lo = 0, hi = upper_bounds.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (value <= upper_bounds[mid]) hi = mid;
    else lo = mid + 1;
  }
  return static_cast<std::uint8_t>(lo + 1);
}

namespace {

FeatureBinning learn_binning(const std::vector<double>& column, int max_bins) {
  std::vector<double> finite;
  finite.reserve(column.size());
  for (double v : column)
    if (!std::isnan(v)) finite.push_back(v);
  FeatureBinning fb;
  if (finite.empty()) return fb;  // single value bin, everything missing anyway
  std::sort(finite.begin(), finite.end());

  // Distinct values with multiplicities.
  std::vector<double> distinct;
  std::vector<std::size_t> counts;
  for (double v : finite) {
    if (distinct.empty() || v != distinct.back()) {
      distinct.push_back(v);
      counts.push_back(1);
    } else {
      counts.back()++;
    }
  }

  const std::size_t n_bins = std::min<std::size_t>(max_bins, 255);
  if (distinct.size() <= n_bins) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
      fb.upper_bounds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    return fb;
  }

  // Greedy quantile cuts: close a bin whenever it holds its share of samples.
  const double per_bin = static_cast<double>(finite.size()) / static_cast<double>(n_bins);
  double acc = 0.0;
  double next_cut = per_bin;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    acc += static_cast<double>(counts[i]);
    if (acc >= next_cut && fb.upper_bounds.size() + 1 < n_bins) {
      fb.upper_bounds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
      while (next_cut <= acc) next_cut += per_bin;
    }
  }
  return fb;
}

}  // namespace

BinnedDataset bin_features(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& columns,
                           std::span<const double> targets, int max_bins) {
  require(names.size() == columns.size(), ErrorCode::invalid_argument,
          "bin_features: names/columns mismatch");
  require(max_bins >= 1 && max_bins <= 255, ErrorCode::invalid_argument,
          "bin_features: max_bins must be in [1, 255]");
  BinnedDataset ds;
  ds.n_samples = targets.size();
  ds.feature_names = names;
  ds.targets.assign(targets.begin(), targets.end());
  ds.binning.reserve(columns.size());
  ds.bins.reserve(columns.size());
  for (const auto& col : columns) {
    require(col.size() == ds.n_samples, ErrorCode::invalid_argument,
            "bin_features: column length mismatch");
    FeatureBinning fb = learn_binning(col, max_bins);
    std::vector<std::uint8_t> binned(ds.n_samples);
    for (std::size_t s = 0; s < ds.n_samples; ++s) binned[s] = fb.bin_of(col[s]);
    ds.binning.push_back(std::move(fb));
    ds.bins.push_back(std::move(binned));
  }
  return ds;
}

BinnedDataset apply_binning(const std::vector<std::string>& names,
                            const std::vector<FeatureBinning>& binning,
                            const std::vector<std::vector<double>>& columns,
                            std::span<const double> targets) {
  require(names.size() == columns.size() && binning.size() == columns.size(),
          ErrorCode::invalid_argument, "apply_binning: schema size mismatch");
  BinnedDataset ds;
  ds.n_samples = columns.empty() ? targets.size() : columns[0].size();
  require(targets.empty() || targets.size() == ds.n_samples,
          ErrorCode::invalid_argument, "apply_binning: target length mismatch");
  ds.feature_names = names;
  ds.binning = binning;
  ds.targets.assign(targets.begin(), targets.end());
  for (std::size_t f = 0; f < columns.size(); ++f) {
    require(columns[f].size() == ds.n_samples, ErrorCode::invalid_argument,
            "apply_binning: column length mismatch");
    std::vector<std::uint8_t> binned(ds.n_samples);
    for (std::size_t s = 0; s < ds.n_samples; ++s)
      binned[s] = binning[f].bin_of(columns[f][s]);
    ds.bins.push_back(std::move(binned));
  }
  return ds;
}

double Tree::predict_row(const BinnedDataset& data, std::size_t sample) const {
  std::int32_t node = 0;
  while (nodes[node].feature >= 0) {
    const std::uint8_t bin = data.bins[nodes[node].feature][sample];
    node = bin <= nodes[node].split_bin ? nodes[node].left : nodes[node].right;
  }
  return nodes[node].value;
}

void TrainConfig::validate() const {
  require(n_estimators >= 1, ErrorCode::invalid_argument, "n_estimators must be >= 1");
  require(learning_rate > 0.0, ErrorCode::invalid_argument, "learning_rate must be > 0");
  require(num_leaves >= 2, ErrorCode::invalid_argument, "num_leaves must be >= 2");
  require(min_child_samples >= 1, ErrorCode::invalid_argument,
          "min_child_samples must be >= 1");
  require(lambda_l1 >= 0.0 && lambda_l2 >= 0.0, ErrorCode::invalid_argument,
          "regularization strengths must be >= 0");
  require(feature_fraction > 0.0 && feature_fraction <= 1.0,
          ErrorCode::invalid_argument, "feature_fraction must be in (0, 1]");
  require(bagging_fraction > 0.0 && bagging_fraction <= 1.0,
          ErrorCode::invalid_argument, "bagging_fraction must be in (0, 1]");
  require(bagging_freq >= 1, ErrorCode::invalid_argument, "bagging_freq must be >= 1");
  require(max_bins >= 1 && max_bins <= 255, ErrorCode::invalid_argument,
          "max_bins must be in [1, 255]");
}

namespace {

struct BinStats {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t count = 0;
};

struct SplitChoice {
  double gain = 0.0;
  std::int32_t feature = -1;
  std::uint8_t bin = 0;
  bool valid() const { return feature >= 0; }
};

// A leaf under construction: its samples, gradient totals, histogram and the
// best split found for it.
struct LeafState {
  std::vector<std::uint32_t> samples;
  double sum_grad = 0.0;
  double sum_hess = 0.0;
  std::int32_t node = -1;
  std::vector<std::vector<BinStats>> hist;  // [feature][bin]
  SplitChoice best;
};

double leaf_weight(double sum_grad, double sum_hess, const TrainConfig& cfg) {
  const double denom = sum_hess + cfg.lambda_l2;
  if (denom <= 0.0) return 0.0;
  // L1 as soft-thresholding on the numerator.
  double num = sum_grad;
  if (cfg.lambda_l1 > 0.0) {
    if (num > cfg.lambda_l1) num -= cfg.lambda_l1;
    else if (num < -cfg.lambda_l1) num += cfg.lambda_l1;
    else num = 0.0;
  }
  return -num / denom;
}

double split_score(double g, double h, double lambda_l2) {
  const double denom = h + lambda_l2;
  return denom > 0.0 ? g * g / denom : 0.0;
}

void build_histogram(LeafState& leaf, const BinnedDataset& data,
                     std::span<const std::int32_t> features,
                     std::span<const double> grad, std::span<const double> hess) {
  leaf.hist.assign(data.bins.size(), {});
  for (std::int32_t f : features) {
    auto& h = leaf.hist[f];
    h.assign(data.binning[f].n_bins(), BinStats{});
    const std::uint8_t* bins = data.bins[f].data();
    for (std::uint32_t s : leaf.samples) {
      BinStats& b = h[bins[s]];
      b.grad += grad[s];
      b.hess += hess[s];
      b.count++;
    }
  }
}

void find_best_split(LeafState& leaf, std::span<const std::int32_t> features,
                     const TrainConfig& cfg) {
  leaf.best = SplitChoice{};
  if (leaf.samples.size() < 2 * static_cast<std::size_t>(cfg.min_child_samples)) return;
  if (leaf.sum_hess <= 0.0) return;  // all-hessian-zero node is unsplittable
  const double parent_score = split_score(leaf.sum_grad, leaf.sum_hess, cfg.lambda_l2);
  for (std::int32_t f : features) {
    const auto& hist = leaf.hist[f];
    double gl = 0.0, hl = 0.0;
    std::size_t cl = 0;
    // Candidate boundaries after every bin except the last.
    for (std::size_t b = 0; b + 1 < hist.size(); ++b) {
      gl += hist[b].grad;
      hl += hist[b].hess;
      cl += hist[b].count;
      if (cl < static_cast<std::size_t>(cfg.min_child_samples)) continue;
      const std::size_t cr = leaf.samples.size() - cl;
      if (cr < static_cast<std::size_t>(cfg.min_child_samples)) break;
      const double gr = leaf.sum_grad - gl;
      const double hr = leaf.sum_hess - hl;
      const double gain = split_score(gl, hl, cfg.lambda_l2) +
                          split_score(gr, hr, cfg.lambda_l2) - parent_score;
      if (gain > leaf.best.gain + 1e-12) {
        leaf.best.gain = gain;
        leaf.best.feature = f;
        leaf.best.bin = static_cast<std::uint8_t>(b);
      }
    }
  }
}

Tree grow_tree(const BinnedDataset& data, std::span<const double> grad,
               std::span<const double> hess, std::vector<std::uint32_t> row_set,
               std::span<const std::int32_t> features, const TrainConfig& cfg) {
  Tree tree;
  std::vector<LeafState> leaves;

  LeafState root;
  root.samples = std::move(row_set);
  for (std::uint32_t s : root.samples) {
    root.sum_grad += grad[s];
    root.sum_hess += hess[s];
  }
  root.node = 0;
  tree.nodes.push_back(TreeNode{});
  build_histogram(root, data, features, grad, hess);
  find_best_split(root, features, cfg);
  leaves.push_back(std::move(root));

  while (leaves.size() < static_cast<std::size_t>(cfg.num_leaves)) {
    // Best-first: expand the leaf with the largest positive gain.
    std::size_t pick = leaves.size();
    double best_gain = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].best.valid() && leaves[i].best.gain > best_gain) {
        best_gain = leaves[i].best.gain;
        pick = i;
      }
    }
    if (pick == leaves.size()) break;

    LeafState parent = std::move(leaves[pick]);
    const SplitChoice split = parent.best;

    LeafState left, right;
    for (std::uint32_t s : parent.samples) {
      if (data.bins[split.feature][s] <= split.bin) left.samples.push_back(s);
      else right.samples.push_back(s);
    }
    for (std::uint32_t s : left.samples) {
      left.sum_grad += grad[s];
      left.sum_hess += hess[s];
    }
    right.sum_grad = parent.sum_grad - left.sum_grad;
    right.sum_hess = parent.sum_hess - left.sum_hess;

    // Histogram subtraction: build the smaller child, derive the sibling.
    LeafState* small = left.samples.size() <= right.samples.size() ? &left : &right;
    LeafState* big = small == &left ? &right : &left;
    build_histogram(*small, data, features, grad, hess);
    big->hist = std::move(parent.hist);
    for (std::int32_t f : features) {
      auto& bh = big->hist[f];
      const auto& sh = small->hist[f];
      for (std::size_t b = 0; b < bh.size(); ++b) {
        bh[b].grad -= sh[b].grad;
        bh[b].hess -= sh[b].hess;
        bh[b].count -= sh[b].count;
      }
    }

    const std::int32_t parent_node = parent.node;
    tree.nodes[parent_node].feature = split.feature;
    tree.nodes[parent_node].split_bin = split.bin;
    tree.nodes[parent_node].left = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[parent_node].right = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    left.node = tree.nodes[parent_node].left;
    right.node = tree.nodes[parent_node].right;

    find_best_split(left, features, cfg);
    find_best_split(right, features, cfg);
    leaves[pick] = std::move(left);
    leaves.push_back(std::move(right));
  }

  for (const LeafState& leaf : leaves)
    tree.nodes[leaf.node].value = leaf_weight(leaf.sum_grad, leaf.sum_hess, cfg);
  return tree;
}

// Deterministic partial Fisher-Yates draw of k indices out of n.
std::vector<std::uint32_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                      std::mt19937_64& rng) {
  std::vector<std::uint32_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

std::vector<double> Booster::predict(const BinnedDataset& data) const {
  require(data.feature_names == feature_names, ErrorCode::invalid_argument,
          "predict: feature schema does not match the trained model");
  std::vector<double> out(data.n_samples, base_score);
  for (int t = 0; t < best_iteration; ++t)
    for (std::size_t s = 0; s < data.n_samples; ++s)
      out[s] += config.learning_rate * trees[t].predict_row(data, s);
  return out;
}

Booster fit(const BinnedDataset& train, const BinnedDataset* valid,
            const Objective& objective, const Metric* train_metric,
            const Metric* valid_metric, const TrainConfig& config) {
  config.validate();
  require(train.n_samples > 0, ErrorCode::invalid_argument, "fit: empty dataset");
  if (valid)
    require(valid->feature_names == train.feature_names, ErrorCode::invalid_argument,
            "fit: validation feature schema mismatch");

  Booster booster;
  booster.config = config;
  booster.feature_names = train.feature_names;
  booster.binning = train.binning;

  double target_mean = 0.0;
  for (double y : train.targets) target_mean += y;
  target_mean /= static_cast<double>(train.n_samples);
  booster.base_score = objective.link == Objective::Link::log
                           ? std::log(std::max(target_mean, 1e-9))
                           : target_mean;

  std::vector<double> train_scores(train.n_samples, booster.base_score);
  std::vector<double> valid_scores;
  if (valid) valid_scores.assign(valid->n_samples, booster.base_score);

  std::mt19937_64 rng(config.rng_seed);
  const std::size_t n_features = train.bins.size();
  const std::size_t bag_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(config.bagging_fraction *
                                  static_cast<double>(train.n_samples)));
  const std::size_t feat_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(config.feature_fraction * static_cast<double>(n_features))));

  std::vector<std::uint32_t> bag;
  double best_valid = std::numeric_limits<double>::infinity();
  int rounds_since_best = 0;

  for (int iter = 0; iter < config.n_estimators; ++iter) {
    GradHess gh = objective.gradients(train_scores);
    require(gh.grad.size() == train.n_samples && gh.hess.size() == train.n_samples,
            ErrorCode::invalid_argument, "fit: objective returned wrong-length arrays");

    if (bag_size == train.n_samples) {
      if (bag.empty()) {
        bag.resize(train.n_samples);
        for (std::size_t i = 0; i < train.n_samples; ++i)
          bag[i] = static_cast<std::uint32_t>(i);
      }
    } else if (iter % config.bagging_freq == 0 || bag.empty()) {
      bag = sample_without_replacement(train.n_samples, bag_size, rng);
    }

    std::vector<std::int32_t> features;
    if (feat_size == n_features) {
      features.resize(n_features);
      for (std::size_t f = 0; f < n_features; ++f)
        features[f] = static_cast<std::int32_t>(f);
    } else {
      for (std::uint32_t f : sample_without_replacement(n_features, feat_size, rng))
        features.push_back(static_cast<std::int32_t>(f));
    }

    Tree tree = grow_tree(train, gh.grad, gh.hess, bag, features, config);
    for (std::size_t s = 0; s < train.n_samples; ++s)
      train_scores[s] += config.learning_rate * tree.predict_row(train, s);
    if (valid)
      for (std::size_t s = 0; s < valid->n_samples; ++s)
        valid_scores[s] += config.learning_rate * tree.predict_row(*valid, s);
    booster.trees.push_back(std::move(tree));

    IterationRecord rec;
    rec.iteration = iter + 1;
    if (train_metric) rec.train_metric = train_metric->value(train_scores);
    if (valid && valid_metric) {
      rec.valid_metric = valid_metric->value(valid_scores);
      if (rec.valid_metric < best_valid) {
        best_valid = rec.valid_metric;
        booster.best_iteration = iter + 1;
        rounds_since_best = 0;
      } else if (config.early_stopping_rounds > 0 &&
                 ++rounds_since_best >= config.early_stopping_rounds) {
        booster.log.push_back(rec);
        break;
      }
    } else {
      booster.best_iteration = iter + 1;
    }
    booster.log.push_back(rec);
  }
  if (booster.best_iteration == 0) booster.best_iteration = static_cast<int>(booster.trees.size());
  return booster;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json config_to_json(const TrainConfig& c) {
  return nlohmann::json{
      {"n_estimators", c.n_estimators},
      {"learning_rate", c.learning_rate},
      {"num_leaves", c.num_leaves},
      {"min_child_samples", c.min_child_samples},
      {"lambda_l2", c.lambda_l2},
      {"lambda_l1", c.lambda_l1},
      {"feature_fraction", c.feature_fraction},
      {"bagging_fraction", c.bagging_fraction},
      {"bagging_freq", c.bagging_freq},
      {"early_stopping_rounds", c.early_stopping_rounds},
      {"rng_seed", c.rng_seed},
      {"max_bins", c.max_bins},
  };
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.n_estimators = j.value("n_estimators", c.n_estimators);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.num_leaves = j.value("num_leaves", c.num_leaves);
  c.min_child_samples = j.value("min_child_samples", c.min_child_samples);
  c.lambda_l2 = j.value("lambda_l2", c.lambda_l2);
  c.lambda_l1 = j.value("lambda_l1", c.lambda_l1);
  c.feature_fraction = j.value("feature_fraction", c.feature_fraction);
  c.bagging_fraction = j.value("bagging_fraction", c.bagging_fraction);
  c.bagging_freq = j.value("bagging_freq", c.bagging_freq);
  c.early_stopping_rounds = j.value("early_stopping_rounds", c.early_stopping_rounds);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.max_bins = j.value("max_bins", c.max_bins);
  return c;
}

}  // namespace

std::string Booster::to_json() const {
  nlohmann::json j;
  j["format"] = "hicast-booster";
  j["version"] = 1;
  j["config"] = config_to_json(config);
  j["base_score"] = base_score;
  j["best_iteration"] = best_iteration;
  j["feature_names"] = feature_names;
  j["binning"] = nlohmann::json::array();
  for (const FeatureBinning& fb : binning) j["binning"].push_back(fb.upper_bounds);
  j["trees"] = nlohmann::json::array();
  for (const Tree& tree : trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes)
      nodes.push_back({n.feature, n.split_bin, n.left, n.right, n.value});
    j["trees"].push_back(std::move(nodes));
  }
  return j.dump();
}

Booster Booster::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::data, std::string("booster: invalid JSON: ") + e.what());
  }
  require(j.value("format", "") == "hicast-booster", ErrorCode::data,
          "booster: not a hicast booster file");
  Booster b;
  b.config = config_from_json(j.at("config"));
  b.base_score = j.at("base_score").get<double>();
  b.best_iteration = j.at("best_iteration").get<int>();
  b.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& fb : j.at("binning")) {
    FeatureBinning f;
    f.upper_bounds = fb.get<std::vector<double>>();
    b.binning.push_back(std::move(f));
  }
  for (const auto& tj : j.at("trees")) {
    Tree tree;
    for (const auto& nj : tj) {
      TreeNode n;
      n.feature = nj.at(0).get<std::int32_t>();
      n.split_bin = nj.at(1).get<std::uint8_t>();
      n.left = nj.at(2).get<std::int32_t>();
      n.right = nj.at(3).get<std::int32_t>();
      n.value = nj.at(4).get<double>();
      tree.nodes.push_back(n);
    }
    b.trees.push_back(std::move(tree));
  }
  return b;
}

void Booster::save(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << to_json() << "\n";
}

Booster Booster::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open booster file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace hicast

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "common.hpp"
#include "gbdt.hpp"
#include "hloss.hpp"

using namespace hicast;

namespace {

Objective sl_objective(std::vector<double> targets) {
  Objective obj;
  obj.gradients = [targets = std::move(targets)](std::span<const double> preds) {
    return squared_error_objective(preds, targets);
  };
  return obj;
}

Metric sl_metric(std::vector<double> targets) {
  return Metric{"sl", [targets = std::move(targets)](std::span<const double> preds) {
                  return squared_error_metric(preds, targets);
                }};
}

double rmse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("constant target trains to a constant prediction") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y(6, 4.25);
  BinnedDataset ds = bin_features({"x"}, {x}, y);
  TrainConfig cfg;
  cfg.n_estimators = 1;
  cfg.min_child_samples = 1;
  Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  for (double p : b.predict(ds)) CHECK(p == 4.25);
}

TEST_CASE("a single stump separates a perfectly splittable target") {
  std::vector<double> x{0, 1, 10, 11};
  std::vector<double> y{0, 0, 1, 1};
  BinnedDataset ds = bin_features({"x"}, {x}, y);
  TrainConfig cfg;
  cfg.n_estimators = 1;
  cfg.num_leaves = 2;
  cfg.min_child_samples = 1;
  cfg.learning_rate = 1.0;
  cfg.lambda_l2 = 0.0;
  Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  std::vector<double> preds = b.predict(ds);
  for (std::size_t i = 0; i < 4; ++i) CHECK(preds[i] == doctest::Approx(y[i]).epsilon(1e-12));
  CHECK(preds[0] == preds[1]);
  CHECK(preds[2] == preds[3]);
  CHECK(preds[0] != preds[2]);
}

TEST_CASE("hl objective with trivial hierarchies trains the same booster as sl") {
  std::mt19937_64 rng(11);
  const std::size_t n = 240;
  std::vector<double> x(n), z(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng() % 1000) / 100.0;
    z[i] = static_cast<double>(rng() % 1000) / 100.0;
    y[i] = 2.0 * x[i] - z[i] + static_cast<double>(rng() % 100) / 50.0;
  }
  BinnedDataset ds = bin_features({"x", "z"}, {x, z}, y);

  std::vector<SampleCell> cells;
  for (std::uint32_t i = 0; i < n; ++i) cells.push_back({i, 0});
  auto ctx = std::make_shared<ObjectiveContext>(
      make_context(Hierarchy::trivial(n), Hierarchy::trivial(1), cells));

  Objective hl;
  hl.gradients = [ctx, y](std::span<const double> preds) {
    return hloss_objective(*ctx, preds, y);
  };

  TrainConfig cfg;
  cfg.n_estimators = 25;
  cfg.num_leaves = 8;
  cfg.min_child_samples = 5;
  cfg.bagging_fraction = 0.8;
  cfg.rng_seed = 3;
  Booster hl_booster = fit(ds, nullptr, hl, nullptr, nullptr, cfg);
  Booster sl_booster = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  CHECK(hl_booster.to_json() == sl_booster.to_json());
}

TEST_CASE("predict") {
  std::vector<double> x{0, 1, 10, 11};
  std::vector<double> y{0, 0, 1, 1};
  BinnedDataset ds = bin_features({"x"}, {x}, y);
  SUBCASE("no trees means the base score everywhere") {
    Booster empty;
    empty.base_score = 1.5;
    empty.feature_names = ds.feature_names;
    empty.binning = ds.binning;
    for (double p : empty.predict(ds)) CHECK(p == 1.5);
  }
  SUBCASE("fitting reduces training RMSE below the constant baseline") {
    TrainConfig cfg;
    cfg.n_estimators = 10;
    cfg.min_child_samples = 1;
    Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
    std::vector<double> base(4, b.base_score);
    CHECK(rmse(b.predict(ds), y) <= rmse(base, y));
  }
  SUBCASE("schema mismatch is rejected") {
    TrainConfig cfg;
    cfg.n_estimators = 1;
    cfg.min_child_samples = 1;
    Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
    BinnedDataset other = bin_features({"renamed"}, {x}, y);
    CHECK_THROWS_AS((void)b.predict(other), Error);
  }
}

TEST_CASE("bin_features") {
  SUBCASE("few distinct values bin losslessly") {
    std::vector<double> col{3, 1, 2, 1, 3, 2};
    BinnedDataset ds = bin_features({"c"}, {col}, col);
    CHECK(ds.binning[0].upper_bounds.size() == 2);
    CHECK(ds.binning[0].bin_of(1) == 1);
    CHECK(ds.binning[0].bin_of(2) == 2);
    CHECK(ds.binning[0].bin_of(3) == 3);
  }
  SUBCASE("constant column needs one value bin") {
    std::vector<double> col(10, 7.0);
    BinnedDataset ds = bin_features({"c"}, {col}, col);
    CHECK(ds.binning[0].upper_bounds.empty());
    for (std::uint8_t b : ds.bins[0]) CHECK(b == 1);
  }
  SUBCASE("quantile cuts land near the quartiles") {
    std::vector<double> col(1001);
    for (std::size_t i = 0; i < col.size(); ++i)
      col[i] = static_cast<double>(i) / 1000.0;
    BinnedDataset ds = bin_features({"c"}, {col}, col, 4);
    REQUIRE(ds.binning[0].upper_bounds.size() == 3);
    CHECK(ds.binning[0].upper_bounds[0] == doctest::Approx(0.25).epsilon(0.05));
    CHECK(ds.binning[0].upper_bounds[1] == doctest::Approx(0.5).epsilon(0.05));
    CHECK(ds.binning[0].upper_bounds[2] == doctest::Approx(0.75).epsilon(0.05));
  }
  SUBCASE("missing values get the dedicated bin") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> col{1.0, nan, 2.0};
    std::vector<double> y{0, 0, 0};
    BinnedDataset ds = bin_features({"c"}, {col}, y);
    CHECK(ds.bins[0][1] == 0);
    CHECK(ds.bins[0][0] == 1);
  }
}

TEST_CASE("training loss is non-increasing without subsampling") {
  std::mt19937_64 rng(23);
  const std::size_t n = 400;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng() % 1000) / 100.0;
    y[i] = std::sin(x[i]) * 3.0 + static_cast<double>(rng() % 100) / 100.0;
  }
  BinnedDataset ds = bin_features({"x"}, {x}, y);
  TrainConfig cfg;
  cfg.n_estimators = 40;
  cfg.min_child_samples = 5;
  Metric metric = sl_metric(y);
  Booster b = fit(ds, nullptr, sl_objective(y), &metric, nullptr, cfg);
  for (std::size_t i = 1; i < b.log.size(); ++i)
    CHECK(b.log[i].train_metric <= b.log[i - 1].train_metric + 1e-9);
}

TEST_CASE("identical seeds produce bit-identical boosters") {
  std::mt19937_64 rng(29);
  const std::size_t n = 300;
  std::vector<double> x(n), z(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng() % 1000);
    z[i] = static_cast<double>(rng() % 1000);
    y[i] = x[i] * 0.01 + std::cos(z[i]);
  }
  BinnedDataset ds = bin_features({"x", "z"}, {x, z}, y);
  TrainConfig cfg;
  cfg.n_estimators = 15;
  cfg.bagging_fraction = 0.7;
  cfg.feature_fraction = 0.5;
  cfg.rng_seed = 1234;
  Booster a = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  CHECK(a.to_json() == b.to_json());
  cfg.rng_seed = 1235;
  Booster c = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  CHECK(a.to_json() != c.to_json());
}

TEST_CASE("a deep unregularized tree interpolates distinct samples") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y{3, -1, 4, 1, -5, 9, 2, 6};
  BinnedDataset ds = bin_features({"x"}, {x}, y);
  TrainConfig cfg;
  cfg.n_estimators = 1;
  cfg.num_leaves = 8;
  cfg.min_child_samples = 1;
  cfg.learning_rate = 1.0;
  Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  std::vector<double> preds = b.predict(ds);
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(preds[i] == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("early stopping keeps the iteration with the best validation metric") {
  std::mt19937_64 rng(31);
  const std::size_t n = 300, nv = 100;
  std::vector<double> x(n), y(n), xv(nv), yv(nv);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng() % 1000) / 100.0;
    y[i] = std::sin(x[i]) + static_cast<double>(rng() % 1000) / 500.0;
  }
  for (std::size_t i = 0; i < nv; ++i) {
    xv[i] = static_cast<double>(rng() % 1000) / 100.0;
    yv[i] = std::sin(xv[i]) + static_cast<double>(rng() % 1000) / 500.0;
  }
  BinnedDataset train = bin_features({"x"}, {x}, y);
  BinnedDataset valid = apply_binning({"x"}, train.binning, {xv}, yv);
  TrainConfig cfg;
  cfg.n_estimators = 200;
  cfg.num_leaves = 16;
  cfg.min_child_samples = 2;
  cfg.learning_rate = 0.3;
  cfg.early_stopping_rounds = 5;
  Metric metric = sl_metric(yv);
  Booster b = fit(train, &valid, sl_objective(y), nullptr, &metric, cfg);
  CHECK(b.trees.size() < 200);  // stopped early on this noisy target
  double best = std::numeric_limits<double>::infinity();
  int best_it = 0;
  for (const auto& rec : b.log) {
    if (rec.valid_metric < best) {
      best = rec.valid_metric;
      best_it = rec.iteration;
    }
  }
  CHECK(b.best_iteration == best_it);
}

TEST_CASE("train config bounds are enforced") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.num_leaves = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.bagging_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.max_bins = 300;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("booster JSON round-trips exactly") {
  std::mt19937_64 rng(37);
  const std::size_t n = 120;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng() % 997) / 31.0;
    y[i] = x[i] * 1.7 - 3.0 + static_cast<double>(rng() % 10);
  }
  BinnedDataset ds = bin_features({"x"}, {x}, y);
  TrainConfig cfg;
  cfg.n_estimators = 8;
  cfg.rng_seed = 5;
  Booster b = fit(ds, nullptr, sl_objective(y), nullptr, nullptr, cfg);
  Booster back = Booster::from_json(b.to_json());
  CHECK(back.to_json() == b.to_json());
  CHECK(back.predict(ds) == b.predict(ds));
}

// Acceptance suite: one check per release criterion, one line of output
// each, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bench.hpp"
#include "evaluate.hpp"
#include "features.hpp"
#include "gbdt.hpp"
#include "hierarchy.hpp"
#include "hloss.hpp"
#include "linalg.hpp"
#include "panel.hpp"
#include "reconcile.hpp"
#include "scenario.hpp"
#include "synth.hpp"

using namespace hicast;

namespace {

int g_failures = 0;

void report(int number, const char* name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] %2d. %-28s %s (%.1fs)\n", pass ? "PASS" : "FAIL", number, name,
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int number, const char* name, const std::function<bool(std::string&)>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(number, name, pass, detail, secs);
}

Hierarchy toy_hierarchy() {
  std::vector<std::string> keys{"a", "b"};
  LevelSpec total;
  total.name = "total";
  total.group_of = {{"a", "all"}, {"b", "all"}};
  std::vector<LevelSpec> specs{total};
  return build_cross_sectional(keys, specs);
}

std::vector<SampleCell> full_grid(std::size_t rows, std::size_t cols) {
  std::vector<SampleCell> cells;
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) cells.push_back({i, j});
  return cells;
}

DenseMatrix random_grid(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values) v = static_cast<double>(rng() % 2000) / 100.0 - 10.0;
  return m;
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / (std::max(std::fabs(a), std::fabs(b)) + 1e-8);
}

// --------------------------------------------------------------------------

bool toy_exactness(std::string& detail) {
  ObjectiveContext ctx = make_context(toy_hierarchy(), toy_hierarchy(), full_grid(2, 2));
  DenseMatrix denom(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) denom(i, j) = ctx.cs.d[i] * ctx.te.d[j];
  const double expected_denom[3][3] = {{16, 8, 8}, {8, 4, 4}, {8, 4, 4}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (denom(i, j) != expected_denom[i][j]) {
        detail = "denominator matrix mismatch";
        return false;
      }
  DenseMatrix y_hat(2, 2);
  y_hat(0, 0) = 1.0;
  DenseMatrix grad = hloss_gradient(ctx, y_hat, DenseMatrix(2, 2));
  const bool ok = grad(0, 0) == 9.0 / 16.0 && grad(0, 1) == 3.0 / 16.0 &&
                  grad(1, 0) == 3.0 / 16.0 && grad(1, 1) == 1.0 / 16.0;
  detail = ok ? "coefficients {9/16, 3/16, 3/16, 1/16} exact" : "coefficients differ";
  return ok;
}

bool gradient_correctness(std::string& detail) {
  std::mt19937_64 rng(101);
  double worst_fd = 0.0, worst_sd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nb_cs = 1 + rng() % 8, nb_te = 1 + rng() % 8;
    Hierarchy cs = sample_random_hierarchy(nb_cs, 3, 4, rng());
    Hierarchy te = sample_random_hierarchy(nb_te, 2, 3, rng());
    ObjectiveContext ctx = make_context(cs, te, full_grid(nb_cs, nb_te));
    DenseMatrix y_hat = random_grid(rng, nb_cs, nb_te);
    DenseMatrix y = random_grid(rng, nb_cs, nb_te);
    DenseMatrix grad = hloss_gradient(ctx, y_hat, y);
    const double h = 1e-5;
    const double base = hloss_value(ctx, y_hat, y);
    for (std::size_t i = 0; i < nb_cs; ++i) {
      for (std::size_t j = 0; j < nb_te; ++j) {
        DenseMatrix up = y_hat, down = y_hat;
        up(i, j) += h;
        down(i, j) -= h;
        const double up_v = hloss_value(ctx, up, y);
        const double down_v = hloss_value(ctx, down, y);
        worst_fd = std::max(worst_fd, rel_err((up_v - down_v) / (2 * h), grad(i, j)));
        // The loss is quadratic, so a half-unit second difference is exact
        // up to roundoff.
        DenseMatrix up2 = y_hat, down2 = y_hat;
        up2(i, j) += 0.5;
        down2(i, j) -= 0.5;
        const double sd = (hloss_value(ctx, up2, y) - 2 * base +
                           hloss_value(ctx, down2, y)) /
                          0.25;
        worst_sd = std::max(worst_sd, rel_err(sd, ctx.hess(i, j)));
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max fd rel err %.2e (<1e-6), max hess rel err %.2e (<1e-5)",
                worst_fd, worst_sd);
  detail = buf;
  return worst_fd < 1e-6 && worst_sd < 1e-5;
}

bool dense_sparse_equivalence(std::string& detail) {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nb_cs = 1 + rng() % 8, nb_te = 1 + rng() % 8;
    Hierarchy cs = sample_random_hierarchy(nb_cs, 3, 4, rng());
    Hierarchy te = sample_random_hierarchy(nb_te, 2, 3, rng());
    ObjectiveContext ctx = make_context(cs, te, full_grid(nb_cs, nb_te));
    DenseMatrix y_hat = random_grid(rng, nb_cs, nb_te);
    DenseMatrix y = random_grid(rng, nb_cs, nb_te);
    const double value_gap =
        std::fabs(hloss_value(ctx, y_hat, y) - dense_ref::value(cs, te, y_hat, y)) /
        (1.0 + std::fabs(dense_ref::value(cs, te, y_hat, y)));
    worst = std::max(worst, value_gap);
    worst = std::max(worst, max_abs_diff(hloss_gradient(ctx, y_hat, y),
                                         dense_ref::gradient(cs, te, y_hat, y)));
    worst = std::max(worst,
                     max_abs_diff(ctx.hess, dense_ref::second_derivative(cs, te)));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max deviation %.2e (<1e-12)", worst);
  detail = buf;
  return worst < 1e-12;
}

bool degeneracy(std::string& detail) {
  std::mt19937_64 rng(303);
  const std::size_t n = 180;
  ObjectiveContext triv =
      make_context(Hierarchy::trivial(n), Hierarchy::trivial(1), full_grid(n, 1));
  std::vector<double> preds(n), targets(n), x(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    preds[i] = static_cast<double>(rng() % 500) / 9.0;
    targets[i] = static_cast<double>(rng() % 500) / 9.0;
    x[i] = static_cast<double>(rng() % 300);
    z[i] = static_cast<double>(rng() % 300);
  }
  GradHess a = hloss_objective(triv, preds, targets);
  GradHess b = squared_error_objective(preds, targets);
  if (a.grad != b.grad || a.hess != b.hess) {
    detail = "per-sample GradHess vectors differ";
    return false;
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.02 * x[i] - 0.01 * z[i] + targets[i] * 0.1;
  BinnedDataset ds = bin_features({"x", "z"}, {x, z}, y);
  TrainConfig cfg;
  cfg.n_estimators = 20;
  cfg.num_leaves = 8;
  cfg.min_child_samples = 5;
  cfg.bagging_fraction = 0.8;
  cfg.rng_seed = 99;
  Objective hl;
  hl.gradients = [&](std::span<const double> p) { return hloss_objective(triv, p, y); };
  Objective sl;
  sl.gradients = [&](std::span<const double> p) {
    return squared_error_objective(p, y);
  };
  Booster hb = fit(ds, nullptr, hl, nullptr, nullptr, cfg);
  Booster sb = fit(ds, nullptr, sl, nullptr, nullptr, cfg);
  const bool same = hb.to_json() == sb.to_json();
  detail = same ? "identical GradHess and bit-identical boosters"
                : "boosters differ";
  return same;
}

bool coherence(std::string& detail) {
  std::mt19937_64 rng(404);
  double worst = 0.0, worst_idem = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Hierarchy h = sample_random_hierarchy(2 + rng() % 29, 3, 5, rng());
    const std::size_t n = h.n_rows();
    ResidualPanel resid;
    resid.values = random_grid(rng, n, 16);
    DenseMatrix y = spmm(h.S, random_grid(rng, h.n_b, n + 3));
    DenseMatrix yhat = random_grid(rng, n, n + 3);

    std::vector<Reconciler> fitted;
    fitted.push_back(fit_reconciler(ReconcileMethod::ols, h));
    fitted.push_back(fit_reconciler(ReconcileMethod::wls_struct, h));
    fitted.push_back(fit_reconciler(ReconcileMethod::wls_var, h, &resid));
    fitted.push_back(fit_reconciler(ReconcileMethod::mint_shrink, h, &resid));
    fitted.push_back(fit_erm(h, y, yhat));
    fitted.push_back(fit_reconciler(ReconcileMethod::bottom_up, h));

    Partition part = partition(h);
    DenseMatrix ut = to_dense(transpose(part.U));
    std::vector<double> base(n);
    for (double& v : base) v = static_cast<double>(rng() % 200) / 7.0 - 10.0;

    for (const Reconciler& r : fitted) {
      DenseMatrix g(h.n_b, n);
      if (r.method == ReconcileMethod::bottom_up) {
        for (std::size_t b = 0; b < h.n_b; ++b) g(b, h.n_a + b) = 1.0;
      } else {
        g = r.G;
      }
      DenseMatrix utsg = matmul(ut, matmul(to_dense(h.S), g));
      for (double v : utsg.values) worst = std::max(worst, std::fabs(v));

      const bool projection = r.method == ReconcileMethod::ols ||
                              r.method == ReconcileMethod::wls_struct ||
                              r.method == ReconcileMethod::wls_var ||
                              r.method == ReconcileMethod::mint_shrink;
      if (projection) {
        std::vector<double> once = reconcile(r, base);
        std::vector<double> twice = reconcile(r, once);
        for (std::size_t i = 0; i < n; ++i)
          worst_idem = std::max(worst_idem, std::fabs(once[i] - twice[i]));
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |U^T S G| %.2e, max idempotence gap %.2e (<1e-8)",
                worst, worst_idem);
  detail = buf;
  return worst < 1e-8 && worst_idem < 1e-8;
}

// Normal equations solved by Gaussian elimination; independent of the
// library's solvers.
std::vector<double> gauss_lstsq(const DenseMatrix& a, const std::vector<double>& y) {
  const std::size_t m = a.n_rows, n = a.n_cols;
  DenseMatrix ata(n, n);
  std::vector<double> aty(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += a(k, i) * a(k, j);
      ata(i, j) = s;
    }
    for (std::size_t k = 0; k < m; ++k) aty[i] += a(k, i) * y[k];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(ata(r, col)) > std::fabs(ata(pivot, col))) pivot = r;
    for (std::size_t c = 0; c < n; ++c) std::swap(ata(col, c), ata(pivot, c));
    std::swap(aty[col], aty[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = ata(r, col) / ata(col, col);
      for (std::size_t c = col; c < n; ++c) ata(r, c) -= f * ata(col, c);
      aty[r] -= f * aty[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double v = aty[r];
    for (std::size_t c = r + 1; c < n; ++c) v -= ata(r, c) * x[c];
    x[r] = v / ata(r, r);
  }
  return x;
}

bool closed_form_oracle(std::string& detail) {
  Hierarchy toy = toy_hierarchy();
  Reconciler ols = fit_reconciler(ReconcileMethod::ols, toy);
  const double expected[2][3] = {{1.0 / 3, 2.0 / 3, -1.0 / 3},
                                 {1.0 / 3, -1.0 / 3, 2.0 / 3}};
  double worst = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      worst = std::max(worst, std::fabs(ols.G(i, j) - expected[i][j]));
  if (worst > 1e-12) {
    detail = "toy OLS G deviates from the hand-derived matrix";
    return false;
  }
  Reconciler mint_identity =
      fit_with_weight(ReconcileMethod::mint_shrink, toy, DenseMatrix::identity(3));
  if (mint_identity.G.values != ols.G.values) {
    detail = "MinT with W = I deviates from OLS";
    return false;
  }

  std::mt19937_64 rng(505);
  double worst_erm = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Hierarchy h = sample_random_hierarchy(2 + rng() % 5, 2, 3, rng());
    const std::size_t n = h.n_rows();
    if (n > 12) continue;
    const std::size_t t = n + 2;
    DenseMatrix y = spmm(h.S, random_grid(rng, h.n_b, t));
    DenseMatrix yhat = random_grid(rng, n, t);
    Reconciler erm = fit_erm(h, y, yhat);

    DenseMatrix s = to_dense(h.S);
    DenseMatrix design(n * t, h.n_b * n);
    std::vector<double> rhs(n * t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t tt = 0; tt < t; ++tt) {
        const std::size_t row = i * t + tt;
        rhs[row] = y(i, tt);
        for (std::size_t b = 0; b < h.n_b; ++b)
          for (std::size_t c = 0; c < n; ++c)
            design(row, b * n + c) = s(i, b) * yhat(c, tt);
      }
    std::vector<double> p = gauss_lstsq(design, rhs);
    for (std::size_t b = 0; b < h.n_b; ++b)
      for (std::size_t c = 0; c < n; ++c)
        worst_erm = std::max(worst_erm, std::fabs(erm.G(b, c) - p[b * n + c]));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "toy OLS exact, MinT(I)=OLS, ERM vs brute force %.2e (<1e-8)",
                worst_erm);
  detail = buf;
  return worst_erm < 1e-8;
}

bool sparsity_figure(std::string& detail) {
  const std::size_t n_b = 3049, l = 12, n = 42840;
  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  std::size_t row = 0;
  for (std::size_t lv = 0; lv < l; ++lv)
    for (std::size_t b = 0; b < n_b; ++b) {
      rows.push_back(row % n);
      cols.push_back(b);
      vals.push_back(1.0);
      if (++row % n == 0) row = 0;
    }
  SparseMatrix s = SparseMatrix::from_triplets(rows, cols, vals, n, n_b);
  const double sp = sparsity(s);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "sparsity %.5f (0.9997 +/- 0.0001)", sp);
  detail = buf;
  return s.nnz() == n_b * l && std::fabs(sp - 0.9997) <= 1e-4;
}

bool scaling_shape(std::string& detail) {
  const std::vector<std::size_t> sizes{100, 300, 1000, 3000};
  GradientBenchResult r = bench_gradient(sizes, 12, 28, 5);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "sparse slope %.2f (<=2.3), dense slope %.2f (greater), speedup at "
                "n_b=3000 %.0fx (>=2)",
                r.sparse_slope, r.dense_slope, r.speedup_at_largest);
  detail = buf;
  return r.sparse_slope <= 2.3 && r.dense_slope > r.sparse_slope &&
         r.speedup_at_largest >= 2.0;
}

double mean_aggregate_rmse(const EvalReport& report) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const LevelScore& row : report.rows) {
    if (row.level == "bottom" || row.level == "all_series") continue;
    sum += row.rmse;
    ++count;
  }
  return sum / static_cast<double>(count);
}

bool desk_scale_directional(std::string& detail) {
  SynthConfig sc;
  sc.n_series = 500;
  sc.n_days = 730;
  sc.level_group_counts = {10};  // total + groups + bottom: 3 levels
  sc.zero_fraction = 0.4;
  sc.seed = 7;
  PanelDataset p = synth_panel(sc);
  Hierarchy h = hierarchy_for_panel(p, synth_hierarchy_spec(sc));

  RunConfig base;
  base.horizon = 28;
  base.test_days = 28;
  base.valid_days = 28;
  base.residual_days = 56;
  base.train.n_estimators = 100;
  base.train.learning_rate = 0.1;
  base.train.num_leaves = 31;
  base.train.min_child_samples = 20;
  base.train.early_stopping_rounds = 20;

  double hl_sum = 0.0, sl_sum = 0.0, bottom_up_seconds = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunConfig hl = base;
    hl.objective = "hl";
    hl.metric = "hl";
    hl.seed = seed;
    ScenarioResult hr = scenario_run(p, h, hl);
    hl_sum += mean_aggregate_rmse(hr.report);
    bottom_up_seconds += hr.train_seconds + hr.predict_seconds + hr.reconcile_seconds;

    RunConfig sl = base;
    sl.objective = "sl";
    sl.metric = "sl";
    sl.seed = seed;
    ScenarioResult sr = scenario_run(p, h, sl);
    sl_sum += mean_aggregate_rmse(sr.report);
  }
  const double hl_mean = hl_sum / 10.0, sl_mean = sl_sum / 10.0;
  bottom_up_seconds /= 10.0;

  RunConfig sep = base;
  sep.scenario = "separate-aggregations";
  sep.reconciliation = "mint-shrink";
  sep.seed = 0;
  ScenarioResult sep_res = scenario_run(p, h, sep);
  const double sep_seconds =
      sep_res.train_seconds + sep_res.predict_seconds + sep_res.reconcile_seconds;
  const double speedup = sep_seconds / bottom_up_seconds;

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "10-seed mean aggregate RMSE: HL/HL %.3f vs SL/SL %.3f (HL <= SL); "
                "bottom-up %.1fs vs separate+MinT %.1fs (%.1fx, >=5)",
                hl_mean, sl_mean, bottom_up_seconds, sep_seconds, speedup);
  detail = buf;
  return hl_mean <= sl_mean && speedup >= 5.0;
}

bool pipeline_integrity(std::string& detail) {
  SynthConfig sc;
  sc.n_series = 30;
  sc.n_days = 220;
  sc.level_group_counts = {5};
  sc.zero_fraction = 0.3;
  sc.seed = 13;
  PanelDataset p = synth_panel(sc);
  Hierarchy h = hierarchy_for_panel(p, synth_hierarchy_spec(sc));

  // No leakage: features over the training window ignore future targets.
  const std::size_t cutoff = 180;
  FeatureFrame before = build_features(p, 0, cutoff);
  PanelDataset tampered = p;
  for (std::size_t s = 0; s < p.n_series(); ++s)
    for (std::size_t t = cutoff; t < p.n_days; ++t)
      tampered.target[s * p.n_days + t] += 1e6;
  FeatureFrame after = build_features(tampered, 0, cutoff);
  for (std::size_t c = 0; c < before.columns.size(); ++c)
    for (std::size_t r = 0; r < before.n_rows; ++r) {
      const double a = before.columns[c][r], b = after.columns[c][r];
      if (!(a == b || (std::isnan(a) && std::isnan(b)))) {
        detail = "future-target perturbation leaked into " + before.names[c];
        return false;
      }
    }

  // Aggregate consistency: level actuals are exact member sums.
  DenseMatrix bottom(h.n_b, 5);
  for (std::size_t b = 0; b < h.n_b; ++b)
    for (std::size_t k = 0; k < 5; ++k) bottom(b, k) = p.target_at(b, k);
  DenseMatrix agg = spmm(h.S, bottom);
  const auto off = h.S.row_offsets();
  const auto cols = h.S.col_indices();
  for (std::size_t r = 0; r < h.n_rows(); ++r)
    for (std::size_t k = 0; k < 5; ++k) {
      double sum = 0.0;
      for (std::size_t q = off[r]; q < off[r + 1]; ++q) sum += bottom(cols[q], k);
      if (agg(r, k) != sum) {
        detail = "aggregated actuals are not exact member sums";
        return false;
      }
    }

  // Deterministic reruns: bit-identical models and forecasts per seed.
  RunConfig cfg;
  cfg.horizon = 7;
  cfg.test_days = 7;
  cfg.valid_days = 14;
  cfg.train.n_estimators = 10;
  cfg.train.num_leaves = 8;
  cfg.train.min_child_samples = 5;
  cfg.train.bagging_fraction = 0.8;
  cfg.objective = "hl";
  cfg.metric = "hl";
  cfg.seed = 17;
  ScenarioResult a = scenario_run(p, h, cfg);
  ScenarioResult b = scenario_run(p, h, cfg);
  if (a.models[0].booster.to_json() != b.models[0].booster.to_json() ||
      a.forecasts_full.values != b.forecasts_full.values) {
    detail = "rerun with the same seed diverged";
    return false;
  }
  detail = "no leakage, exact aggregation, bit-identical reruns";
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  run(1, "toy-example exactness", toy_exactness);
  run(2, "gradient correctness", gradient_correctness);
  run(3, "dense/sparse equivalence", dense_sparse_equivalence);
  run(4, "degeneracy to squared error", degeneracy);
  run(5, "reconciliation coherence", coherence);
  run(6, "closed-form oracles", closed_form_oracle);
  run(7, "sparsity figure", sparsity_figure);
  run(8, "scaling shape", scaling_shape);
  run(9, "desk-scale directional result", desk_scale_directional);
  run(10, "pipeline integrity", pipeline_integrity);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}

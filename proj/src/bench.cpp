#include "bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "common.hpp"
#include "hloss.hpp"
#include "reconcile.hpp"
#include "scenario.hpp"
#include "synth.hpp"

namespace hicast {

namespace {

using Clock = std::chrono::steady_clock;

// Balanced deterministic hierarchy: `levels`-1 aggregate levels with group
// counts spread geometrically between 2 and 100, mirroring how retail
// hierarchies widen toward the bottom.
Hierarchy bench_hierarchy(std::size_t n_b, int levels) {
  const int n_agg_levels = levels - 1;
  std::vector<std::string> keys(n_b);
  for (std::size_t s = 0; s < n_b; ++s) keys[s] = "s" + std::to_string(s);
  std::vector<LevelSpec> specs;
  for (int lv = 0; lv < n_agg_levels; ++lv) {
    const double frac = n_agg_levels > 1
                            ? static_cast<double>(lv) / (n_agg_levels - 1)
                            : 0.0;
    std::size_t groups = static_cast<std::size_t>(
        std::llround(2.0 * std::pow(50.0, frac)));
    groups = std::min(groups, n_b);
    LevelSpec spec;
    spec.name = "level" + std::to_string(lv);
    for (std::size_t s = 0; s < n_b; ++s)
      spec.group_of[keys[s]] = "g" + std::to_string(s * groups / n_b);
    specs.push_back(std::move(spec));
  }
  return build_cross_sectional(keys, specs);
}

// Seconds per evaluation: batches of calls until the batch clears 30 ms,
// then the median batch average over `repetitions`.
template <typename F>
double time_median(F&& fn, int repetitions) {
  fn();  // warmup
  std::vector<double> samples;
  for (int rep = 0; rep < repetitions; ++rep) {
    std::size_t iters = 0;
    auto t0 = Clock::now();
    double elapsed = 0.0;
    do {
      fn();
      ++iters;
      elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    } while (elapsed < 0.03);
    samples.push_back(elapsed / static_cast<double>(iters));
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace

GradientBenchResult bench_gradient(std::span<const std::size_t> sizes, int levels,
                                   int timesteps, int repetitions) {
  require(levels >= 2 && timesteps >= 1 && repetitions >= 1,
          ErrorCode::invalid_argument, "bench_gradient: bad arguments");
  GradientBenchResult result;
  std::vector<double> xs, sparse_times, dense_times;
  std::mt19937_64 rng(1);
  for (std::size_t n_b : sizes) {
    Hierarchy cs = bench_hierarchy(n_b, levels);
    Hierarchy te = Hierarchy::trivial(static_cast<std::size_t>(timesteps));
    std::vector<SampleCell> cells;
    cells.reserve(n_b * timesteps);
    for (std::uint32_t i = 0; i < n_b; ++i)
      for (std::uint32_t j = 0; j < static_cast<std::uint32_t>(timesteps); ++j)
        cells.push_back({i, j});
    ObjectiveContext ctx = make_context(cs, te, std::move(cells));
    DenseMatrix y_hat(n_b, timesteps), y(n_b, timesteps);
    for (double& v : y_hat.values) v = static_cast<double>(rng() % 1000) / 100.0;
    for (double& v : y.values) v = static_cast<double>(rng() % 1000) / 100.0;

    volatile double sink = 0.0;
    const double t_sparse = time_median(
        [&] { sink = sink + hloss_gradient(ctx, y_hat, y).values[0]; }, repetitions);
    const double t_dense = time_median(
        [&] { sink = sink + dense_ref::gradient(ctx.cs, ctx.te, y_hat, y).values[0]; },
        repetitions);

    result.rows.push_back({"sparse", n_b, ctx.cs.n_rows(),
                           static_cast<std::size_t>(timesteps), t_sparse});
    result.rows.push_back({"dense", n_b, ctx.cs.n_rows(),
                           static_cast<std::size_t>(timesteps), t_dense});
    xs.push_back(static_cast<double>(n_b));
    sparse_times.push_back(t_sparse);
    dense_times.push_back(t_dense);
  }
  result.sparse_slope = loglog_slope(xs, sparse_times);
  result.dense_slope = loglog_slope(xs, dense_times);
  result.speedup_at_largest = dense_times.back() / sparse_times.back();
  return result;
}

std::vector<ScenarioBenchRow> bench_scenarios(std::size_t n_series, int n_days,
                                              int n_estimators, std::uint64_t seed) {
  SynthConfig sc;
  sc.n_series = n_series;
  sc.n_days = n_days;
  sc.level_group_counts = {8};
  sc.zero_fraction = 0.4;
  sc.seed = seed;
  PanelDataset p = synth_panel(sc);
  Hierarchy h = hierarchy_for_panel(p, synth_hierarchy_spec(sc));

  RunConfig base;
  base.horizon = 7;
  base.test_days = 7;
  base.valid_days = 14;
  base.residual_days = 28;
  base.seed = seed;
  base.train.n_estimators = n_estimators;
  base.train.num_leaves = 16;
  base.train.learning_rate = 0.1;
  base.train.min_child_samples = 10;

  struct Combo {
    const char* scenario;
    const char* objective;
    const char* reconciliation;
  };
  const Combo combos[] = {
      {"bottom-up", "sl", "none"},
      {"bottom-up", "hl", "none"},
      {"separate-aggregations", "sl", "mint-shrink"},
      {"global", "sl", "mint-shrink"},
  };
  std::vector<ScenarioBenchRow> rows;
  for (const Combo& combo : combos) {
    RunConfig cfg = base;
    cfg.scenario = combo.scenario;
    cfg.objective = combo.objective;
    cfg.metric = combo.objective;
    cfg.reconciliation = combo.reconciliation;
    ScenarioResult res = scenario_run(p, h, cfg);
    rows.push_back({combo.scenario, combo.objective, combo.reconciliation,
                    res.train_seconds, res.predict_seconds, res.reconcile_seconds});
  }
  return rows;
}

std::vector<ReconcileBenchRow> bench_reconcile(std::size_t n_b, std::uint64_t seed) {
  Hierarchy h = bench_hierarchy(n_b, 4);
  std::mt19937_64 rng(seed);
  ResidualPanel resid;
  resid.values = DenseMatrix(h.n_rows(), 60);
  for (double& v : resid.values.values)
    v = static_cast<double>(rng() % 2000) / 100.0 - 10.0;
  DenseMatrix y(h.n_rows(), 60), yhat(h.n_rows(), 60);
  for (double& v : y.values) v = static_cast<double>(rng() % 1000) / 10.0;
  for (double& v : yhat.values) v = static_cast<double>(rng() % 1000) / 10.0;
  std::vector<double> base(h.n_rows());
  for (double& v : base) v = static_cast<double>(rng() % 1000) / 10.0;

  std::vector<ReconcileBenchRow> rows;
  const ReconcileMethod methods[] = {
      ReconcileMethod::bottom_up,   ReconcileMethod::ols,
      ReconcileMethod::wls_struct,  ReconcileMethod::wls_var,
      ReconcileMethod::mint_shrink, ReconcileMethod::erm,
  };
  for (ReconcileMethod m : methods) {
    Reconciler fitted;
    const double fit_s = time_median(
        [&] {
          fitted = m == ReconcileMethod::erm ? fit_erm(h, y, yhat)
                                             : fit_reconciler(m, h, &resid);
        },
        3);
    volatile double sink = 0.0;
    const double apply_s =
        time_median([&] { sink = sink + reconcile(fitted, base)[0]; }, 3);
    rows.push_back({reconcile_method_name(m), h.n_rows(), fit_s, apply_s});
  }
  return rows;
}

std::string gradient_csv(const GradientBenchResult& r) {
  std::ostringstream out;
  out << "path,n_b,n_rows,timesteps,median_seconds\n";
  for (const GradientBenchRow& row : r.rows)
    out << row.path << "," << row.n_b << "," << row.n_rows << "," << row.timesteps
        << "," << row.median_seconds << "\n";
  return out.str();
}

std::string gradient_slopes_csv(const GradientBenchResult& r) {
  std::ostringstream out;
  out << "path,loglog_slope,speedup_at_largest\n";
  out << "sparse," << r.sparse_slope << "," << r.speedup_at_largest << "\n";
  out << "dense," << r.dense_slope << "," << 1.0 << "\n";
  return out.str();
}

std::string gradient_svg(const GradientBenchResult& r) {
  // Log-log scatter of gradient wall time vs bottom-level series count.
  const double width = 640, height = 480, margin = 60;
  double min_x = 1e300, max_x = 0, min_y = 1e300, max_y = 0;
  for (const GradientBenchRow& row : r.rows) {
    min_x = std::min(min_x, static_cast<double>(row.n_b));
    max_x = std::max(max_x, static_cast<double>(row.n_b));
    min_y = std::min(min_y, row.median_seconds);
    max_y = std::max(max_y, row.median_seconds);
  }
  if (max_x <= min_x) max_x = min_x * 2;
  if (max_y <= min_y) max_y = min_y * 2;
  auto sx = [&](double v) {
    return margin + (std::log(v) - std::log(min_x)) /
                        (std::log(max_x) - std::log(min_x)) * (width - 2 * margin);
  };
  auto sy = [&](double v) {
    return height - margin -
           (std::log(v) - std::log(min_y)) / (std::log(max_y) - std::log(min_y)) *
               (height - 2 * margin);
  };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
         "hierarchical loss gradient wall time (log-log)</text>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">bottom-level series</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728"};
  const char* paths[] = {"sparse", "dense"};
  for (int pi = 0; pi < 2; ++pi) {
    std::ostringstream pts;
    for (const GradientBenchRow& row : r.rows) {
      if (row.path != paths[pi]) continue;
      pts << sx(static_cast<double>(row.n_b)) << "," << sy(row.median_seconds) << " ";
      out << "<circle cx=\"" << sx(static_cast<double>(row.n_b)) << "\" cy=\""
          << sy(row.median_seconds) << "\" r=\"4\" fill=\"" << colors[pi] << "\"/>\n";
    }
    out << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\""
        << colors[pi] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 20 * pi
        << "\" font-size=\"12\" fill=\"" << colors[pi] << "\">" << paths[pi]
        << " (slope " << (pi == 0 ? r.sparse_slope : r.dense_slope) << ")</text>\n";
  }
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  for (const GradientBenchRow& row : r.rows) {
    if (row.path != "sparse") continue;
    out << "<text x=\"" << sx(static_cast<double>(row.n_b)) << "\" y=\""
        << height - margin + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << row.n_b << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

GradientBenchResult run_bench(const BenchOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  GradientBenchResult grad =
      bench_gradient(opts.sizes, opts.levels, opts.timesteps, opts.repetitions);
  write_text(opts.out_dir + "/bench_gradient.csv", gradient_csv(grad));
  write_text(opts.out_dir + "/bench_gradient_slopes.csv", gradient_slopes_csv(grad));
  if (opts.plots)
    write_text(opts.out_dir + "/gradient_scaling.svg", gradient_svg(grad));

  if (opts.run_scenarios) {
    std::vector<ScenarioBenchRow> rows = bench_scenarios(60, 280, 20, opts.seed);
    std::ostringstream out;
    out << "scenario,objective,reconciliation,train_seconds,predict_seconds,"
           "reconcile_seconds\n";
    for (const ScenarioBenchRow& r : rows)
      out << r.scenario << "," << r.objective << "," << r.reconciliation << ","
          << r.train_seconds << "," << r.predict_seconds << ","
          << r.reconcile_seconds << "\n";
    write_text(opts.out_dir + "/bench_scenarios.csv", out.str());
  }
  if (opts.run_reconcile) {
    std::vector<ReconcileBenchRow> rows = bench_reconcile(200, opts.seed);
    std::ostringstream out;
    out << "method,n,fit_seconds,apply_seconds\n";
    for (const ReconcileBenchRow& r : rows)
      out << r.method << "," << r.n << "," << r.fit_seconds << ","
          << r.apply_seconds << "\n";
    write_text(opts.out_dir + "/bench_reconcile.csv", out.str());
  }
  return grad;
}

}  // namespace hicast

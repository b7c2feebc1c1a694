#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hicast {

struct GradientBenchRow {
  std::string path;  // "sparse" | "dense"
  std::size_t n_b = 0;
  std::size_t n_rows = 0;
  std::size_t timesteps = 0;
  double median_seconds = 0.0;
};

struct GradientBenchResult {
  std::vector<GradientBenchRow> rows;
  double sparse_slope = 0.0;  // log-log slope of time vs n_b
  double dense_slope = 0.0;
  double speedup_at_largest = 0.0;  // dense / sparse at the largest size
};

// Times one hierarchical-loss gradient evaluation through the sparse path
// and through the dense reference, on 12-level hierarchies of increasing
// width. Medians of `repetitions` batches, each batch long enough to beat
// timer noise.
GradientBenchResult bench_gradient(std::span<const std::size_t> sizes, int levels,
                                   int timesteps, int repetitions);

struct ScenarioBenchRow {
  std::string scenario;
  std::string objective;
  std::string reconciliation;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
  double reconcile_seconds = 0.0;
};
std::vector<ScenarioBenchRow> bench_scenarios(std::size_t n_series, int n_days,
                                              int n_estimators, std::uint64_t seed);

struct ReconcileBenchRow {
  std::string method;
  std::size_t n = 0;
  double fit_seconds = 0.0;
  double apply_seconds = 0.0;
};
std::vector<ReconcileBenchRow> bench_reconcile(std::size_t n_b, std::uint64_t seed);

struct BenchOptions {
  std::vector<std::size_t> sizes = {100, 300, 1000, 3000};
  int levels = 12;
  int timesteps = 28;
  int repetitions = 5;
  bool run_scenarios = true;
  bool run_reconcile = true;
  bool plots = true;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

// Runs the enabled benchmark groups and writes bench_gradient.csv,
// bench_gradient_slopes.csv, bench_scenarios.csv, bench_reconcile.csv and
// gradient_scaling.svg into out_dir.
GradientBenchResult run_bench(const BenchOptions& opts);

std::string gradient_csv(const GradientBenchResult& r);
std::string gradient_slopes_csv(const GradientBenchResult& r);
std::string gradient_svg(const GradientBenchResult& r);

}  // namespace hicast

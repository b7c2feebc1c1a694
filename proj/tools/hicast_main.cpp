// hicast command line: synthetic data, hierarchy building, training,
// forecasting, reconciliation, evaluation and the scaling benchmark, all on
// top of the C API of the shared library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hicast.h"

namespace {

using nlohmann::json;

int exit_code_of(int status) {
  switch (status) {
    case HICAST_OK: return 0;
    case HICAST_EINVAL: return 2;
    case HICAST_EDATA: return 3;
    case HICAST_EIO: return 3;
    case HICAST_ENUMERIC: return 4;
    default: return 1;
  }
}

int fail_with(int status) {
  std::cerr << "error: " << hicast_last_error() << "\n";
  return exit_code_of(status);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in.good()) {
    std::cerr << "error: cannot open config file '" << path << "'\n";
    std::exit(2);
  }
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config file: " << e.what() << "\n";
    std::exit(2);
  }
}

// Flags override the config file; only unset options fall back to it.
template <typename T>
void merge_option(const CLI::Option* opt, const json& cfg, const char* key, T& value,
                  json& resolved) {
  if (opt == nullptr || opt->count() == 0) {
    if (cfg.contains(key)) value = cfg[key].get<T>();
  }
  resolved[key] = value;
}

void write_run_json(const std::string& out_dir, const std::string& command,
                    const json& resolved) {
  std::filesystem::create_directories(out_dir);
  json run;
  run["command"] = command;
  run["version"] = hicast_version();
  run["options"] = resolved;
  std::ofstream out(out_dir + "/run.json");
  out << run.dump(2) << "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

struct PanelGuard {
  hicast_panel* p = nullptr;
  ~PanelGuard() { hicast_panel_free(p); }
};
struct HierarchyGuard {
  hicast_hierarchy* h = nullptr;
  ~HierarchyGuard() { hicast_hierarchy_free(h); }
};
struct ReconcilerGuard {
  hicast_reconciler* r = nullptr;
  ~ReconcilerGuard() { hicast_reconciler_free(r); }
};

// --data accepts a long-format CSV, or a directory holding the M5
// competition files (sales_train_validation.csv, calendar.csv,
// sell_prices.csv).
int load_panel(const std::string& data, const std::string& meta, PanelGuard& panel) {
  if (std::filesystem::is_directory(data)) {
    const std::string sales = data + "/sales_train_validation.csv";
    const std::string calendar = data + "/calendar.csv";
    const std::string prices = data + "/sell_prices.csv";
    return hicast_panel_load_m5(sales.c_str(), calendar.c_str(), prices.c_str(),
                                &panel.p);
  }
  return hicast_panel_load_csv(data.c_str(), meta.empty() ? nullptr : meta.c_str(),
                               &panel.p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical forecasting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path;
  std::string out_dir = ".";
  unsigned long long seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "JSON config file; flags override it");
  auto* opt_out = app.add_option("--out-dir", out_dir, "output directory");
  auto* opt_seed = app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads,
                 "worker thread cap (0 = library default; computation is "
                 "currently single-threaded)");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic demand panel");
  std::size_t synth_series = 500;
  int synth_days = 730;
  std::string synth_levels = "10";
  double zero_fraction = 0.4;
  std::string synth_start = "2016-01-04";
  auto* o_series = synth->add_option("--series", synth_series, "bottom-level series");
  auto* o_days = synth->add_option("--days", synth_days, "panel length in days");
  auto* o_levels = synth->add_option(
      "--levels", synth_levels, "comma list of group counts for the mid levels");
  auto* o_zero = synth->add_option("--zero-fraction", zero_fraction,
                                   "target fraction of zero-demand samples");
  auto* o_start = synth->add_option("--start", synth_start, "first date (YYYY-MM-DD)");

  // ---- build-hierarchy ----
  auto* buildh = app.add_subcommand("build-hierarchy",
                                    "materialize a hierarchy from a panel");
  std::string bh_data, bh_meta, bh_spec, bh_temporal;
  bool bh_random = false;
  int bh_max_levels = 10, bh_max_categories = 100;
  buildh->add_option("--data", bh_data, "panel CSV")->required();
  buildh->add_option("--meta", bh_meta, "metadata CSV");
  buildh->add_option("--spec", bh_spec, "declarative hierarchy spec JSON");
  buildh->add_flag("--random", bh_random, "sample a random hierarchy instead");
  buildh->add_option("--max-levels", bh_max_levels, "random: max level count");
  buildh->add_option("--max-categories", bh_max_categories,
                     "random: max categories per level");
  buildh->add_option("--temporal", bh_temporal,
                     "temporal frequencies (week,month,year,all) instead");

  // ---- train ----
  auto* train = app.add_subcommand("train", "train the scenario's model(s)");
  std::string tr_data, tr_meta, tr_hierarchy;
  std::string scenario = "bottom-up", objective = "sl", metric = "sl";
  std::string temporal;
  bool random_hierarchy = false, no_cross_sectional = false;
  int valid_days = 28, test_days = 28, residual_days = 56;
  int n_estimators = 2000, num_leaves = 31, min_child_samples = 20, bagging_freq = 1;
  int early_stopping = 100, max_bins = 255, random_search_trials = 0, search_sets = 3;
  double learning_rate = 0.05, lambda_l1 = 0.0, lambda_l2 = 0.0;
  double feature_fraction = 1.0, bagging_fraction = 1.0, tweedie_rho = 1.5;
  train->add_option("--data", tr_data, "panel CSV")->required();
  train->add_option("--meta", tr_meta, "metadata CSV");
  train->add_option("--hierarchy", tr_hierarchy, "hierarchy JSON (spec or materialized)")
      ->required();
  auto* o_scenario = train->add_option(
      "--scenario", scenario, "bottom-up | separate-aggregations | global");
  auto* o_objective = train->add_option("--objective", objective, "sl | tl | hl");
  auto* o_metric = train->add_option("--metric", metric, "sl | tl | hl");
  auto* o_temporal = train->add_option("--temporal", temporal,
                                       "temporal frequencies for the hl objective");
  auto* o_random = train->add_flag("--random-hierarchy", random_hierarchy,
                                   "train against a randomly sampled hierarchy");
  auto* o_nocs = train->add_flag("--no-cross-sectional", no_cross_sectional,
                                 "drop the cross-sectional hierarchy from the loss");
  auto* o_valid = train->add_option("--valid-days", valid_days, "validation window");
  auto* o_test = train->add_option("--test-days", test_days, "held-out test window");
  auto* o_resid = train->add_option("--residual-days", residual_days,
                                    "in-sample window for reconciler fitting");
  auto* o_nest = train->add_option("--n-estimators", n_estimators, "max trees");
  auto* o_lr = train->add_option("--learning-rate", learning_rate, "shrinkage");
  auto* o_leaves = train->add_option("--num-leaves", num_leaves, "leaves per tree");
  auto* o_mcs = train->add_option("--min-child-samples", min_child_samples,
                                  "min samples per leaf");
  auto* o_l1 = train->add_option("--lambda-l1", lambda_l1, "L1 regularization");
  auto* o_l2 = train->add_option("--lambda-l2", lambda_l2, "L2 regularization");
  auto* o_ff = train->add_option("--feature-fraction", feature_fraction,
                                 "feature subsample per tree");
  auto* o_bf = train->add_option("--bagging-fraction", bagging_fraction,
                                 "row subsample fraction");
  auto* o_bfreq = train->add_option("--bagging-freq", bagging_freq,
                                    "iterations between bag refreshes");
  auto* o_early = train->add_option("--early-stopping", early_stopping,
                                    "early stopping rounds (0 = off)");
  auto* o_bins = train->add_option("--max-bins", max_bins, "histogram bins");
  auto* o_rho = train->add_option("--tweedie-rho", tweedie_rho, "tweedie power");
  train->add_option("--random-search", random_search_trials,
                    "uniform random search trials before the final fit");
  train->add_option("--search-sets", search_sets,
                    "rolling validation sets for the random search");
  std::string seed_list;
  train->add_option("--seeds", seed_list,
                    "comma list of seeds; trains one model set per seed into "
                    "out-dir/seed<k>/");

  // ---- forecast ----
  auto* forecast = app.add_subcommand("forecast", "recursive multi-step forecasts");
  std::string fc_data, fc_meta, fc_hierarchy, fc_model, fc_method;
  int fc_horizon = 28, fc_period = 7;
  bool fc_future = false;
  forecast->add_option("--data", fc_data, "panel CSV")->required();
  forecast->add_option("--meta", fc_meta, "metadata CSV");
  forecast->add_option("--hierarchy", fc_hierarchy, "hierarchy JSON");
  forecast->add_option("--model", fc_model, "model file or directory of model_*.json");
  forecast->add_option("--method", fc_method, "naive | seasonal-naive (no model)");
  forecast->add_option("--period", fc_period, "seasonal period for seasonal-naive");
  auto* o_horizon = forecast->add_option("--horizon", fc_horizon, "steps ahead");
  forecast->add_flag("--future", fc_future,
                     "forecast past the panel end instead of the test window");

  // ---- reconcile ----
  auto* reconcile = app.add_subcommand("reconcile", "reconcile base forecasts");
  std::string rc_hierarchy, rc_method = "ols", rc_forecast, rc_insample, rc_load;
  reconcile->add_option("--hierarchy", rc_hierarchy, "hierarchy JSON")->required();
  reconcile->add_option("--method", rc_method,
                        "base|bottom-up|ols|wls-struct|wls-var|mint-shrink|erm");
  reconcile->add_option("--forecast", rc_forecast, "base forecast CSV")->required();
  reconcile->add_option("--insample", rc_insample,
                        "insample.csv from train (wls-var, mint-shrink, erm)");
  reconcile->add_option("--reconciler", rc_load, "reuse a saved reconciler JSON");

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "per-aggregation accuracy report");
  std::string ev_data, ev_meta, ev_hierarchy, ev_forecast, ev_baseline;
  evaluate->add_option("--data", ev_data, "panel CSV")->required();
  evaluate->add_option("--meta", ev_meta, "metadata CSV");
  evaluate->add_option("--hierarchy", ev_hierarchy, "hierarchy JSON")->required();
  evaluate->add_option("--forecast", ev_forecast, "forecast CSV")->required();
  evaluate->add_option("--baseline", ev_baseline, "baseline report.csv for relatives");

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "wall-clock scaling benchmarks");
  std::string bench_sizes = "100,300,1000,3000";
  int bench_levels = 12, bench_timesteps = 28, bench_reps = 5;
  bool no_scenarios = false, no_reconcile = false, no_plots = false;
  auto* o_sizes = bench->add_option("--sizes", bench_sizes, "bottom-series sizes");
  auto* o_blevels = bench->add_option("--levels", bench_levels, "hierarchy levels");
  auto* o_bts = bench->add_option("--timesteps", bench_timesteps, "grid width");
  auto* o_reps = bench->add_option("--repetitions", bench_reps, "timing repetitions");
  bench->add_flag("--no-scenarios", no_scenarios, "skip the scenario timings");
  bench->add_flag("--no-reconcile", no_reconcile, "skip the reconciliation timings");
  bench->add_flag("--no-plots", no_plots, "skip the SVG plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }
  const json cfg = load_config_file(config_path);
  json resolved;
  merge_option(opt_out, cfg, "out_dir", out_dir, resolved);
  merge_option(opt_seed, cfg, "seed", seed, resolved);
  resolved["threads"] = threads;

  if (*synth) {
    merge_option(o_series, cfg, "n_series", synth_series, resolved);
    merge_option(o_days, cfg, "n_days", synth_days, resolved);
    merge_option(o_levels, cfg, "levels", synth_levels, resolved);
    merge_option(o_zero, cfg, "zero_fraction", zero_fraction, resolved);
    merge_option(o_start, cfg, "start", synth_start, resolved);
    json synth_cfg{{"n_series", synth_series}, {"n_days", synth_days},
                   {"levels", parse_int_list(synth_levels)},
                   {"zero_fraction", zero_fraction}, {"seed", seed},
                   {"start", synth_start}};
    PanelGuard panel;
    int rc = hicast_panel_synth(synth_cfg.dump().c_str(), &panel.p);
    if (rc != HICAST_OK) return fail_with(rc);
    std::filesystem::create_directories(out_dir);
    rc = hicast_panel_write_csv(panel.p, (out_dir + "/panel.csv").c_str(),
                                (out_dir + "/meta.csv").c_str());
    if (rc != HICAST_OK) return fail_with(rc);
    // Declarative spec matching the generated metadata columns.
    json spec;
    spec["levels"].push_back({{"name", "total"}});
    for (std::size_t i = 0; i < parse_int_list(synth_levels).size(); ++i) {
      std::string col = "level" + std::to_string(i + 1);
      spec["levels"].push_back({{"name", col}, {"column", col}});
    }
    std::ofstream spec_out(out_dir + "/hierarchy.json");
    spec_out << spec.dump(2) << "\n";
    write_run_json(out_dir, "synth", resolved);
    std::cout << "wrote " << out_dir << "/panel.csv, meta.csv, hierarchy.json\n";
    return 0;
  }

  if (*buildh) {
    PanelGuard panel;
    int rc = load_panel(bh_data, bh_meta, panel);
    if (rc != HICAST_OK) return fail_with(rc);
    HierarchyGuard h;
    if (bh_random) {
      std::size_t n_series = 0, n_days = 0;
      hicast_panel_info(panel.p, &n_series, &n_days);
      rc = hicast_hierarchy_random(n_series, bh_max_levels, bh_max_categories, seed,
                                   &h.h);
    } else if (!bh_temporal.empty()) {
      rc = hicast_hierarchy_temporal(panel.p, bh_temporal.c_str(), &h.h);
    } else {
      if (bh_spec.empty()) {
        std::cerr << "error: pass --spec, --random or --temporal\n";
        return 2;
      }
      std::ifstream spec_in(bh_spec);
      if (!spec_in.good()) {
        std::cerr << "error: cannot open spec '" << bh_spec << "'\n";
        return 3;
      }
      std::ostringstream buf;
      buf << spec_in.rdbuf();
      rc = hicast_hierarchy_build(panel.p, buf.str().c_str(), &h.h);
    }
    if (rc != HICAST_OK) return fail_with(rc);
    std::filesystem::create_directories(out_dir);
    rc = hicast_hierarchy_save(h.h, (out_dir + "/hierarchy.json").c_str());
    if (rc != HICAST_OK) return fail_with(rc);
    size_t n_rows = 0, n_bottom = 0, n_levels = 0;
    double sp = 0.0;
    hicast_hierarchy_info(h.h, &n_rows, &n_bottom, &n_levels);
    hicast_hierarchy_sparsity(h.h, &sp);
    resolved["spec"] = bh_spec;
    resolved["random"] = bh_random;
    resolved["temporal"] = bh_temporal;
    write_run_json(out_dir, "build-hierarchy", resolved);
    std::printf("hierarchy: %zu rows, %zu bottom, %zu levels, sparsity %.6f\n", n_rows,
                n_bottom, n_levels, sp);
    return 0;
  }

  if (*train) {
    merge_option(o_scenario, cfg, "scenario", scenario, resolved);
    merge_option(o_objective, cfg, "objective", objective, resolved);
    merge_option(o_metric, cfg, "metric", metric, resolved);
    merge_option(o_temporal, cfg, "temporal", temporal, resolved);
    merge_option(o_valid, cfg, "valid_days", valid_days, resolved);
    merge_option(o_test, cfg, "test_days", test_days, resolved);
    merge_option(o_resid, cfg, "residual_days", residual_days, resolved);
    merge_option(o_nest, cfg, "n_estimators", n_estimators, resolved);
    merge_option(o_lr, cfg, "learning_rate", learning_rate, resolved);
    merge_option(o_leaves, cfg, "num_leaves", num_leaves, resolved);
    merge_option(o_mcs, cfg, "min_child_samples", min_child_samples, resolved);
    merge_option(o_l1, cfg, "lambda_l1", lambda_l1, resolved);
    merge_option(o_l2, cfg, "lambda_l2", lambda_l2, resolved);
    merge_option(o_ff, cfg, "feature_fraction", feature_fraction, resolved);
    merge_option(o_bf, cfg, "bagging_fraction", bagging_fraction, resolved);
    merge_option(o_bfreq, cfg, "bagging_freq", bagging_freq, resolved);
    merge_option(o_early, cfg, "early_stopping_rounds", early_stopping, resolved);
    merge_option(o_bins, cfg, "max_bins", max_bins, resolved);
    merge_option(o_rho, cfg, "tweedie_rho", tweedie_rho, resolved);
    merge_option(o_random, cfg, "random_hierarchy", random_hierarchy, resolved);
    merge_option(o_nocs, cfg, "no_cross_sectional", no_cross_sectional, resolved);

    PanelGuard panel;
    int rc = load_panel(tr_data, tr_meta, panel);
    if (rc != HICAST_OK) return fail_with(rc);
    std::ifstream h_in(tr_hierarchy);
    if (!h_in.good()) {
      std::cerr << "error: cannot open hierarchy '" << tr_hierarchy << "'\n";
      return 2;
    }
    std::ostringstream h_buf;
    h_buf << h_in.rdbuf();
    HierarchyGuard h;
    rc = hicast_hierarchy_build(panel.p, h_buf.str().c_str(), &h.h);
    if (rc != HICAST_OK) return fail_with(rc);

    json train_cfg;
    std::stringstream temporal_ss(temporal);
    std::vector<std::string> freqs;
    std::string freq;
    while (std::getline(temporal_ss, freq, ','))
      if (!freq.empty()) freqs.push_back(freq);
    train_cfg["scenario"] = scenario;
    train_cfg["objective"] = objective;
    train_cfg["metric"] = metric;
    train_cfg["reconciliation"] = scenario == "bottom-up" ? "none" : "base";
    train_cfg["valid_days"] = valid_days;
    train_cfg["test_days"] = test_days;
    train_cfg["residual_days"] = residual_days;
    train_cfg["tweedie_rho"] = tweedie_rho;
    train_cfg["use_cross_sectional"] = !no_cross_sectional;
    train_cfg["temporal_frequencies"] = freqs;
    train_cfg["random_hierarchy"] = random_hierarchy;
    train_cfg["seed"] = seed;
    train_cfg["train"] = {{"n_estimators", n_estimators},
                          {"learning_rate", learning_rate},
                          {"num_leaves", num_leaves},
                          {"min_child_samples", min_child_samples},
                          {"lambda_l1", lambda_l1},
                          {"lambda_l2", lambda_l2},
                          {"feature_fraction", feature_fraction},
                          {"bagging_fraction", bagging_fraction},
                          {"bagging_freq", bagging_freq},
                          {"early_stopping_rounds", early_stopping},
                          {"max_bins", max_bins}};
    if (random_search_trials > 0)
      train_cfg["random_search"] = {{"trials", random_search_trials},
                                    {"sets", search_sets}};
    resolved["train_config"] = train_cfg;

    size_t n_models = 0;
    if (!seed_list.empty()) {
      // Multi-seed protocol: one model set per seed.
      resolved["seeds"] = seed_list;
      for (int s : parse_int_list(seed_list)) {
        train_cfg["seed"] = s;
        size_t n = 0;
        rc = hicast_train(panel.p, h.h, train_cfg.dump().c_str(),
                          (out_dir + "/seed" + std::to_string(s)).c_str(), &n);
        if (rc != HICAST_OK) return fail_with(rc);
        n_models += n;
      }
    } else {
      rc = hicast_train(panel.p, h.h, train_cfg.dump().c_str(), out_dir.c_str(),
                        &n_models);
      if (rc != HICAST_OK) return fail_with(rc);
    }
    write_run_json(out_dir, "train", resolved);
    std::cout << "trained " << n_models << " model(s) into " << out_dir << "\n";
    return 0;
  }

  if (*forecast) {
    merge_option(o_horizon, cfg, "horizon", fc_horizon, resolved);
    PanelGuard panel;
    int rc = load_panel(fc_data, fc_meta, panel);
    if (rc != HICAST_OK) return fail_with(rc);
    std::filesystem::create_directories(out_dir);
    const std::string out_csv = out_dir + "/forecast.csv";
    if (!fc_method.empty()) {
      rc = hicast_naive_forecast(panel.p, fc_method.c_str(), fc_period, fc_horizon,
                                 out_csv.c_str());
      if (rc != HICAST_OK) return fail_with(rc);
    } else {
      if (fc_model.empty() || fc_hierarchy.empty()) {
        std::cerr << "error: pass --model and --hierarchy, or --method\n";
        return 2;
      }
      std::ifstream h_in(fc_hierarchy);
      if (!h_in.good()) {
        std::cerr << "error: cannot open hierarchy '" << fc_hierarchy << "'\n";
        return 2;
      }
      std::ostringstream h_buf;
      h_buf << h_in.rdbuf();
      HierarchyGuard h;
      rc = hicast_hierarchy_build(panel.p, h_buf.str().c_str(), &h.h);
      if (rc != HICAST_OK) return fail_with(rc);
      json fc_cfg{{"horizon", fc_horizon}, {"future", fc_future}};
      rc = hicast_forecast(panel.p, h.h, fc_model.c_str(), fc_cfg.dump().c_str(),
                           out_csv.c_str());
      if (rc != HICAST_OK) return fail_with(rc);
    }
    resolved["model"] = fc_model;
    resolved["method"] = fc_method;
    resolved["horizon"] = fc_horizon;
    resolved["future"] = fc_future;
    write_run_json(out_dir, "forecast", resolved);
    std::cout << "wrote " << out_csv << "\n";
    return 0;
  }

  if (*reconcile) {
    std::ifstream h_in(rc_hierarchy);
    if (!h_in.good()) {
      std::cerr << "error: cannot open hierarchy '" << rc_hierarchy << "'\n";
      return 2;
    }
    HierarchyGuard h;
    int rc = hicast_hierarchy_load(rc_hierarchy.c_str(), &h.h);
    if (rc != HICAST_OK) return fail_with(rc);
    ReconcilerGuard rec;
    if (!rc_load.empty()) {
      rc = hicast_reconciler_load(rc_load.c_str(), &rec.r);
    } else {
      rc = hicast_reconciler_fit(h.h, rc_method.c_str(),
                                 rc_insample.empty() ? nullptr : rc_insample.c_str(),
                                 &rec.r);
    }
    if (rc != HICAST_OK) return fail_with(rc);
    std::filesystem::create_directories(out_dir);
    rc = hicast_reconcile_csv(rec.r, h.h, rc_forecast.c_str(),
                              (out_dir + "/reconciled.csv").c_str());
    if (rc != HICAST_OK) return fail_with(rc);
    rc = hicast_reconciler_save(rec.r, (out_dir + "/reconciler.json").c_str());
    if (rc != HICAST_OK) return fail_with(rc);
    resolved["method"] = rc_method;
    resolved["forecast"] = rc_forecast;
    resolved["insample"] = rc_insample;
    write_run_json(out_dir, "reconcile", resolved);
    std::cout << "wrote " << out_dir << "/reconciled.csv\n";
    return 0;
  }

  if (*evaluate) {
    PanelGuard panel;
    int rc = load_panel(ev_data, ev_meta, panel);
    if (rc != HICAST_OK) return fail_with(rc);
    std::ifstream h_in(ev_hierarchy);
    if (!h_in.good()) {
      std::cerr << "error: cannot open hierarchy '" << ev_hierarchy << "'\n";
      return 2;
    }
    std::ostringstream h_buf;
    h_buf << h_in.rdbuf();
    HierarchyGuard h;
    rc = hicast_hierarchy_build(panel.p, h_buf.str().c_str(), &h.h);
    if (rc != HICAST_OK) return fail_with(rc);
    std::filesystem::create_directories(out_dir);
    std::vector<char> table(65536);
    rc = hicast_evaluate(panel.p, h.h, ev_forecast.c_str(),
                         ev_baseline.empty() ? nullptr : ev_baseline.c_str(),
                         (out_dir + "/report.csv").c_str(), table.data(),
                         table.size());
    if (rc != HICAST_OK) return fail_with(rc);
    resolved["forecast"] = ev_forecast;
    resolved["baseline"] = ev_baseline;
    write_run_json(out_dir, "evaluate", resolved);
    std::cout << table.data();
    std::cout << "wrote " << out_dir << "/report.csv\n";
    return 0;
  }

  if (*bench) {
    merge_option(o_sizes, cfg, "sizes", bench_sizes, resolved);
    merge_option(o_blevels, cfg, "levels", bench_levels, resolved);
    merge_option(o_bts, cfg, "timesteps", bench_timesteps, resolved);
    merge_option(o_reps, cfg, "repetitions", bench_reps, resolved);
    json bench_cfg;
    bench_cfg["sizes"] = parse_int_list(bench_sizes);
    bench_cfg["levels"] = bench_levels;
    bench_cfg["timesteps"] = bench_timesteps;
    bench_cfg["repetitions"] = bench_reps;
    bench_cfg["scenarios"] = !no_scenarios;
    bench_cfg["reconcile"] = !no_reconcile;
    bench_cfg["plots"] = !no_plots;
    bench_cfg["seed"] = seed;
    resolved["bench"] = bench_cfg;
    int rc = hicast_bench(bench_cfg.dump().c_str(), out_dir.c_str());
    if (rc != HICAST_OK) return fail_with(rc);
    write_run_json(out_dir, "bench", resolved);
    std::cout << "wrote benchmark CSVs into " << out_dir << "\n";
    return 0;
  }

  return 2;
}

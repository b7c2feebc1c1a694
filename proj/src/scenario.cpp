#include "scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "common.hpp"
#include "hloss.hpp"

namespace hicast {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::set<std::string> kScenarios{"bottom-up", "separate-aggregations", "global"};
const std::set<std::string> kObjectives{"sl", "tl", "hl"};
const std::set<std::string> kReconciliations{"base",    "ols",         "wls-struct",
                                             "wls-var", "mint-shrink", "erm"};

std::vector<TemporalFrequency> parse_frequencies(const std::vector<std::string>& names) {
  std::vector<TemporalFrequency> out;
  for (const auto& n : names) out.push_back(parse_frequency(n));
  return out;
}

// Demand-scale view of raw booster scores.
double inverse_link(const std::string& objective, double score) {
  return objective == "tl" ? std::exp(score) : score;
}

Hierarchy temporal_hierarchy(const PanelDataset& p, const RunConfig& cfg,
                             std::size_t day_begin, std::size_t window_days) {
  if (cfg.temporal_frequencies.empty())
    return Hierarchy::trivial(window_days);
  std::vector<Date> days;
  for (std::size_t t = 0; t < window_days; ++t)
    days.push_back(p.date_at(day_begin + t));
  std::vector<TemporalFrequency> freqs = parse_frequencies(cfg.temporal_frequencies);
  return build_temporal(days, freqs);
}

std::vector<SampleCell> grid_index(const FeatureFrame& frame, std::size_t window_begin) {
  std::vector<SampleCell> cells(frame.n_rows);
  for (std::size_t r = 0; r < frame.n_rows; ++r) {
    cells[r].row = frame.series_index[r];
    cells[r].col = static_cast<std::uint32_t>(frame.day_index[r] - window_begin);
  }
  return cells;
}

}  // namespace

void RunConfig::validate() const {
  require(kScenarios.count(scenario), ErrorCode::invalid_argument,
          "unknown scenario '" + scenario + "'");
  require(kObjectives.count(objective), ErrorCode::invalid_argument,
          "unknown objective '" + objective + "'");
  require(kObjectives.count(metric), ErrorCode::invalid_argument,
          "unknown metric '" + metric + "'");
  require(horizon >= 1, ErrorCode::invalid_argument, "horizon must be >= 1");
  require(test_days >= 1 && valid_days >= 1, ErrorCode::invalid_argument,
          "test_days and valid_days must be >= 1");
  require(residual_days >= 2, ErrorCode::invalid_argument, "residual_days must be >= 2");

  if (scenario == "bottom-up") {
    require(reconciliation == "none", ErrorCode::invalid_argument,
            "scenario grid: the bottom-up scenario aggregates its own forecasts; "
            "reconciliation must be 'none'");
  } else {
    require(objective != "hl" && metric != "hl", ErrorCode::invalid_argument,
            "scenario grid: the hierarchical loss trains bottom-level forecasts "
            "only; use the bottom-up scenario");
    require(kReconciliations.count(reconciliation), ErrorCode::invalid_argument,
            "scenario grid: scenario '" + scenario +
                "' needs a reconciliation method "
                "(base|ols|wls-struct|wls-var|mint-shrink|erm)");
  }
  train.validate();
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{
      {"scenario", scenario},
      {"objective", objective},
      {"metric", metric},
      {"reconciliation", reconciliation},
      {"horizon", horizon},
      {"valid_days", valid_days},
      {"test_days", test_days},
      {"residual_days", residual_days},
      {"tweedie_rho", tweedie_rho},
      {"use_cross_sectional", use_cross_sectional},
      {"temporal_frequencies", temporal_frequencies},
      {"random_hierarchy", random_hierarchy},
      {"random_max_levels", random_max_levels},
      {"random_max_categories", random_max_categories},
      {"seed", seed},
      {"train",
       {{"n_estimators", train.n_estimators},
        {"learning_rate", train.learning_rate},
        {"num_leaves", train.num_leaves},
        {"min_child_samples", train.min_child_samples},
        {"lambda_l2", train.lambda_l2},
        {"lambda_l1", train.lambda_l1},
        {"feature_fraction", train.feature_fraction},
        {"bagging_fraction", train.bagging_fraction},
        {"bagging_freq", train.bagging_freq},
        {"early_stopping_rounds", train.early_stopping_rounds},
        {"max_bins", train.max_bins}}},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.scenario = j.value("scenario", c.scenario);
  c.objective = j.value("objective", c.objective);
  c.metric = j.value("metric", c.metric);
  c.reconciliation = j.value("reconciliation", c.reconciliation);
  c.horizon = j.value("horizon", c.horizon);
  c.valid_days = j.value("valid_days", c.valid_days);
  c.test_days = j.value("test_days", c.test_days);
  c.residual_days = j.value("residual_days", c.residual_days);
  c.tweedie_rho = j.value("tweedie_rho", c.tweedie_rho);
  c.use_cross_sectional = j.value("use_cross_sectional", c.use_cross_sectional);
  c.temporal_frequencies =
      j.value("temporal_frequencies", c.temporal_frequencies);
  c.random_hierarchy = j.value("random_hierarchy", c.random_hierarchy);
  c.random_max_levels = j.value("random_max_levels", c.random_max_levels);
  c.random_max_categories = j.value("random_max_categories", c.random_max_categories);
  c.seed = j.value("seed", c.seed);
  if (j.contains("train")) {
    const nlohmann::json& t = j["train"];
    c.train.n_estimators = t.value("n_estimators", c.train.n_estimators);
    c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    c.train.num_leaves = t.value("num_leaves", c.train.num_leaves);
    c.train.min_child_samples = t.value("min_child_samples", c.train.min_child_samples);
    c.train.lambda_l2 = t.value("lambda_l2", c.train.lambda_l2);
    c.train.lambda_l1 = t.value("lambda_l1", c.train.lambda_l1);
    c.train.feature_fraction = t.value("feature_fraction", c.train.feature_fraction);
    c.train.bagging_fraction = t.value("bagging_fraction", c.train.bagging_fraction);
    c.train.bagging_freq = t.value("bagging_freq", c.train.bagging_freq);
    c.train.early_stopping_rounds =
        t.value("early_stopping_rounds", c.train.early_stopping_rounds);
    c.train.max_bins = t.value("max_bins", c.train.max_bins);
  }
  c.train.rng_seed = c.seed;
  return c;
}

Objective make_objective(const std::string& name, const RunConfig& cfg,
                         const PanelDataset& p, const Hierarchy& h_objective,
                         const FeatureFrame& frame, std::size_t window_begin,
                         std::size_t window_days) {
  Objective obj;
  std::vector<double> targets = frame.target;
  if (name == "sl") {
    obj.gradients = [targets](std::span<const double> preds) {
      return squared_error_objective(preds, targets);
    };
  } else if (name == "tl") {
    obj.link = Objective::Link::log;
    const double rho = cfg.tweedie_rho;
    obj.gradients = [targets, rho](std::span<const double> preds) {
      return tweedie_objective(preds, targets, rho);
    };
  } else if (name == "hl") {
    Hierarchy te = temporal_hierarchy(p, cfg, window_begin, window_days);
    auto ctx = std::make_shared<ObjectiveContext>(
        make_context(h_objective, std::move(te), grid_index(frame, window_begin)));
    obj.gradients = [ctx, targets](std::span<const double> preds) {
      return hloss_objective(*ctx, preds, targets);
    };
  } else {
    fail(ErrorCode::invalid_argument, "unknown objective '" + name + "'");
  }
  return obj;
}

Metric make_metric(const std::string& name, const RunConfig& cfg,
                   const PanelDataset& p, const Hierarchy& h_metric,
                   const FeatureFrame& frame, std::size_t window_begin,
                   std::size_t window_days, const std::string& objective_name) {
  Metric metric;
  metric.name = name;
  std::vector<double> targets = frame.target;
  const bool log_link = objective_name == "tl";
  auto to_demand = [log_link](std::span<const double> scores) {
    std::vector<double> demand(scores.begin(), scores.end());
    if (log_link)
      for (double& v : demand) v = std::exp(v);
    return demand;
  };
  if (name == "sl") {
    metric.value = [targets, to_demand](std::span<const double> scores) {
      return squared_error_metric(to_demand(scores), targets);
    };
  } else if (name == "tl") {
    const double rho = cfg.tweedie_rho;
    metric.value = [targets, to_demand, rho](std::span<const double> scores) {
      std::vector<double> f = to_demand(scores);
      for (double& v : f) v = std::log(std::max(v, 1e-9));
      return tweedie_metric(f, targets, rho);
    };
  } else if (name == "hl") {
    Hierarchy te = temporal_hierarchy(p, cfg, window_begin, window_days);
    auto ctx = std::make_shared<ObjectiveContext>(
        make_context(h_metric, std::move(te), grid_index(frame, window_begin)));
    metric.value = [ctx, targets, to_demand](std::span<const double> scores) {
      return hloss_metric(*ctx, to_demand(scores), targets);
    };
  } else {
    fail(ErrorCode::invalid_argument, "unknown metric '" + name + "'");
  }
  return metric;
}

DenseMatrix recursive_forecast(const Booster& booster, const PanelDataset& p,
                               const SeriesIdentity* identity, std::size_t start_day,
                               int horizon, const std::string& objective) {
  require(horizon >= 1, ErrorCode::invalid_argument, "horizon must be >= 1");
  require(start_day >= 1 && start_day <= p.n_days, ErrorCode::invalid_argument,
          "recursive_forecast: start day outside the panel");
  const std::size_t n = p.n_series();
  const std::size_t hist_days =
      std::max(p.n_days, start_day + static_cast<std::size_t>(horizon));

  // Pseudo-history: actuals strictly before the forecast start, predictions
  // after. Wiping the tail keeps any future actual out of reach.
  std::vector<double> history(n * hist_days, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < start_day; ++t)
      history[s * hist_days + t] = p.target[s * p.n_days + t];

  DenseMatrix out(n, static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const std::size_t day = start_day + static_cast<std::size_t>(k);
    FeatureFrame frame =
        build_features_window(p, history, hist_days, day, day + 1, identity);
    require(frame.names == booster.feature_names, ErrorCode::invalid_argument,
            "recursive_forecast: panel features do not match the model");
    BinnedDataset binned =
        apply_binning(frame.names, booster.binning, frame.columns, {});
    std::vector<double> scores = booster.predict(binned);
    for (std::size_t s = 0; s < n; ++s) {
      const double demand = inverse_link(objective, scores[s]);
      out(s, static_cast<std::size_t>(k)) = demand;
      history[s * hist_days + day] = demand;
    }
  }
  return out;
}

DenseMatrix naive_forecast(const PanelDataset& p, NaiveKind kind, int period,
                           std::size_t start_day, int horizon) {
  require(horizon >= 1, ErrorCode::invalid_argument, "horizon must be >= 1");
  require(start_day >= 1 && start_day <= p.n_days, ErrorCode::invalid_argument,
          "naive_forecast: start day outside the panel");
  if (kind == NaiveKind::seasonal_naive) {
    require(period >= 1, ErrorCode::invalid_argument, "seasonal period must be >= 1");
    require(start_day >= static_cast<std::size_t>(period), ErrorCode::invalid_argument,
            "naive_forecast: not enough history for the seasonal period");
  }
  DenseMatrix out(p.n_series(), static_cast<std::size_t>(horizon));
  for (std::size_t s = 0; s < p.n_series(); ++s) {
    for (int k = 0; k < horizon; ++k) {
      std::size_t src;
      if (kind == NaiveKind::naive) {
        src = start_day - 1;
      } else {
        // Repeat the last observed season.
        const int m = period;
        const int h = k + 1;
        src = start_day + static_cast<std::size_t>(k) -
              static_cast<std::size_t>(m * ((h + m - 1) / m));
      }
      out(s, static_cast<std::size_t>(k)) = p.target[s * p.n_days + src];
    }
  }
  return out;
}

namespace {

struct SplitPoints {
  std::size_t train_end = 0;  // first validation day
  std::size_t test_start = 0;
};

SplitPoints split_panel(const PanelDataset& p, const RunConfig& cfg) {
  const std::size_t reserved =
      static_cast<std::size_t>(cfg.valid_days) + static_cast<std::size_t>(cfg.test_days);
  require(p.n_days > reserved + 1, ErrorCode::invalid_argument,
          "panel too short for the requested validation/test windows");
  SplitPoints s;
  s.test_start = p.n_days - static_cast<std::size_t>(cfg.test_days);
  s.train_end = s.test_start - static_cast<std::size_t>(cfg.valid_days);
  return s;
}

// Trains one model on a panel slice covering hierarchy rows
// [row_begin, row_end); the objective hierarchy only applies to the
// bottom-level model of the bottom-up scenario.
TrainedModel train_one(const PanelDataset& panel, const Hierarchy& h,
                       const RunConfig& cfg, const Hierarchy* h_objective,
                       const Hierarchy* h_metric, std::size_t row_begin,
                       std::size_t row_end, const std::string& level_name,
                       const SplitPoints& split) {
  SeriesIdentity identity = identity_for_rows(h, row_begin, row_end);

  FeatureFrame train_frame = build_features(panel, 0, split.train_end, &identity);
  FeatureFrame valid_frame =
      build_features(panel, split.train_end, split.test_start, &identity);

  BinnedDataset train_ds = bin_features(train_frame.names, train_frame.columns,
                                        train_frame.target, cfg.train.max_bins);
  BinnedDataset valid_ds = apply_binning(train_frame.names, train_ds.binning,
                                         valid_frame.columns, valid_frame.target);

  Hierarchy trivial_obj = Hierarchy::trivial(panel.n_series());
  const Hierarchy& obj_h = h_objective ? *h_objective : trivial_obj;
  const Hierarchy& met_h = h_metric ? *h_metric : trivial_obj;

  Objective objective =
      make_objective(cfg.objective, cfg, panel, obj_h, train_frame, 0, split.train_end);
  Metric train_metric = make_metric(cfg.metric, cfg, panel, obj_h, train_frame, 0,
                                    split.train_end, cfg.objective);
  Metric valid_metric =
      make_metric(cfg.metric, cfg, panel, met_h, valid_frame, split.train_end,
                  split.test_start - split.train_end, cfg.objective);

  TrainConfig tc = cfg.train;
  tc.rng_seed = cfg.seed;
  TrainedModel model;
  model.level_name = level_name;
  model.row_begin = row_begin;
  model.row_end = row_end;
  model.booster = fit(train_ds, &valid_ds, objective, &train_metric, &valid_metric, tc);
  return model;
}

InSampleWindow insample_impl(const PanelDataset& p, const Hierarchy& h,
                             const RunConfig& cfg,
                             std::span<const TrainedModel> models,
                             std::span<const PanelDataset> panels) {
  SplitPoints split = split_panel(p, cfg);
  const std::size_t resid_days =
      std::min<std::size_t>(cfg.residual_days, split.train_end - 1);
  InSampleWindow window;
  window.day_begin = split.train_end - resid_days;
  window.actual = DenseMatrix(h.n_rows(), resid_days);
  window.predicted = DenseMatrix(h.n_rows(), resid_days);
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const TrainedModel& m = models[mi];
    SeriesIdentity identity = identity_for_rows(h, m.row_begin, m.row_end);
    FeatureFrame frame =
        build_features(panels[mi], window.day_begin, split.train_end, &identity);
    BinnedDataset ds =
        apply_binning(frame.names, m.booster.binning, frame.columns, frame.target);
    std::vector<double> scores = m.booster.predict(ds);
    for (std::size_t r = 0; r < frame.n_rows; ++r) {
      const std::size_t row = m.row_begin + frame.series_index[r];
      const std::size_t col = frame.day_index[r] - window.day_begin;
      window.predicted(row, col) = inverse_link(cfg.objective, scores[r]);
      window.actual(row, col) = frame.target[r];
    }
  }
  return window;
}

}  // namespace

PanelDataset panel_for_model(const PanelDataset& p, const Hierarchy& h,
                             const TrainedModel& m) {
  if (m.level_name == "bottom" && m.row_begin == h.n_a) return p;
  return aggregate_panel(p, h, m.row_begin, m.row_end);
}

InSampleWindow insample_window(const PanelDataset& p, const Hierarchy& h,
                               const RunConfig& cfg,
                               std::span<const TrainedModel> models) {
  std::vector<PanelDataset> panels;
  for (const TrainedModel& m : models) panels.push_back(panel_for_model(p, h, m));
  return insample_impl(p, h, cfg, models, panels);
}

std::vector<TrainedModel> train_models(const PanelDataset& p, const Hierarchy& h,
                                       const RunConfig& cfg) {
  cfg.validate();
  require(h.n_b == p.n_series(), ErrorCode::invalid_argument,
          "hierarchy does not match the panel");
  const SplitPoints split = split_panel(p, cfg);
  std::vector<TrainedModel> models;

  if (cfg.scenario == "bottom-up") {
    // Objective hierarchy: the true one, a freshly sampled random one, or
    // none; validation always scores against the true hierarchy.
    std::unique_ptr<Hierarchy> h_obj;
    std::unique_ptr<Hierarchy> h_met;
    if (cfg.objective == "hl" || cfg.metric == "hl") {
      if (!cfg.use_cross_sectional) {
        h_obj = std::make_unique<Hierarchy>(Hierarchy::trivial(p.n_series()));
        h_met = std::make_unique<Hierarchy>(Hierarchy::trivial(p.n_series()));
      } else if (cfg.random_hierarchy) {
        h_obj = std::make_unique<Hierarchy>(sample_random_hierarchy(
            p.n_series(), cfg.random_max_levels, cfg.random_max_categories, cfg.seed));
        h_met = std::make_unique<Hierarchy>(h);
      } else {
        h_obj = std::make_unique<Hierarchy>(h);
        h_met = std::make_unique<Hierarchy>(h);
      }
    }
    models.push_back(train_one(p, h, cfg, h_obj.get(), h_met.get(), h.n_a, h.n_rows(),
                               "bottom", split));
    return models;
  }

  if (cfg.scenario == "separate-aggregations") {
    for (const LevelRange& level : h.levels) {
      PanelDataset slice = level.name == "bottom" && level.begin == h.n_a
                               ? p
                               : aggregate_panel(p, h, level.begin, level.end);
      models.push_back(train_one(slice, h, cfg, nullptr, nullptr, level.begin,
                                 level.end, level.name, split));
    }
    return models;
  }

  // global: one model over every row of the hierarchy.
  PanelDataset all = aggregate_panel(p, h, 0, h.n_rows());
  models.push_back(train_one(all, h, cfg, nullptr, nullptr, 0, h.n_rows(), "global",
                             split));
  return models;
}

ScenarioResult scenario_run(const PanelDataset& p, const Hierarchy& h,
                            const RunConfig& cfg) {
  cfg.validate();
  require(cfg.horizon <= cfg.test_days, ErrorCode::invalid_argument,
          "scenario_run: horizon cannot exceed the test window");
  ScenarioResult result;
  SplitPoints split = split_panel(p, cfg);
  const std::size_t n = h.n_rows();
  const std::size_t horizon = static_cast<std::size_t>(cfg.horizon);

  auto t_train = Clock::now();
  result.models = train_models(p, h, cfg);
  result.train_seconds = seconds_since(t_train);

  // Panels per model; the bottom-up scenario forecasts the original panel.
  std::vector<PanelDataset> panels;
  for (const TrainedModel& m : result.models)
    panels.push_back(panel_for_model(p, h, m));

  auto t_predict = Clock::now();
  result.base_forecasts_full = DenseMatrix(n, horizon);
  for (std::size_t mi = 0; mi < result.models.size(); ++mi) {
    const TrainedModel& m = result.models[mi];
    SeriesIdentity identity = identity_for_rows(h, m.row_begin, m.row_end);
    DenseMatrix fc = recursive_forecast(m.booster, panels[mi], &identity,
                                        split.test_start, cfg.horizon, cfg.objective);
    for (std::size_t r = m.row_begin; r < m.row_end; ++r)
      for (std::size_t k = 0; k < horizon; ++k)
        result.base_forecasts_full(r, k) = fc(r - m.row_begin, k);
  }
  result.predict_seconds = seconds_since(t_predict);

  if (cfg.scenario == "bottom-up") {
    // Aggregate bottom forecasts: coherent by construction.
    DenseMatrix bottom(h.n_b, horizon);
    for (std::size_t b = 0; b < h.n_b; ++b)
      for (std::size_t k = 0; k < horizon; ++k)
        bottom(b, k) = result.base_forecasts_full(h.n_a + b, k);
    result.forecasts_full = spmm(h.S, bottom);
    // Only the bottom block of base_forecasts_full is meaningful; mirror the
    // aggregated values for reporting.
    result.base_forecasts_full = result.forecasts_full;
  } else {
    auto t_rec = Clock::now();
    InSampleWindow window = insample_impl(p, h, cfg, result.models, panels);

    Reconciler reconciler;
    const ReconcileMethod method = parse_reconcile_method(cfg.reconciliation);
    if (method == ReconcileMethod::erm) {
      reconciler = fit_erm(h, window.actual, window.predicted);
    } else if (method == ReconcileMethod::wls_var ||
               method == ReconcileMethod::mint_shrink) {
      ResidualPanel resid;
      resid.values = window.actual;
      for (std::size_t i = 0; i < resid.values.values.size(); ++i)
        resid.values.values[i] -= window.predicted.values[i];
      reconciler = fit_reconciler(method, h, &resid);
    } else {
      reconciler = fit_reconciler(method, h);
    }
    result.shrinkage = reconciler.shrinkage;

    result.forecasts_full = DenseMatrix(n, horizon);
    std::vector<double> column(n);
    for (std::size_t k = 0; k < horizon; ++k) {
      for (std::size_t r = 0; r < n; ++r) column[r] = result.base_forecasts_full(r, k);
      std::vector<double> fixed = reconcile(reconciler, column);
      for (std::size_t r = 0; r < n; ++r) result.forecasts_full(r, k) = fixed[r];
    }
    result.reconcile_seconds = seconds_since(t_rec);

    // How incoherent were the base forecasts (diagnostic).
    Partition part = partition(h);
    DenseMatrix viol = spmm(transpose(part.U), result.base_forecasts_full);
    for (double v : viol.values)
      result.base_coherence_violation =
          std::max(result.base_coherence_violation, std::fabs(v));
  }

  DenseMatrix bottom_actuals(h.n_b, horizon);
  for (std::size_t b = 0; b < h.n_b; ++b)
    for (std::size_t k = 0; k < horizon; ++k)
      bottom_actuals(b, k) = p.target[b * p.n_days + split.test_start + k];
  result.report = evaluate_full(result.forecasts_full, bottom_actuals, h);
  result.report.train_seconds = result.train_seconds;
  result.report.predict_seconds = result.predict_seconds;
  result.report.reconcile_seconds = result.reconcile_seconds;
  return result;
}

void save_model(const TrainedModel& m, const std::string& objective,
                const std::string& path) {
  nlohmann::json j;
  j["format"] = "hicast-model";
  j["level"] = m.level_name;
  j["row_begin"] = m.row_begin;
  j["row_end"] = m.row_end;
  j["objective"] = objective;
  j["booster"] = nlohmann::json::parse(m.booster.to_json());
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << j.dump() << "\n";
}

TrainedModel load_model(const std::string& path, std::string* objective_out) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::data, std::string("model file: invalid JSON: ") + e.what());
  }
  require(j.value("format", "") == "hicast-model", ErrorCode::data,
          path + ": not a hicast model file");
  TrainedModel m;
  m.level_name = j.at("level").get<std::string>();
  m.row_begin = j.at("row_begin").get<std::size_t>();
  m.row_end = j.at("row_end").get<std::size_t>();
  m.booster = Booster::from_json(j.at("booster").dump());
  if (objective_out) *objective_out = j.value("objective", "sl");
  return m;
}

std::vector<ValidationWindow> rolling_validation_windows(std::size_t n_days,
                                                         int test_days, int valid_days,
                                                         int n_sets) {
  require(n_sets >= 1 && valid_days >= 1 && test_days >= 0,
          ErrorCode::invalid_argument, "rolling windows: bad arguments");
  const std::size_t needed = static_cast<std::size_t>(test_days) +
                             static_cast<std::size_t>(n_sets) *
                                 static_cast<std::size_t>(valid_days);
  require(n_days > needed + 1, ErrorCode::invalid_argument,
          "rolling windows: panel too short for " + std::to_string(n_sets) +
              " validation sets");
  const std::size_t test_start = n_days - static_cast<std::size_t>(test_days);
  std::vector<ValidationWindow> windows;
  for (int i = n_sets; i >= 1; --i) {
    ValidationWindow w;
    w.valid_end = test_start - static_cast<std::size_t>(i - 1) *
                                   static_cast<std::size_t>(valid_days);
    w.valid_begin = w.valid_end - static_cast<std::size_t>(valid_days);
    w.train_end = w.valid_begin;
    windows.push_back(w);
  }
  return windows;
}

TrainConfig random_search(const PanelDataset& p, const Hierarchy& h,
                          const RunConfig& base, int n_trials, int n_sets) {
  base.validate();
  require(n_trials >= 1, ErrorCode::invalid_argument, "random_search: n_trials >= 1");
  require(base.scenario == "bottom-up", ErrorCode::invalid_argument,
          "random_search tunes the bottom-level model; use the bottom-up scenario");
  std::vector<ValidationWindow> windows =
      rolling_validation_windows(p.n_days, base.test_days, base.valid_days, n_sets);

  std::mt19937_64 rng(base.seed);
  auto uniform = [&](double lo, double hi) {
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    return lo + u * (hi - lo);
  };
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  };

  TrainConfig best = base.train;
  double best_score = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < n_trials; ++trial) {
    TrainConfig candidate = base.train;
    candidate.lambda_l1 = log_uniform(1e-8, 10.0);
    candidate.lambda_l2 = log_uniform(1e-8, 10.0);
    candidate.num_leaves = static_cast<int>(uniform(8.0, 1024.0));
    candidate.feature_fraction = uniform(0.4, 1.0);
    candidate.bagging_fraction = uniform(0.4, 1.0);
    candidate.bagging_freq = 1 + static_cast<int>(uniform(0.0, 7.0));
    candidate.min_child_samples = static_cast<int>(log_uniform(5.0, 5000.0));

    RunConfig cfg = base;
    cfg.train = candidate;
    const Hierarchy* h_obj = cfg.objective == "hl" ? &h : nullptr;
    const Hierarchy* h_met =
        (cfg.objective == "hl" || cfg.metric == "hl") ? &h : nullptr;
    double score = 0.0;
    for (const ValidationWindow& w : windows) {
      SplitPoints split{w.train_end, w.valid_end};
      TrainedModel m =
          train_one(p, h, cfg, h_obj, h_met, h.n_a, h.n_rows(), "search", split);
      double best_valid = std::numeric_limits<double>::infinity();
      for (const IterationRecord& rec : m.booster.log)
        best_valid = std::min(best_valid, rec.valid_metric);
      score += best_valid;
    }
    score /= static_cast<double>(windows.size());
    if (score < best_score) {
      best_score = score;
      best = candidate;
    }
  }
  return best;
}

}  // namespace hicast

#include "hicast.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bench.hpp"
#include "common.hpp"
#include "evaluate.hpp"
#include "features.hpp"
#include "hloss.hpp"
#include "panel.hpp"
#include "reconcile.hpp"
#include "scenario.hpp"
#include "synth.hpp"

using namespace hicast;

struct hicast_panel {
  PanelDataset v;
};
struct hicast_hierarchy {
  Hierarchy v;
};
struct hicast_context {
  ObjectiveContext v;
};
struct hicast_reconciler {
  Reconciler v;
};

namespace {

thread_local std::string g_last_error;

int status_of(const Error& e) { return static_cast<int>(e.code()); }

template <typename F>
int guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HICAST_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HICAST_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return HICAST_ERROR;
  }
}

void need(bool cond, const char* what) {
  require(cond, ErrorCode::invalid_argument, what);
}

nlohmann::json parse_json(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return nlohmann::json::object();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string(what) + ": invalid JSON: " + e.what());
  }
}

void copy_to_buffer(const std::string& text, char* buf, size_t buf_len) {
  if (buf == nullptr || buf_len == 0) return;
  const size_t n = std::min(text.size(), buf_len - 1);
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << content;
}

// Forecast CSV: series_id,step,value with step starting at 1.
void write_forecast_csv(const std::string& path,
                        const std::vector<std::string>& row_names,
                        const DenseMatrix& values) {
  std::ostringstream out;
  out.precision(17);
  out << "series_id,step,value\n";
  for (std::size_t r = 0; r < values.n_rows; ++r)
    for (std::size_t k = 0; k < values.n_cols; ++k)
      out << row_names[r] << "," << (k + 1) << "," << values(r, k) << "\n";
  write_file(path, out.str());
}

struct ForecastTable {
  std::unordered_map<std::string, std::vector<double>> by_name;
  std::size_t n_steps = 0;
};

ForecastTable read_forecast_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::data,
          path + ": empty forecast file");
  require(line.rfind("series_id,step,value", 0) == 0, ErrorCode::data,
          path + ": expected header series_id,step,value");
  ForecastTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    require(f.size() == 3, ErrorCode::data,
            path + ": row " + std::to_string(line_no) + " needs 3 fields");
    const std::size_t step = static_cast<std::size_t>(std::stoul(f[1]));
    require(step >= 1, ErrorCode::data, path + ": steps are 1-based");
    auto& vec = table.by_name[f[0]];
    if (vec.size() < step) vec.resize(step, std::nan(""));
    vec[step - 1] = std::stod(f[2]);
    table.n_steps = std::max(table.n_steps, step);
  }
  for (const auto& [name, vec] : table.by_name) {
    require(vec.size() == table.n_steps, ErrorCode::data,
            path + ": series '" + name + "' is missing forecast steps");
    for (double v : vec)
      require(!std::isnan(v), ErrorCode::data,
              path + ": series '" + name + "' has gaps in its steps");
  }
  return table;
}

// insample.csv: row,day,actual,predicted (absolute day index).
void write_insample_csv(const std::string& path, const Hierarchy& h,
                        const InSampleWindow& window) {
  std::ostringstream out;
  out.precision(17);
  out << "row,day,actual,predicted\n";
  for (std::size_t r = 0; r < window.actual.n_rows; ++r)
    for (std::size_t k = 0; k < window.actual.n_cols; ++k)
      out << h.row_names[r] << "," << (window.day_begin + k) << ","
          << window.actual(r, k) << "," << window.predicted(r, k) << "\n";
  write_file(path, out.str());
}

struct InSampleTable {
  DenseMatrix actual;
  DenseMatrix predicted;
};

InSampleTable read_insample_csv(const std::string& path, const Hierarchy& h) {
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::data,
          path + ": empty file");
  require(line.rfind("row,day,actual,predicted", 0) == 0, ErrorCode::data,
          path + ": expected header row,day,actual,predicted");
  std::unordered_map<std::string, std::size_t> row_index;
  for (std::size_t r = 0; r < h.n_rows(); ++r) row_index[h.row_names[r]] = r;

  struct Cell {
    std::size_t row, day;
    double actual, predicted;
  };
  std::vector<Cell> cells;
  std::size_t day_min = SIZE_MAX, day_max = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    require(f.size() == 4, ErrorCode::data,
            path + ": row " + std::to_string(line_no) + " needs 4 fields");
    auto it = row_index.find(f[0]);
    require(it != row_index.end(), ErrorCode::data,
            path + ": unknown hierarchy row '" + f[0] + "'");
    Cell c;
    c.row = it->second;
    c.day = static_cast<std::size_t>(std::stoul(f[1]));
    c.actual = std::stod(f[2]);
    c.predicted = std::stod(f[3]);
    day_min = std::min(day_min, c.day);
    day_max = std::max(day_max, c.day);
    cells.push_back(c);
  }
  require(!cells.empty(), ErrorCode::data, path + ": no rows");
  InSampleTable table;
  table.actual = DenseMatrix(h.n_rows(), day_max - day_min + 1);
  table.predicted = DenseMatrix(h.n_rows(), day_max - day_min + 1);
  for (const Cell& c : cells) {
    table.actual(c.row, c.day - day_min) = c.actual;
    table.predicted(c.row, c.day - day_min) = c.predicted;
  }
  return table;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  cfg.n_series = j.value("n_series", cfg.n_series);
  cfg.n_days = j.value("n_days", cfg.n_days);
  if (j.contains("levels")) cfg.level_group_counts = j["levels"].get<std::vector<int>>();
  cfg.zero_fraction = j.value("zero_fraction", cfg.zero_fraction);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("start")) cfg.start = parse_date(j["start"].get<std::string>());
  return cfg;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

extern "C" {

const char* hicast_version(void) {
#ifdef HICAST_VERSION
  return HICAST_VERSION;
#else
  return "v0.0.0";
#endif
}

const char* hicast_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

int hicast_panel_load_csv(const char* data_csv, const char* meta_csv,
                          hicast_panel** out) {
  return guarded([&] {
    need(data_csv && out, "hicast_panel_load_csv: null argument");
    *out = new hicast_panel{load_panel_csv(data_csv, meta_csv ? meta_csv : "")};
  });
}

int hicast_panel_load_m5(const char* sales_csv, const char* calendar_csv,
                         const char* prices_csv, hicast_panel** out) {
  return guarded([&] {
    need(sales_csv && calendar_csv && prices_csv && out,
         "hicast_panel_load_m5: null argument");
    *out = new hicast_panel{load_m5(sales_csv, calendar_csv, prices_csv)};
  });
}

int hicast_panel_synth(const char* config_json, hicast_panel** out) {
  return guarded([&] {
    need(out != nullptr, "hicast_panel_synth: null output");
    SynthConfig cfg = synth_config_from_json(parse_json(config_json, "synth config"));
    *out = new hicast_panel{synth_panel(cfg)};
  });
}

int hicast_panel_write_csv(const hicast_panel* panel, const char* data_csv,
                           const char* meta_csv) {
  return guarded([&] {
    need(panel && data_csv, "hicast_panel_write_csv: null argument");
    write_panel_csv(panel->v, data_csv, meta_csv ? meta_csv : "");
  });
}

int hicast_panel_info(const hicast_panel* panel, size_t* n_series, size_t* n_days) {
  return guarded([&] {
    need(panel != nullptr, "hicast_panel_info: null panel");
    if (n_series) *n_series = panel->v.n_series();
    if (n_days) *n_days = panel->v.n_days;
  });
}

void hicast_panel_free(hicast_panel* panel) { delete panel; }

/* ------------------------------------------------------------------ */

int hicast_hierarchy_build(const hicast_panel* panel, const char* spec_json,
                           hicast_hierarchy** out) {
  return guarded([&] {
    need(panel && spec_json && out, "hicast_hierarchy_build: null argument");
    *out = new hicast_hierarchy{hierarchy_for_panel(panel->v, spec_json)};
  });
}

int hicast_hierarchy_temporal(const hicast_panel* panel, const char* frequencies,
                              hicast_hierarchy** out) {
  return guarded([&] {
    need(panel && frequencies && out, "hicast_hierarchy_temporal: null argument");
    std::vector<TemporalFrequency> freqs;
    for (const std::string& name : split_list(frequencies))
      freqs.push_back(parse_frequency(name));
    std::vector<Date> days;
    for (std::size_t t = 0; t < panel->v.n_days; ++t)
      days.push_back(panel->v.date_at(t));
    *out = new hicast_hierarchy{build_temporal(days, freqs)};
  });
}

int hicast_hierarchy_random(size_t n_bottom, int max_levels, int max_categories,
                            unsigned long long seed, hicast_hierarchy** out) {
  return guarded([&] {
    need(out != nullptr, "hicast_hierarchy_random: null output");
    *out = new hicast_hierarchy{
        sample_random_hierarchy(n_bottom, max_levels, max_categories, seed)};
  });
}

int hicast_hierarchy_load(const char* path, hicast_hierarchy** out) {
  return guarded([&] {
    need(path && out, "hicast_hierarchy_load: null argument");
    *out = new hicast_hierarchy{load_hierarchy(path)};
  });
}

int hicast_hierarchy_save(const hicast_hierarchy* h, const char* path) {
  return guarded([&] {
    need(h && path, "hicast_hierarchy_save: null argument");
    save_hierarchy(h->v, path);
  });
}

int hicast_hierarchy_info(const hicast_hierarchy* h, size_t* n_rows, size_t* n_bottom,
                          size_t* n_levels) {
  return guarded([&] {
    need(h != nullptr, "hicast_hierarchy_info: null hierarchy");
    if (n_rows) *n_rows = h->v.n_rows();
    if (n_bottom) *n_bottom = h->v.n_b;
    if (n_levels) *n_levels = h->v.n_levels;
  });
}

int hicast_hierarchy_sparsity(const hicast_hierarchy* h, double* out) {
  return guarded([&] {
    need(h && out, "hicast_hierarchy_sparsity: null argument");
    *out = sparsity(h->v.S);
  });
}

void hicast_hierarchy_free(hicast_hierarchy* h) { delete h; }

/* ------------------------------------------------------------------ */

int hicast_context_create(const hicast_hierarchy* cross_sectional,
                          const hicast_hierarchy* temporal,
                          const unsigned* series_rows, const unsigned* time_cols,
                          size_t n_samples, size_t n_time_cols, hicast_context** out) {
  return guarded([&] {
    need(cross_sectional && series_rows && time_cols && out,
         "hicast_context_create: null argument");
    std::vector<SampleCell> cells(n_samples);
    for (size_t i = 0; i < n_samples; ++i) cells[i] = {series_rows[i], time_cols[i]};
    Hierarchy te = temporal ? temporal->v : Hierarchy::trivial(n_time_cols);
    *out = new hicast_context{
        make_context(cross_sectional->v, std::move(te), std::move(cells))};
  });
}

int hicast_hloss_objective(const hicast_context* ctx, const double* predictions,
                           const double* targets, size_t n, double* grad_out,
                           double* hess_out) {
  return guarded([&] {
    need(ctx && predictions && targets && grad_out && hess_out,
         "hicast_hloss_objective: null argument");
    GradHess gh = hloss_objective(ctx->v, {predictions, n}, {targets, n});
    std::memcpy(grad_out, gh.grad.data(), n * sizeof(double));
    std::memcpy(hess_out, gh.hess.data(), n * sizeof(double));
  });
}

int hicast_hloss_metric(const hicast_context* ctx, const double* predictions,
                        const double* targets, size_t n, double* value_out) {
  return guarded([&] {
    need(ctx && predictions && targets && value_out,
         "hicast_hloss_metric: null argument");
    *value_out = hloss_metric(ctx->v, {predictions, n}, {targets, n});
  });
}

void hicast_context_free(hicast_context* ctx) { delete ctx; }

/* ------------------------------------------------------------------ */

int hicast_train(const hicast_panel* panel, const hicast_hierarchy* h,
                 const char* config_json, const char* out_dir, size_t* n_models_out) {
  return guarded([&] {
    need(panel && h && out_dir, "hicast_train: null argument");
    nlohmann::json j = parse_json(config_json, "train config");
    RunConfig cfg = RunConfig::from_json(j);
    if (j.contains("random_search")) {
      const int trials = j["random_search"].value("trials", 0);
      const int sets = j["random_search"].value("sets", 3);
      if (trials > 0) cfg.train = random_search(panel->v, h->v, cfg, trials, sets);
    }
    std::filesystem::create_directories(out_dir);
    std::vector<TrainedModel> models = train_models(panel->v, h->v, cfg);
    for (const TrainedModel& m : models)
      save_model(m, cfg.objective,
                 std::string(out_dir) + "/model_" + m.level_name + ".json");

    std::ostringstream log;
    log << "level,iteration,train_metric,valid_metric\n";
    log.precision(17);
    for (const TrainedModel& m : models)
      for (const IterationRecord& rec : m.booster.log)
        log << m.level_name << "," << rec.iteration << "," << rec.train_metric << ","
            << rec.valid_metric << "\n";
    write_file(std::string(out_dir) + "/train_log.csv", log.str());

    if (cfg.scenario != "bottom-up") {
      InSampleWindow window = insample_window(panel->v, h->v, cfg, models);
      write_insample_csv(std::string(out_dir) + "/insample.csv", h->v, window);
    }
    if (n_models_out) *n_models_out = models.size();
  });
}

int hicast_forecast(const hicast_panel* panel, const hicast_hierarchy* h,
                    const char* model_path, const char* config_json,
                    const char* out_csv) {
  return guarded([&] {
    need(panel && h && model_path && out_csv, "hicast_forecast: null argument");
    nlohmann::json j = parse_json(config_json, "forecast config");
    const int horizon = j.value("horizon", 28);
    const bool future = j.value("future", false);
    require(horizon >= 1, ErrorCode::invalid_argument, "horizon must be >= 1");

    std::vector<std::string> paths;
    if (std::filesystem::is_directory(model_path)) {
      for (const auto& entry : std::filesystem::directory_iterator(model_path)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("model_", 0) == 0 && entry.path().extension() == ".json")
          paths.push_back(entry.path().string());
      }
      std::sort(paths.begin(), paths.end());
      require(!paths.empty(), ErrorCode::io,
              std::string(model_path) + ": no model_*.json files");
    } else {
      paths.push_back(model_path);
    }

    const std::size_t start_day =
        future ? panel->v.n_days : panel->v.n_days - static_cast<std::size_t>(horizon);

    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    for (const std::string& path : paths) {
      std::string objective;
      TrainedModel m = load_model(path, &objective);
      require(m.row_end <= h->v.n_rows(), ErrorCode::data,
              path + ": model rows exceed the hierarchy");
      PanelDataset slice = panel_for_model(panel->v, h->v, m);
      SeriesIdentity identity = identity_for_rows(h->v, m.row_begin, m.row_end);
      DenseMatrix fc = recursive_forecast(m.booster, slice, &identity, start_day,
                                          horizon, objective);
      for (std::size_t s = 0; s < fc.n_rows; ++s) {
        names.push_back(h->v.row_names[m.row_begin + s]);
        rows.emplace_back(fc.values.begin() + s * fc.n_cols,
                          fc.values.begin() + (s + 1) * fc.n_cols);
      }
    }
    DenseMatrix all(rows.size(), static_cast<std::size_t>(horizon));
    for (std::size_t r = 0; r < rows.size(); ++r)
      std::copy(rows[r].begin(), rows[r].end(), all.values.begin() + r * all.n_cols);
    write_forecast_csv(out_csv, names, all);
  });
}

int hicast_naive_forecast(const hicast_panel* panel, const char* kind, int period,
                          int horizon, const char* out_csv) {
  return guarded([&] {
    need(panel && kind && out_csv, "hicast_naive_forecast: null argument");
    require(horizon >= 1, ErrorCode::invalid_argument, "horizon must be >= 1");
    NaiveKind nk;
    const std::string k = kind;
    if (k == "naive") nk = NaiveKind::naive;
    else if (k == "seasonal-naive") nk = NaiveKind::seasonal_naive;
    else fail(ErrorCode::invalid_argument, "kind must be naive or seasonal-naive");
    const std::size_t start = panel->v.n_days - static_cast<std::size_t>(horizon);
    DenseMatrix fc = naive_forecast(panel->v, nk, period, start, horizon);
    write_forecast_csv(out_csv, panel->v.series_ids, fc);
  });
}

int hicast_run_scenario(const hicast_panel* panel, const hicast_hierarchy* h,
                        const char* config_json, const char* out_dir,
                        const char* baseline_report_csv, char* report_buf,
                        size_t report_buf_len) {
  return guarded([&] {
    need(panel && h, "hicast_run_scenario: null argument");
    nlohmann::json j = parse_json(config_json, "scenario config");
    // Multi-seed protocol: "seeds":[...] runs every seed and reports the
    // mean with standard deviations across seeds.
    std::vector<std::uint64_t> seeds;
    if (j.contains("seeds")) seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (seeds.empty()) seeds.push_back(j.value("seed", 0ULL));

    EvalReport baseline;
    const EvalReport* baseline_ptr = nullptr;
    if (baseline_report_csv) {
      baseline = report_from_csv(read_file(baseline_report_csv));
      baseline_ptr = &baseline;
    }
    auto attach_baseline = [&](EvalReport& report) {
      if (!baseline_ptr) return;
      for (LevelScore& row : report.rows) {
        const LevelScore* ref = baseline.find(row.level);
        if (ref && ref->rmse > 0.0) row.rel_rmse = row.rmse / ref->rmse;
        if (ref && ref->mae > 0.0) row.rel_mae = row.mae / ref->mae;
      }
    };

    if (out_dir) std::filesystem::create_directories(out_dir);
    std::vector<EvalReport> reports;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      nlohmann::json run_json = j;
      run_json["seed"] = seeds[i];
      RunConfig cfg = RunConfig::from_json(run_json);
      ScenarioResult result = scenario_run(panel->v, h->v, cfg);
      attach_baseline(result.report);
      reports.push_back(result.report);
      if (out_dir) {
        if (seeds.size() == 1) {
          write_forecast_csv(std::string(out_dir) + "/forecast.csv", h->v.row_names,
                             result.forecasts_full);
        } else {
          const std::string sub = std::string(out_dir) + "/seed" + std::to_string(seeds[i]);
          std::filesystem::create_directories(sub);
          write_forecast_csv(sub + "/forecast.csv", h->v.row_names,
                             result.forecasts_full);
          write_file(sub + "/report.csv", report_to_csv(result.report));
        }
      }
    }
    EvalReport final_report =
        reports.size() == 1 ? reports[0] : aggregate_reports(reports);
    const std::string csv = report_to_csv(final_report);
    if (out_dir) write_file(std::string(out_dir) + "/report.csv", csv);
    copy_to_buffer(csv, report_buf, report_buf_len);
  });
}

/* ------------------------------------------------------------------ */

int hicast_reconciler_fit(const hicast_hierarchy* h, const char* method,
                          const char* insample_csv, hicast_reconciler** out) {
  return guarded([&] {
    need(h && method && out, "hicast_reconciler_fit: null argument");
    const ReconcileMethod m = parse_reconcile_method(method);
    if (m == ReconcileMethod::erm) {
      require(insample_csv != nullptr, ErrorCode::invalid_argument,
              "erm needs an insample.csv (row,day,actual,predicted)");
      InSampleTable table = read_insample_csv(insample_csv, h->v);
      *out = new hicast_reconciler{fit_erm(h->v, table.actual, table.predicted)};
    } else if (m == ReconcileMethod::wls_var || m == ReconcileMethod::mint_shrink) {
      require(insample_csv != nullptr, ErrorCode::invalid_argument,
              std::string(method) + " needs an insample.csv (row,day,actual,predicted)");
      InSampleTable table = read_insample_csv(insample_csv, h->v);
      ResidualPanel resid;
      resid.values = table.actual;
      for (std::size_t i = 0; i < resid.values.values.size(); ++i)
        resid.values.values[i] -= table.predicted.values[i];
      *out = new hicast_reconciler{fit_reconciler(m, h->v, &resid)};
    } else {
      *out = new hicast_reconciler{fit_reconciler(m, h->v)};
    }
  });
}

int hicast_reconciler_load(const char* path, hicast_reconciler** out) {
  return guarded([&] {
    need(path && out, "hicast_reconciler_load: null argument");
    *out = new hicast_reconciler{load_reconciler(path)};
  });
}

int hicast_reconciler_save(const hicast_reconciler* r, const char* path) {
  return guarded([&] {
    need(r && path, "hicast_reconciler_save: null argument");
    save_reconciler(r->v, path);
  });
}

int hicast_reconciler_shrinkage(const hicast_reconciler* r, double* out) {
  return guarded([&] {
    need(r && out, "hicast_reconciler_shrinkage: null argument");
    *out = r->v.shrinkage;
  });
}

int hicast_reconcile_apply(const hicast_reconciler* r, const double* base, size_t n,
                           double* out) {
  return guarded([&] {
    need(r && base && out, "hicast_reconcile_apply: null argument");
    std::vector<double> fixed = reconcile(r->v, {base, n});
    std::memcpy(out, fixed.data(), fixed.size() * sizeof(double));
  });
}

int hicast_reconcile_csv(const hicast_reconciler* r, const hicast_hierarchy* h,
                         const char* forecast_csv, const char* out_csv) {
  return guarded([&] {
    need(r && h && forecast_csv && out_csv, "hicast_reconcile_csv: null argument");
    ForecastTable table = read_forecast_csv(forecast_csv);
    const std::size_t n = h->v.n_rows();
    DenseMatrix full(n, table.n_steps);
    for (std::size_t row = 0; row < n; ++row) {
      auto it = table.by_name.find(h->v.row_names[row]);
      require(it != table.by_name.end(), ErrorCode::data,
              std::string(forecast_csv) + ": missing forecasts for hierarchy row '" +
                  h->v.row_names[row] + "'");
      for (std::size_t k = 0; k < table.n_steps; ++k)
        full(row, k) = k < it->second.size() ? it->second[k] : 0.0;
    }
    DenseMatrix fixed(n, table.n_steps);
    std::vector<double> column(n);
    for (std::size_t k = 0; k < table.n_steps; ++k) {
      for (std::size_t row = 0; row < n; ++row) column[row] = full(row, k);
      std::vector<double> rec = reconcile(r->v, column);
      for (std::size_t row = 0; row < n; ++row) fixed(row, k) = rec[row];
    }
    write_forecast_csv(out_csv, h->v.row_names, fixed);
  });
}

void hicast_reconciler_free(hicast_reconciler* r) { delete r; }

/* ------------------------------------------------------------------ */

int hicast_evaluate(const hicast_panel* panel, const hicast_hierarchy* h,
                    const char* forecast_csv, const char* baseline_report_csv,
                    const char* out_report_csv, char* table_buf, size_t table_buf_len) {
  return guarded([&] {
    need(panel && h && forecast_csv, "hicast_evaluate: null argument");
    ForecastTable table = read_forecast_csv(forecast_csv);
    require(table.n_steps >= 1, ErrorCode::data, "forecast file has no steps");
    require(table.n_steps <= panel->v.n_days, ErrorCode::invalid_argument,
            "forecast longer than the panel");
    const Hierarchy& hh = h->v;
    require(hh.n_b == panel->v.n_series(), ErrorCode::invalid_argument,
            "hierarchy does not match the panel");

    DenseMatrix bottom_actuals(hh.n_b, table.n_steps);
    const std::size_t start = panel->v.n_days - table.n_steps;
    for (std::size_t b = 0; b < hh.n_b; ++b)
      for (std::size_t k = 0; k < table.n_steps; ++k)
        bottom_actuals(b, k) = panel->v.target[b * panel->v.n_days + start + k];

    EvalReport baseline;
    const EvalReport* baseline_ptr = nullptr;
    if (baseline_report_csv) {
      baseline = report_from_csv(read_file(baseline_report_csv));
      baseline_ptr = &baseline;
    }

    // Full-hierarchy forecasts score as-is; bottom-only forecasts are
    // aggregated first.
    bool full_coverage = true;
    for (std::size_t row = 0; row < hh.n_rows() && full_coverage; ++row)
      full_coverage = table.by_name.count(hh.row_names[row]) > 0;

    EvalReport report;
    if (full_coverage) {
      DenseMatrix full(hh.n_rows(), table.n_steps);
      for (std::size_t row = 0; row < hh.n_rows(); ++row) {
        const auto& vec = table.by_name[hh.row_names[row]];
        for (std::size_t k = 0; k < table.n_steps; ++k)
          full(row, k) = k < vec.size() ? vec[k] : 0.0;
      }
      report = evaluate_full(full, bottom_actuals, hh, baseline_ptr);
    } else {
      DenseMatrix bottom(hh.n_b, table.n_steps);
      for (std::size_t b = 0; b < hh.n_b; ++b) {
        auto it = table.by_name.find(hh.row_names[hh.n_a + b]);
        require(it != table.by_name.end(), ErrorCode::data,
                std::string(forecast_csv) + ": missing series '" +
                    hh.row_names[hh.n_a + b] + "'");
        for (std::size_t k = 0; k < table.n_steps; ++k)
          bottom(b, k) = k < it->second.size() ? it->second[k] : 0.0;
      }
      report = evaluate(bottom, bottom_actuals, hh, baseline_ptr);
    }
    if (out_report_csv) write_file(out_report_csv, report_to_csv(report));
    copy_to_buffer(report_to_table(report), table_buf, table_buf_len);
  });
}

/* ------------------------------------------------------------------ */

int hicast_bench(const char* config_json, const char* out_dir) {
  return guarded([&] {
    need(out_dir != nullptr, "hicast_bench: null out_dir");
    nlohmann::json j = parse_json(config_json, "bench config");
    BenchOptions opts;
    if (j.contains("sizes")) opts.sizes = j["sizes"].get<std::vector<std::size_t>>();
    opts.levels = j.value("levels", opts.levels);
    opts.timesteps = j.value("timesteps", opts.timesteps);
    opts.repetitions = j.value("repetitions", opts.repetitions);
    opts.run_scenarios = j.value("scenarios", opts.run_scenarios);
    opts.run_reconcile = j.value("reconcile", opts.run_reconcile);
    opts.plots = j.value("plots", opts.plots);
    opts.seed = j.value("seed", opts.seed);
    opts.out_dir = out_dir;
    run_bench(opts);
  });
}

}  // extern "C"

#include "evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "common.hpp"

namespace hicast {

const LevelScore* EvalReport::find(const std::string& level) const {
  for (const LevelScore& row : rows)
    if (row.level == level) return &row;
  return nullptr;
}

namespace {

void attach_baseline(EvalReport& report, const EvalReport* baseline) {
  if (!baseline) return;
  for (LevelScore& row : report.rows) {
    const LevelScore* ref = baseline->find(row.level);
    if (!ref) continue;
    if (ref->rmse > 0.0) row.rel_rmse = row.rmse / ref->rmse;
    if (ref->mae > 0.0) row.rel_mae = row.mae / ref->mae;
  }
}

EvalReport score_levels(const DenseMatrix& full_forecasts,
                        const DenseMatrix& full_actuals, const Hierarchy& h,
                        const EvalReport* baseline) {
  EvalReport report;
  double total_sq = 0.0, total_abs = 0.0;
  std::size_t total_cnt = 0;
  for (const LevelRange& level : h.levels) {
    double sq = 0.0, abs = 0.0;
    std::size_t cnt = 0;
    for (std::size_t r = level.begin; r < level.end; ++r) {
      for (std::size_t k = 0; k < full_forecasts.n_cols; ++k) {
        const double e = full_forecasts(r, k) - full_actuals(r, k);
        sq += e * e;
        abs += std::fabs(e);
        ++cnt;
      }
    }
    LevelScore score;
    score.level = level.name;
    score.rmse = cnt ? std::sqrt(sq / static_cast<double>(cnt)) : 0.0;
    score.mae = cnt ? abs / static_cast<double>(cnt) : 0.0;
    report.rows.push_back(score);
    total_sq += sq;
    total_abs += abs;
    total_cnt += cnt;
  }
  LevelScore all;
  all.level = "all_series";
  all.rmse = total_cnt ? std::sqrt(total_sq / static_cast<double>(total_cnt)) : 0.0;
  all.mae = total_cnt ? total_abs / static_cast<double>(total_cnt) : 0.0;
  report.rows.push_back(all);
  attach_baseline(report, baseline);
  return report;
}

}  // namespace

EvalReport evaluate(const DenseMatrix& bottom_forecasts,
                    const DenseMatrix& bottom_actuals, const Hierarchy& h,
                    const EvalReport* baseline) {
  require(bottom_forecasts.n_rows == h.n_b, ErrorCode::invalid_argument,
          "evaluate: expected forecasts for all " + std::to_string(h.n_b) +
              " bottom series");
  require(bottom_actuals.n_rows == h.n_b &&
              bottom_actuals.n_cols == bottom_forecasts.n_cols,
          ErrorCode::invalid_argument, "evaluate: actuals shape mismatch");
  return score_levels(spmm(h.S, bottom_forecasts), spmm(h.S, bottom_actuals), h,
                      baseline);
}

EvalReport evaluate_full(const DenseMatrix& full_forecasts,
                         const DenseMatrix& bottom_actuals, const Hierarchy& h,
                         const EvalReport* baseline) {
  require(full_forecasts.n_rows == h.n_rows(), ErrorCode::invalid_argument,
          "evaluate_full: expected forecasts for all hierarchy rows");
  require(bottom_actuals.n_rows == h.n_b &&
              bottom_actuals.n_cols == full_forecasts.n_cols,
          ErrorCode::invalid_argument, "evaluate_full: actuals shape mismatch");
  return score_levels(full_forecasts, spmm(h.S, bottom_actuals), h, baseline);
}

EvalReport aggregate_reports(std::span<const EvalReport> runs) {
  require(!runs.empty(), ErrorCode::invalid_argument, "aggregate_reports: no runs");
  EvalReport out = runs[0];
  const double n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    double rmse_sum = 0.0, mae_sum = 0.0, rel_rmse_sum = 0.0, rel_mae_sum = 0.0;
    for (const EvalReport& r : runs) {
      require(r.rows.size() == out.rows.size() && r.rows[i].level == out.rows[i].level,
              ErrorCode::invalid_argument, "aggregate_reports: mismatched reports");
      rmse_sum += r.rows[i].rmse;
      mae_sum += r.rows[i].mae;
      rel_rmse_sum += r.rows[i].rel_rmse;
      rel_mae_sum += r.rows[i].rel_mae;
    }
    out.rows[i].rmse = rmse_sum / n;
    out.rows[i].mae = mae_sum / n;
    out.rows[i].rel_rmse = rel_rmse_sum / n;
    out.rows[i].rel_mae = rel_mae_sum / n;
    double rmse_var = 0.0, mae_var = 0.0;
    for (const EvalReport& r : runs) {
      rmse_var += (r.rows[i].rmse - out.rows[i].rmse) * (r.rows[i].rmse - out.rows[i].rmse);
      mae_var += (r.rows[i].mae - out.rows[i].mae) * (r.rows[i].mae - out.rows[i].mae);
    }
    out.rows[i].rmse_std = runs.size() > 1 ? std::sqrt(rmse_var / (n - 1.0)) : 0.0;
    out.rows[i].mae_std = runs.size() > 1 ? std::sqrt(mae_var / (n - 1.0)) : 0.0;
  }
  double train = 0.0, predict = 0.0, reconcile = 0.0;
  for (const EvalReport& r : runs) {
    train += r.train_seconds;
    predict += r.predict_seconds;
    reconcile += r.reconcile_seconds;
  }
  out.train_seconds = train / n;
  out.predict_seconds = predict / n;
  out.reconcile_seconds = reconcile / n;
  return out;
}

namespace {
std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
double parse_or_nan(const std::string& s) {
  return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
}
}  // namespace

std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "level,rmse,mae,rel_rmse,rel_mae,rmse_std,mae_std\n";
  for (const LevelScore& row : r.rows) {
    out << row.level << "," << fmt(row.rmse) << "," << fmt(row.mae) << ","
        << fmt(row.rel_rmse) << "," << fmt(row.rel_mae) << "," << fmt(row.rmse_std)
        << "," << fmt(row.mae_std) << "\n";
  }
  return out.str();
}

EvalReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::data,
          "report: empty CSV");
  require(line.rfind("level,rmse,mae", 0) == 0, ErrorCode::data,
          "report: unexpected CSV header");
  EvalReport r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    LevelScore score;
    std::getline(row, score.level, ',');
    std::getline(row, field, ',');
    score.rmse = parse_or_nan(field);
    std::getline(row, field, ',');
    score.mae = parse_or_nan(field);
    std::getline(row, field, ',');
    score.rel_rmse = parse_or_nan(field);
    std::getline(row, field, ',');
    score.rel_mae = parse_or_nan(field);
    std::getline(row, field, ',');
    score.rmse_std = parse_or_nan(field);
    std::getline(row, field, ',');
    score.mae_std = parse_or_nan(field);
    r.rows.push_back(std::move(score));
  }
  return r;
}

std::string report_to_table(const EvalReport& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %12s %12s %9s %9s\n", "level", "rmse", "mae",
                "rel_rmse", "rel_mae");
  out << buf;
  out << std::string(70, '-') << "\n";
  for (const LevelScore& row : r.rows) {
    auto rel = [](double v) {
      if (std::isnan(v)) return std::string("-");
      char b[32];
      std::snprintf(b, sizeof(b), "%.2f", v);
      return std::string(b);
    };
    std::snprintf(buf, sizeof(buf), "%-24s %12.4f %12.4f %9s %9s\n", row.level.c_str(),
                  row.rmse, row.mae, rel(row.rel_rmse).c_str(), rel(row.rel_mae).c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace hicast

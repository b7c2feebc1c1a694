#include "features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace hicast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Monday-aligned week index of a panel day.
std::int64_t week_index(const PanelDataset& p, std::size_t day) {
  const std::int64_t d = p.start_date.days + static_cast<std::int64_t>(day);
  return (d + 3) / 7;  // 1970-01-01 was a Thursday
}

// weeks on sale = weeks elapsed since the first week with a positive price.
std::vector<double> weeks_on_sale_column(const PanelDataset& p, std::size_t price_col) {
  std::vector<double> out(p.n_series() * p.n_days, 0.0);
  for (std::size_t s = 0; s < p.n_series(); ++s) {
    std::int64_t first_week = -1;
    for (std::size_t t = 0; t < p.n_days; ++t) {
      const double price = p.exog[price_col][s * p.n_days + t];
      if (first_week < 0 && !std::isnan(price) && price > 0.0)
        first_week = week_index(p, t);
      out[s * p.n_days + t] =
          first_week < 0 ? 0.0
                         : static_cast<double>(week_index(p, t) - first_week + 1);
    }
  }
  return out;
}

std::size_t find_column(const std::vector<std::string>& names, const std::string& want) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == want) return i;
  return names.size();
}

}  // namespace

SeriesIdentity identity_for_rows(const Hierarchy& h, std::size_t row_begin,
                                 std::size_t row_end) {
  SeriesIdentity id;
  for (std::size_t r = row_begin; r < row_end; ++r) {
    double level = 0.0;
    for (std::size_t lv = 0; lv < h.levels.size(); ++lv)
      if (r >= h.levels[lv].begin && r < h.levels[lv].end)
        level = static_cast<double>(lv);
    id.aggregation_id.push_back(level);
    id.value_id.push_back(static_cast<double>(r));
  }
  return id;
}

FeatureFrame build_features_window(const PanelDataset& p,
                                   std::span<const double> history,
                                   std::size_t hist_days, std::size_t day_begin,
                                   std::size_t day_end,
                                   const SeriesIdentity* identity) {
  require(day_begin <= day_end && day_end <= hist_days, ErrorCode::invalid_argument,
          "build_features: bad day window");
  require(history.size() == p.n_series() * hist_days, ErrorCode::invalid_argument,
          "build_features: history size mismatch");
  const std::size_t n = p.n_series();
  const std::size_t window = day_end - day_begin;

  static const int kLags[] = {1, 2, 3, 4, 5, 6, 7, 28, 56, 364};
  static const int kWindows[] = {7, 28, 56};

  FeatureFrame f;
  f.n_rows = n * window;
  f.names = {"aggregation", "value"};
  for (int lag : kLags) f.names.push_back("sales_lag" + std::to_string(lag));
  for (int w : kWindows) f.names.push_back("sales_lag1_mavg" + std::to_string(w));
  f.names.insert(f.names.end(), {"dayofweek", "dayofmonth", "weekofyear", "monthofyear"});

  const std::size_t price_col = find_column(p.exog_names, "sell_price");
  const bool has_price = price_col < p.exog_names.size();
  if (has_price)
    f.names.insert(f.names.end(),
                   {"sell_price_avg", "sell_price_change", "weeks_on_sale_avg"});
  for (const auto& name : p.shared_exog_names) f.names.push_back(name);
  std::vector<std::size_t> passthrough;
  for (std::size_t k = 0; k < p.exog_names.size(); ++k) {
    if (k == price_col) continue;
    if (p.exog_names[k] == "weeks_on_sale") continue;  // consumed below
    passthrough.push_back(k);
    f.names.push_back(p.exog_names[k]);
  }

  f.columns.assign(f.names.size(), std::vector<double>(f.n_rows, kNaN));
  f.series_index.resize(f.n_rows);
  f.day_index.resize(f.n_rows);
  f.target.resize(f.n_rows);

  // Aggregate panels carry a precomputed member-averaged column; bottom
  // panels derive weeks-on-sale from the price grid.
  std::vector<double> wos;
  const std::size_t wos_col = find_column(p.exog_names, "weeks_on_sale");
  if (has_price) {
    if (wos_col < p.exog_names.size()) wos = p.exog[wos_col];
    else wos = weeks_on_sale_column(p, price_col);
  }

  std::vector<double> prefix(hist_days + 1);
  auto exog_at = [&](std::size_t col, std::size_t s, std::size_t t) {
    const std::size_t clamped = std::min(t, p.n_days - 1);
    return p.exog[col][s * p.n_days + clamped];
  };

  std::size_t row = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const double* hist = history.data() + s * hist_days;
    prefix[0] = 0.0;
    for (std::size_t t = 0; t < hist_days; ++t) prefix[t + 1] = prefix[t] + hist[t];

    for (std::size_t t = day_begin; t < day_end; ++t, ++row) {
      f.series_index[row] = static_cast<std::uint32_t>(s);
      f.day_index[row] = static_cast<std::uint32_t>(t);
      f.target[row] = t < p.n_days ? p.target[s * p.n_days + t] : kNaN;

      std::size_t c = 0;
      f.columns[c++][row] = identity ? identity->aggregation_id[s] : 0.0;
      f.columns[c++][row] = identity ? identity->value_id[s] : static_cast<double>(s);
      for (int lag : kLags) {
        f.columns[c++][row] =
            t >= static_cast<std::size_t>(lag) ? hist[t - lag] : kNaN;
      }
      for (int w : kWindows) {
        f.columns[c++][row] =
            t >= static_cast<std::size_t>(w)
                ? (prefix[t] - prefix[t - w]) / static_cast<double>(w)
                : kNaN;
      }
      const Date d = p.date_at(t);
      f.columns[c++][row] = static_cast<double>(day_of_week(d));
      f.columns[c++][row] = static_cast<double>(day_of_month(d));
      f.columns[c++][row] = static_cast<double>(week_of_year(d));
      f.columns[c++][row] = static_cast<double>(month_of_year(d));
      if (has_price) {
        const double price = exog_at(price_col, s, t);
        const double prev = t >= 1 ? exog_at(price_col, s, t - 1) : kNaN;
        f.columns[c++][row] = price;
        f.columns[c++][row] =
            (!std::isnan(price) && !std::isnan(prev)) ? price - prev : kNaN;
        f.columns[c++][row] = wos[s * p.n_days + std::min(t, p.n_days - 1)];
      }
      for (std::size_t k = 0; k < p.shared_exog_names.size(); ++k)
        f.columns[c++][row] = p.shared_exog[k][std::min(t, p.n_days - 1)];
      for (std::size_t k : passthrough) f.columns[c++][row] = exog_at(k, s, t);
    }
  }
  return f;
}

FeatureFrame build_features(const PanelDataset& p, std::size_t day_begin,
                            std::size_t day_end, const SeriesIdentity* identity) {
  return build_features_window(p, p.target, p.n_days, day_begin, day_end, identity);
}

PanelDataset aggregate_panel(const PanelDataset& p, const Hierarchy& h,
                             std::size_t row_begin, std::size_t row_end) {
  require(h.n_b == p.n_series(), ErrorCode::invalid_argument,
          "aggregate_panel: hierarchy does not match the panel");
  require(row_begin <= row_end && row_end <= h.n_rows(), ErrorCode::invalid_argument,
          "aggregate_panel: bad row range");
  PanelDataset out;
  out.start_date = p.start_date;
  out.n_days = p.n_days;
  const std::size_t n_out = row_end - row_begin;
  out.series_ids.assign(h.row_names.begin() + row_begin, h.row_names.begin() + row_end);
  out.target.assign(n_out * p.n_days, 0.0);
  out.shared_exog_names = p.shared_exog_names;
  out.shared_exog = p.shared_exog;

  const std::size_t price_col = find_column(p.exog_names, "sell_price");
  std::vector<double> bottom_wos;
  if (price_col < p.exog_names.size())
    bottom_wos = weeks_on_sale_column(p, price_col);

  for (std::size_t k = 0; k < p.exog_names.size(); ++k) {
    out.exog_names.push_back(p.exog_names[k]);
    out.exog.emplace_back(n_out * p.n_days, kNaN);
  }
  if (!bottom_wos.empty()) {
    out.exog_names.push_back("weeks_on_sale");
    out.exog.emplace_back(n_out * p.n_days, 0.0);
  }

  const auto off = h.S.row_offsets();
  const auto cols = h.S.col_indices();
  std::vector<double> exog_sum(p.exog_names.size());
  std::vector<std::size_t> exog_cnt(p.exog_names.size());
  for (std::size_t r = row_begin; r < row_end; ++r) {
    const std::size_t o = r - row_begin;
    for (std::size_t t = 0; t < p.n_days; ++t) {
      double target_sum = 0.0;
      std::fill(exog_sum.begin(), exog_sum.end(), 0.0);
      std::fill(exog_cnt.begin(), exog_cnt.end(), 0);
      double wos_sum = 0.0;
      std::size_t members = 0;
      for (std::size_t q = off[r]; q < off[r + 1]; ++q) {
        const std::size_t b = cols[q];
        target_sum += p.target[b * p.n_days + t];
        for (std::size_t k = 0; k < p.exog_names.size(); ++k) {
          const double v = p.exog[k][b * p.n_days + t];
          if (!std::isnan(v)) {
            exog_sum[k] += v;
            exog_cnt[k]++;
          }
        }
        if (!bottom_wos.empty()) wos_sum += bottom_wos[b * p.n_days + t];
        ++members;
      }
      out.target[o * p.n_days + t] = target_sum;
      for (std::size_t k = 0; k < p.exog_names.size(); ++k) {
        if (exog_cnt[k] > 0)
          out.exog[k][o * p.n_days + t] = exog_sum[k] / static_cast<double>(exog_cnt[k]);
      }
      if (!bottom_wos.empty() && members > 0)
        out.exog.back()[o * p.n_days + t] = wos_sum / static_cast<double>(members);
    }
  }
  return out;
}

}  // namespace hicast

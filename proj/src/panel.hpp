#pragma once

#include <map>
#include <string>
#include <vector>

#include "dates.hpp"
#include "hierarchy.hpp"

namespace hicast {

// Daily panel of bottom-level series on one contiguous date grid. Targets are
// zero-filled over the grid; exogenous values are NaN where unobserved.
// Calendar-wide covariates (snap flags, event encodings) live in shared
// columns indexed by day only.
struct PanelDataset {
  std::vector<std::string> series_ids;
  std::vector<std::string> meta_columns;
  std::vector<std::vector<std::string>> meta_values;  // [column][series]

  Date start_date{0};
  std::size_t n_days = 0;
  std::vector<double> target;  // [series * n_days + day]

  std::vector<std::string> exog_names;                // per-series covariates
  std::vector<std::vector<double>> exog;              // [k][series * n_days + day]
  std::vector<std::string> shared_exog_names;         // calendar covariates
  std::vector<std::vector<double>> shared_exog;       // [k][day]

  std::size_t n_series() const { return series_ids.size(); }
  double target_at(std::size_t s, std::size_t t) const { return target[s * n_days + t]; }
  Date date_at(std::size_t t) const { return start_date + static_cast<int>(t); }

  std::map<std::string, std::vector<std::string>> metadata_map() const;
};

// Long-format CSV: series_id,date,target[,exogenous...]. Metadata CSV:
// series_id,<column>... (optional, pass an empty path to skip). Duplicate
// (series,date) pairs and malformed fields are data errors naming the row;
// missing middle days are zero-filled.
PanelDataset load_panel_csv(const std::string& data_path, const std::string& meta_path);

void write_panel_csv(const PanelDataset& p, const std::string& data_path,
                     const std::string& meta_path);

// Adapter for the M5 competition layout (sales_train_*.csv, calendar.csv,
// sell_prices.csv). Produces sell_price as a per-series covariate and the
// snap/event columns as shared covariates.
PanelDataset load_m5(const std::string& sales_path, const std::string& calendar_path,
                     const std::string& prices_path);

// Resolves a declarative or materialized hierarchy JSON against the panel.
Hierarchy hierarchy_for_panel(const PanelDataset& p, const std::string& json_text);

// Minimal CSV row splitter with double-quote support; exposed for the other
// file readers.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace hicast

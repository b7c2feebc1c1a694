#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hierarchy.hpp"
#include "panel.hpp"

namespace hicast {

// One row per (series, day): lagged targets, moving averages, calendar
// attributes, price-derived columns and calendar covariates. Lags always look
// strictly backwards; rows with insufficient history carry NaN markers.
struct FeatureFrame {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // [feature][row]
  std::vector<std::uint32_t> series_index;
  std::vector<std::uint32_t> day_index;
  std::vector<double> target;
  std::size_t n_rows = 0;
};

// Identifier features: which aggregation level a series belongs to and which
// node it is, as ordinal codes.
struct SeriesIdentity {
  std::vector<double> aggregation_id;
  std::vector<double> value_id;
};

SeriesIdentity identity_for_rows(const Hierarchy& h, std::size_t row_begin,
                                 std::size_t row_end);

// history holds the target grid to lag against, [series * hist_days + day];
// it may extend past the panel (recursive forecasting appends predictions).
// Exogenous columns past the panel's last day carry the last observed value
// forward.
FeatureFrame build_features_window(const PanelDataset& p,
                                   std::span<const double> history,
                                   std::size_t hist_days, std::size_t day_begin,
                                   std::size_t day_end,
                                   const SeriesIdentity* identity = nullptr);

// Features over panel days [day_begin, day_end) against the panel's own
// targets.
FeatureFrame build_features(const PanelDataset& p, std::size_t day_begin,
                            std::size_t day_end,
                            const SeriesIdentity* identity = nullptr);

// Panel whose series are the hierarchy rows [row_begin, row_end): targets are
// member sums, per-series covariates member means, calendar covariates pass
// through.
PanelDataset aggregate_panel(const PanelDataset& p, const Hierarchy& h,
                             std::size_t row_begin, std::size_t row_end);

}  // namespace hicast

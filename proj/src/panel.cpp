#include "panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "common.hpp"

namespace hicast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(const std::string& field, std::size_t row, const char* what) {
  if (field.empty()) return kNaN;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    fail(ErrorCode::data, std::string("row ") + std::to_string(row) + ": bad " +
                              what + " value '" + field + "'");
  }
  return v;
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::map<std::string, std::vector<std::string>> PanelDataset::metadata_map() const {
  std::map<std::string, std::vector<std::string>> out;
  for (std::size_t c = 0; c < meta_columns.size(); ++c)
    out[meta_columns[c]] = meta_values[c];
  return out;
}

PanelDataset load_panel_csv(const std::string& data_path, const std::string& meta_path) {
  std::ifstream in = open_or_fail(data_path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::data,
          data_path + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  require(header.size() >= 3 && header[0] == "series_id" && header[1] == "date" &&
              header[2] == "target",
          ErrorCode::data,
          data_path + ": expected header series_id,date,target[,exogenous...]");
  const std::size_t n_exog = header.size() - 3;

  struct Row {
    std::uint32_t series;
    Date date;
    double target;
    std::vector<double> exog;
  };
  std::vector<Row> rows;
  std::vector<std::string> series_ids;
  std::unordered_map<std::string, std::uint32_t> series_index;
  Date min_date{std::numeric_limits<std::int32_t>::max()};
  Date max_date{std::numeric_limits<std::int32_t>::min()};

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    require(fields.size() == header.size(), ErrorCode::data,
            data_path + ": row " + std::to_string(line_no) + " has " +
                std::to_string(fields.size()) + " fields, expected " +
                std::to_string(header.size()));
    Row r;
    auto [it, inserted] =
        series_index.try_emplace(fields[0], static_cast<std::uint32_t>(series_ids.size()));
    if (inserted) series_ids.push_back(fields[0]);
    r.series = it->second;
    r.date = parse_date(fields[1]);
    r.target = parse_number(fields[2], line_no, "target");
    require(!std::isnan(r.target), ErrorCode::data,
            data_path + ": row " + std::to_string(line_no) + ": empty target");
    for (std::size_t k = 0; k < n_exog; ++k)
      r.exog.push_back(parse_number(fields[3 + k], line_no, header[3 + k].c_str()));
    min_date = std::min(min_date, r.date);
    max_date = std::max(max_date, r.date);
    rows.push_back(std::move(r));
  }
  require(!rows.empty(), ErrorCode::data, data_path + ": no observations");

  PanelDataset p;
  p.series_ids = std::move(series_ids);
  p.start_date = min_date;
  p.n_days = static_cast<std::size_t>(max_date - min_date) + 1;
  p.target.assign(p.n_series() * p.n_days, 0.0);
  for (std::size_t k = 0; k < n_exog; ++k) {
    p.exog_names.push_back(header[3 + k]);
    p.exog.emplace_back(p.n_series() * p.n_days, kNaN);
  }

  std::vector<std::uint8_t> seen(p.n_series() * p.n_days, 0);
  for (const Row& r : rows) {
    const std::size_t t = static_cast<std::size_t>(r.date - min_date);
    const std::size_t idx = r.series * p.n_days + t;
    require(!seen[idx], ErrorCode::data,
            data_path + ": duplicate (series,date) = (" + p.series_ids[r.series] +
                "," + format_date(r.date) + ")");
    seen[idx] = 1;
    p.target[idx] = r.target;
    for (std::size_t k = 0; k < n_exog; ++k) p.exog[k][idx] = r.exog[k];
  }

  if (!meta_path.empty()) {
    std::ifstream metain = open_or_fail(meta_path);
    require(static_cast<bool>(std::getline(metain, line)), ErrorCode::data,
            meta_path + ": empty file");
    std::vector<std::string> mheader = split_csv_line(line);
    require(mheader.size() >= 2 && mheader[0] == "series_id", ErrorCode::data,
            meta_path + ": expected header series_id,<columns...>");
    p.meta_columns.assign(mheader.begin() + 1, mheader.end());
    p.meta_values.assign(p.meta_columns.size(),
                         std::vector<std::string>(p.n_series()));
    std::vector<std::uint8_t> have(p.n_series(), 0);
    std::size_t mline = 1;
    while (std::getline(metain, line)) {
      ++mline;
      if (line.empty()) continue;
      std::vector<std::string> fields = split_csv_line(line);
      require(fields.size() == mheader.size(), ErrorCode::data,
              meta_path + ": row " + std::to_string(mline) + " field count mismatch");
      auto it = series_index.find(fields[0]);
      if (it == series_index.end()) continue;  // metadata for unused series
      for (std::size_t c = 0; c < p.meta_columns.size(); ++c)
        p.meta_values[c][it->second] = fields[1 + c];
      have[it->second] = 1;
    }
    for (std::size_t s = 0; s < p.n_series(); ++s)
      require(have[s], ErrorCode::data,
              meta_path + ": no metadata row for series '" + p.series_ids[s] + "'");
  }
  return p;
}

void write_panel_csv(const PanelDataset& p, const std::string& data_path,
                     const std::string& meta_path) {
  std::ofstream out(data_path);
  require(out.good(), ErrorCode::io, "cannot open '" + data_path + "' for writing");
  out << "series_id,date,target";
  for (const auto& name : p.exog_names) out << "," << name;
  out << "\n";
  out.precision(17);
  for (std::size_t s = 0; s < p.n_series(); ++s) {
    for (std::size_t t = 0; t < p.n_days; ++t) {
      out << p.series_ids[s] << "," << format_date(p.date_at(t)) << ","
          << p.target[s * p.n_days + t];
      for (const auto& col : p.exog) {
        const double v = col[s * p.n_days + t];
        out << ",";
        if (!std::isnan(v)) out << v;
      }
      out << "\n";
    }
  }
  if (!meta_path.empty() && !p.meta_columns.empty()) {
    std::ofstream mout(meta_path);
    require(mout.good(), ErrorCode::io, "cannot open '" + meta_path + "' for writing");
    mout << "series_id";
    for (const auto& c : p.meta_columns) mout << "," << c;
    mout << "\n";
    for (std::size_t s = 0; s < p.n_series(); ++s) {
      mout << p.series_ids[s];
      for (const auto& col : p.meta_values) mout << "," << col[s];
      mout << "\n";
    }
  }
}

PanelDataset load_m5(const std::string& sales_path, const std::string& calendar_path,
                     const std::string& prices_path) {
  // calendar.csv drives the date grid and the shared covariates.
  std::ifstream cal = open_or_fail(calendar_path);
  std::string line;
  require(static_cast<bool>(std::getline(cal, line)), ErrorCode::data,
          calendar_path + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  auto col_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    fail(ErrorCode::data, calendar_path + ": missing column '" + name + "'");
  };
  const std::size_t c_date = col_of("date"), c_week = col_of("wm_yr_wk"),
                    c_d = col_of("d");
  const std::size_t c_ev1 = col_of("event_type_1"), c_ev2 = col_of("event_type_2");
  const std::size_t c_snap_ca = col_of("snap_CA"), c_snap_tx = col_of("snap_TX"),
                    c_snap_wi = col_of("snap_WI");

  std::vector<Date> day_dates;
  std::vector<std::string> day_weeks;
  std::vector<double> snap_ca, snap_tx, snap_wi, ev1, ev2;
  std::unordered_map<std::string, double> ev1_codes{{"", 0.0}}, ev2_codes{{"", 0.0}};
  std::unordered_map<std::string, std::size_t> d_index;
  std::size_t line_no = 1;
  while (std::getline(cal, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    require(f.size() == header.size(), ErrorCode::data,
            calendar_path + ": row " + std::to_string(line_no) + " field count");
    d_index[f[c_d]] = day_dates.size();
    day_dates.push_back(parse_date(f[c_date]));
    day_weeks.push_back(f[c_week]);
    snap_ca.push_back(parse_number(f[c_snap_ca], line_no, "snap_CA"));
    snap_tx.push_back(parse_number(f[c_snap_tx], line_no, "snap_TX"));
    snap_wi.push_back(parse_number(f[c_snap_wi], line_no, "snap_WI"));
    auto code = [](std::unordered_map<std::string, double>& m, const std::string& k) {
      auto [it, inserted] = m.try_emplace(k, static_cast<double>(m.size()));
      return it->second;
    };
    ev1.push_back(code(ev1_codes, f[c_ev1]));
    ev2.push_back(code(ev2_codes, f[c_ev2]));
  }
  require(!day_dates.empty(), ErrorCode::data, calendar_path + ": no days");

  // sales_train_*.csv: one row per series, d_1.. columns hold the targets.
  std::ifstream sales = open_or_fail(sales_path);
  require(static_cast<bool>(std::getline(sales, line)), ErrorCode::data,
          sales_path + ": empty file");
  std::vector<std::string> sheader = split_csv_line(line);
  require(sheader.size() > 6 && sheader[0] == "id", ErrorCode::data,
          sales_path + ": unexpected header");
  std::size_t first_day_col = 0;
  for (std::size_t i = 0; i < sheader.size(); ++i)
    if (sheader[i].rfind("d_", 0) == 0) {
      first_day_col = i;
      break;
    }
  require(first_day_col > 0, ErrorCode::data, sales_path + ": no d_* columns");
  const std::size_t n_obs_days = sheader.size() - first_day_col;
  require(n_obs_days <= day_dates.size(), ErrorCode::data,
          sales_path + ": more day columns than calendar rows");

  PanelDataset p;
  p.start_date = day_dates[0];
  p.n_days = n_obs_days;
  p.meta_columns = {"item_id", "dept_id", "cat_id", "store_id", "state_id"};
  p.meta_values.assign(5, {});
  std::vector<std::size_t> meta_cols(5);
  for (std::size_t i = 0; i < 5; ++i) {
    bool found = false;
    for (std::size_t c = 0; c < first_day_col; ++c)
      if (sheader[c] == p.meta_columns[i]) {
        meta_cols[i] = c;
        found = true;
      }
    require(found, ErrorCode::data,
            sales_path + ": missing column '" + p.meta_columns[i] + "'");
  }

  std::vector<std::vector<double>> targets;
  line_no = 1;
  while (std::getline(sales, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    require(f.size() == sheader.size(), ErrorCode::data,
            sales_path + ": row " + std::to_string(line_no) + " field count");
    p.series_ids.push_back(f[0]);
    for (std::size_t i = 0; i < 5; ++i) p.meta_values[i].push_back(f[meta_cols[i]]);
    std::vector<double> row(n_obs_days);
    for (std::size_t t = 0; t < n_obs_days; ++t)
      row[t] = parse_number(f[first_day_col + t], line_no, "sales");
    targets.push_back(std::move(row));
  }
  require(!targets.empty(), ErrorCode::data, sales_path + ": no series");
  p.target.resize(p.n_series() * p.n_days);
  for (std::size_t s = 0; s < p.n_series(); ++s)
    std::copy(targets[s].begin(), targets[s].end(), p.target.begin() + s * p.n_days);

  p.shared_exog_names = {"snap_CA", "snap_TX", "snap_WI", "event_type_1_enc",
                         "event_type_2_enc"};
  auto clip = [&](std::vector<double> v) {
    v.resize(p.n_days);
    return v;
  };
  p.shared_exog = {clip(snap_ca), clip(snap_tx), clip(snap_wi), clip(ev1), clip(ev2)};

  // sell_prices.csv: weekly prices per (store,item), expanded to days.
  std::ifstream prices = open_or_fail(prices_path);
  require(static_cast<bool>(std::getline(prices, line)), ErrorCode::data,
          prices_path + ": empty file");
  std::vector<std::string> pheader = split_csv_line(line);
  require(pheader.size() == 4 && pheader[0] == "store_id" && pheader[1] == "item_id" &&
              pheader[2] == "wm_yr_wk" && pheader[3] == "sell_price",
          ErrorCode::data, prices_path + ": unexpected header");

  std::unordered_map<std::string, std::uint32_t> series_by_key;
  const std::size_t item_col = 0, store_col = 3;  // indices into meta column order
  for (std::size_t s = 0; s < p.n_series(); ++s)
    series_by_key[p.meta_values[store_col][s] + "\t" + p.meta_values[item_col][s]] =
        static_cast<std::uint32_t>(s);
  std::unordered_map<std::string, std::vector<std::size_t>> days_by_week;
  for (std::size_t t = 0; t < p.n_days; ++t) days_by_week[day_weeks[t]].push_back(t);

  p.exog_names = {"sell_price"};
  p.exog.assign(1, std::vector<double>(p.n_series() * p.n_days, kNaN));
  line_no = 1;
  while (std::getline(prices, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    require(f.size() == 4, ErrorCode::data,
            prices_path + ": row " + std::to_string(line_no) + " field count");
    auto sit = series_by_key.find(f[0] + "\t" + f[1]);
    if (sit == series_by_key.end()) continue;
    auto wit = days_by_week.find(f[2]);
    if (wit == days_by_week.end()) continue;
    const double price = parse_number(f[3], line_no, "sell_price");
    for (std::size_t t : wit->second)
      p.exog[0][static_cast<std::size_t>(sit->second) * p.n_days + t] = price;
  }
  return p;
}

Hierarchy hierarchy_for_panel(const PanelDataset& p, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::data, std::string("hierarchy: invalid JSON: ") + e.what());
  }
  if (j.contains("n_bottom")) {
    Hierarchy h = hierarchy_from_json(json_text);
    require(h.n_b == p.n_series(), ErrorCode::data,
            "hierarchy has " + std::to_string(h.n_b) + " bottom series, panel has " +
                std::to_string(p.n_series()));
    return h;
  }
  return hierarchy_from_spec(p.series_ids, p.metadata_map(), json_text);
}

}  // namespace hicast

#include "hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "common.hpp"

namespace hicast {

namespace {

// Assembles S from per-level group memberships and fills in the shared
// metadata (d vector, level ranges, row names, bottom identity block).
Hierarchy assemble(std::size_t n_b,
                   const std::vector<std::string>& bottom_names,
                   const std::vector<std::string>& level_names,
                   const std::vector<std::vector<std::string>>& group_names,
                   const std::vector<std::vector<std::vector<std::size_t>>>& members) {
  Hierarchy h;
  h.n_b = n_b;
  h.n_levels = level_names.size() + 1;

  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  std::size_t row = 0;
  for (std::size_t lv = 0; lv < level_names.size(); ++lv) {
    LevelRange range{level_names[lv], row, row};
    for (std::size_t g = 0; g < members[lv].size(); ++g) {
      for (std::size_t b : members[lv][g]) {
        rows.push_back(row);
        cols.push_back(b);
        vals.push_back(1.0);
      }
      h.row_names.push_back(level_names[lv] + ":" + group_names[lv][g]);
      ++row;
    }
    range.end = row;
    h.levels.push_back(range);
  }
  h.n_a = row;
  for (std::size_t b = 0; b < n_b; ++b) {
    rows.push_back(row + b);
    cols.push_back(b);
    vals.push_back(1.0);
    h.row_names.push_back(bottom_names.empty() ? "bottom:" + std::to_string(b)
                                               : bottom_names[b]);
  }
  h.levels.push_back(LevelRange{"bottom", row, row + n_b});
  h.S = SparseMatrix::from_triplets(rows, cols, vals, h.n_a + n_b, n_b);

  h.d = row_sums(h.S);
  for (double& x : h.d) x *= static_cast<double>(h.n_levels);
  return h;
}

}  // namespace

Hierarchy Hierarchy::trivial(std::size_t n_b) {
  return assemble(n_b, {}, {}, {}, {});
}

Hierarchy build_cross_sectional(std::span<const std::string> bottom_keys,
                                std::span<const LevelSpec> level_specs) {
  const std::size_t n_b = bottom_keys.size();
  require(n_b > 0, ErrorCode::invalid_argument,
          "build_cross_sectional: no bottom series");

  std::vector<std::string> level_names;
  std::vector<std::vector<std::string>> group_names(level_specs.size());
  std::vector<std::vector<std::vector<std::size_t>>> members(level_specs.size());
  for (std::size_t lv = 0; lv < level_specs.size(); ++lv) {
    const LevelSpec& spec = level_specs[lv];
    level_names.push_back(spec.name);
    std::map<std::string, std::size_t> group_index;
    for (std::size_t b = 0; b < n_b; ++b) {
      auto it = spec.group_of.find(bottom_keys[b]);
      if (it == spec.group_of.end()) {
        fail(ErrorCode::data, "level '" + spec.name + "' has no group for bottom key '" +
                                  bottom_keys[b] + "'");
      }
      auto [git, inserted] = group_index.try_emplace(it->second, members[lv].size());
      if (inserted) {
        members[lv].emplace_back();
        group_names[lv].push_back(it->second);
      }
      members[lv][git->second].push_back(b);
    }
  }
  return assemble(n_b, {bottom_keys.begin(), bottom_keys.end()}, level_names,
                  group_names, members);
}

TemporalFrequency parse_frequency(const std::string& name) {
  if (name == "week") return TemporalFrequency::week;
  if (name == "month") return TemporalFrequency::month;
  if (name == "year") return TemporalFrequency::year;
  if (name == "all") return TemporalFrequency::all;
  fail(ErrorCode::invalid_argument,
       "unknown temporal frequency '" + name + "' (week|month|year|all)");
}

std::string frequency_name(TemporalFrequency f) {
  switch (f) {
    case TemporalFrequency::week: return "week";
    case TemporalFrequency::month: return "month";
    case TemporalFrequency::year: return "year";
    case TemporalFrequency::all: return "all";
  }
  return "?";
}

Hierarchy build_temporal(std::span<const Date> days,
                         std::span<const TemporalFrequency> frequencies) {
  require(!days.empty(), ErrorCode::invalid_argument, "build_temporal: no timesteps");
  for (std::size_t t = 1; t < days.size(); ++t) {
    require(days[t].days > days[t - 1].days, ErrorCode::data,
            days[t] == days[t - 1] ? "build_temporal: duplicate date " + format_date(days[t])
                                   : "build_temporal: dates not increasing");
  }

  std::vector<std::string> names(days.size());
  for (std::size_t t = 0; t < days.size(); ++t) names[t] = format_date(days[t]);

  std::vector<std::string> level_names;
  std::vector<std::vector<std::string>> group_names(frequencies.size());
  std::vector<std::vector<std::vector<std::size_t>>> members(frequencies.size());
  for (std::size_t lv = 0; lv < frequencies.size(); ++lv) {
    const TemporalFrequency f = frequencies[lv];
    level_names.push_back(frequency_name(f));
    auto bucket_of = [&](Date d) -> std::string {
      CivilDate c = civil_from_date(d);
      std::ostringstream key;
      switch (f) {
        case TemporalFrequency::week: {
          // Calendar week starting Monday; partial edge buckets stay in,
          // keeping every column's level count equal.
          Date monday = d + (-day_of_week(d));
          key << format_date(monday);
          break;
        }
        case TemporalFrequency::month:
          key << c.year << "-" << (c.month < 10 ? "0" : "") << c.month;
          break;
        case TemporalFrequency::year:
          key << c.year;
          break;
        case TemporalFrequency::all:
          key << "all";
          break;
      }
      return key.str();
    };
    std::map<std::string, std::size_t> bucket_index;
    for (std::size_t t = 0; t < days.size(); ++t) {
      const std::string b = bucket_of(days[t]);
      auto [it, inserted] = bucket_index.try_emplace(b, members[lv].size());
      if (inserted) {
        members[lv].emplace_back();
        group_names[lv].push_back(b);
      }
      members[lv][it->second].push_back(t);
    }
  }
  return assemble(days.size(), names, level_names, group_names, members);
}

Hierarchy sample_random_hierarchy(std::size_t n_b, int max_levels,
                                  int max_categories, std::uint64_t seed) {
  require(n_b > 0, ErrorCode::invalid_argument, "sample_random_hierarchy: n_b = 0");
  require(max_levels >= 1 && max_categories >= 1, ErrorCode::invalid_argument,
          "sample_random_hierarchy: max_levels and max_categories must be >= 1");
  std::mt19937_64 rng(seed);
  auto draw = [&](std::uint64_t upper) {  // uniform in [0, upper)
    return static_cast<std::size_t>(rng() % upper);
  };

  const std::size_t n_levels = 1 + draw(static_cast<std::uint64_t>(max_levels));
  std::vector<LevelSpec> specs(n_levels);
  std::vector<std::string> keys(n_b);
  for (std::size_t b = 0; b < n_b; ++b) keys[b] = "s" + std::to_string(b);
  for (std::size_t lv = 0; lv < n_levels; ++lv) {
    specs[lv].name = "random" + std::to_string(lv);
    const std::size_t n_cat = 1 + draw(static_cast<std::uint64_t>(max_categories));
    for (std::size_t b = 0; b < n_b; ++b)
      specs[lv].group_of[keys[b]] = "c" + std::to_string(draw(n_cat));
  }
  return build_cross_sectional(keys, specs);
}

Partition partition(const Hierarchy& h) {
  Partition p;
  const auto off = h.S.row_offsets();
  const auto cols = h.S.col_indices();
  const auto vals = h.S.values();

  std::vector<std::size_t> rows_c, cols_c;
  std::vector<double> vals_c;
  for (std::size_t i = 0; i < h.n_a; ++i) {
    for (std::size_t q = off[i]; q < off[i + 1]; ++q) {
      rows_c.push_back(i);
      cols_c.push_back(cols[q]);
      vals_c.push_back(vals[q]);
    }
  }
  p.C = SparseMatrix::from_triplets(rows_c, cols_c, vals_c, h.n_a, h.n_b);

  // U^T = [I_{n_a} -C]  =>  U is n x n_a.
  std::vector<std::size_t> rows_u, cols_u;
  std::vector<double> vals_u;
  for (std::size_t i = 0; i < h.n_a; ++i) {
    rows_u.push_back(i);
    cols_u.push_back(i);
    vals_u.push_back(1.0);
  }
  for (std::size_t k = 0; k < rows_c.size(); ++k) {
    rows_u.push_back(h.n_a + cols_c[k]);
    cols_u.push_back(rows_c[k]);
    vals_u.push_back(-vals_c[k]);
  }
  p.U = SparseMatrix::from_triplets(rows_u, cols_u, vals_u, h.n_rows(), h.n_a);

  std::vector<std::size_t> rows_j, cols_j;
  std::vector<double> vals_j;
  for (std::size_t b = 0; b < h.n_b; ++b) {
    rows_j.push_back(b);
    cols_j.push_back(h.n_a + b);
    vals_j.push_back(1.0);
  }
  p.J = SparseMatrix::from_triplets(rows_j, cols_j, vals_j, h.n_b, h.n_rows());
  return p;
}

Hierarchy hierarchy_from_spec(
    std::span<const std::string> bottom_keys,
    const std::map<std::string, std::vector<std::string>>& metadata_columns,
    const std::string& spec_json) {
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(spec_json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::data, std::string("hierarchy spec: invalid JSON: ") + e.what());
  }
  require(spec.contains("levels") && spec["levels"].is_array(), ErrorCode::data,
          "hierarchy spec: missing 'levels' array");

  std::vector<LevelSpec> specs;
  for (const auto& entry : spec["levels"]) {
    LevelSpec ls;
    ls.name = entry.value("name", "");
    std::vector<std::string> columns;
    if (entry.contains("column")) {
      if (entry["column"].is_array())
        for (const auto& c : entry["column"]) columns.push_back(c.get<std::string>());
      else if (!entry["column"].is_null())
        columns.push_back(entry["column"].get<std::string>());
    }
    if (columns.size() == 1 && columns[0] == "*") columns.clear();
    if (ls.name.empty())
      ls.name = columns.empty() ? "total" : columns[0];

    if (columns.empty()) {
      for (const auto& key : bottom_keys) ls.group_of[key] = "all";
    } else {
      std::vector<const std::vector<std::string>*> resolved;
      for (const auto& c : columns) {
        auto it = metadata_columns.find(c);
        if (it == metadata_columns.end())
          fail(ErrorCode::data, "hierarchy spec: unknown metadata column '" + c + "'");
        require(it->second.size() == bottom_keys.size(), ErrorCode::data,
                "hierarchy spec: metadata column '" + c + "' length mismatch");
        resolved.push_back(&it->second);
      }
      for (std::size_t b = 0; b < bottom_keys.size(); ++b) {
        std::string g;
        for (std::size_t k = 0; k < resolved.size(); ++k) {
          if (k) g += "|";
          g += (*resolved[k])[b];
        }
        ls.group_of[bottom_keys[b]] = g;
      }
    }
    specs.push_back(std::move(ls));
  }
  return build_cross_sectional(bottom_keys, specs);
}

std::string hierarchy_to_json(const Hierarchy& h) {
  nlohmann::json j;
  j["n_bottom"] = h.n_b;
  j["bottom_keys"] = nlohmann::json::array();
  for (std::size_t b = 0; b < h.n_b; ++b) j["bottom_keys"].push_back(h.row_names[h.n_a + b]);
  j["levels"] = nlohmann::json::array();
  const auto off = h.S.row_offsets();
  const auto cols = h.S.col_indices();
  for (std::size_t lv = 0; lv + 1 < h.levels.size(); ++lv) {
    nlohmann::json level;
    level["name"] = h.levels[lv].name;
    level["groups"] = nlohmann::json::array();
    for (std::size_t r = h.levels[lv].begin; r < h.levels[lv].end; ++r) {
      nlohmann::json group;
      const std::string& rn = h.row_names[r];
      group["name"] = rn.substr(rn.find(':') + 1);
      group["members"] = nlohmann::json::array();
      for (std::size_t p = off[r]; p < off[r + 1]; ++p) group["members"].push_back(cols[p]);
      level["groups"].push_back(group);
    }
    j["levels"].push_back(level);
  }
  return j.dump(2);
}

Hierarchy hierarchy_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::data, std::string("hierarchy file: invalid JSON: ") + e.what());
  }
  require(j.contains("n_bottom"), ErrorCode::data, "hierarchy file: missing n_bottom");
  const std::size_t n_b = j["n_bottom"].get<std::size_t>();
  std::vector<std::string> bottom_names;
  if (j.contains("bottom_keys"))
    for (const auto& k : j["bottom_keys"]) bottom_names.push_back(k.get<std::string>());
  if (bottom_names.size() != n_b) {
    bottom_names.resize(n_b);
    for (std::size_t b = 0; b < n_b; ++b) bottom_names[b] = "bottom:" + std::to_string(b);
  }

  std::vector<std::string> level_names;
  std::vector<std::vector<std::string>> group_names;
  std::vector<std::vector<std::vector<std::size_t>>> members;
  for (const auto& level : j.value("levels", nlohmann::json::array())) {
    level_names.push_back(level.value("name", "level"));
    group_names.emplace_back();
    members.emplace_back();
    for (const auto& group : level.value("groups", nlohmann::json::array())) {
      group_names.back().push_back(group.value("name", ""));
      members.back().emplace_back();
      for (const auto& m : group["members"]) {
        const std::size_t b = m.get<std::size_t>();
        require(b < n_b, ErrorCode::data, "hierarchy file: member index out of range");
        members.back().back().push_back(b);
      }
    }
  }
  return assemble(n_b, bottom_names, level_names, group_names, members);
}

void save_hierarchy(const Hierarchy& h, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << hierarchy_to_json(h) << "\n";
}

Hierarchy load_hierarchy(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open hierarchy file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return hierarchy_from_json(buf.str());
}

}  // namespace hicast

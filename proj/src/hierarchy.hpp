#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dates.hpp"
#include "linalg.hpp"

namespace hicast {

// One aggregation level: maps every bottom key to the group it belongs to.
struct LevelSpec {
  std::string name;
  std::map<std::string, std::string> group_of;
};

struct LevelRange {
  std::string name;
  std::size_t begin = 0;  // row range [begin, end) within S
  std::size_t end = 0;
};

// Summing matrix plus the metadata the loss and reconcilers need. Rows are
// ordered aggregate levels first (in spec order, groups by first appearance
// of their bottom keys), bottom identity rows last, so S^T = [C^T I].
struct Hierarchy {
  SparseMatrix S;                 // n x n_b, entries in {0,1}
  std::vector<LevelRange> levels; // includes the bottom level as last entry
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t n_levels = 1;       // l, counts the bottom level
  std::vector<double> d;          // l * row_sums(S), length n
  std::vector<std::string> row_names;

  std::size_t n_rows() const { return n_a + n_b; }

  // S = I, l = 1: no aggregation at all.
  static Hierarchy trivial(std::size_t n_b);
};

Hierarchy build_cross_sectional(std::span<const std::string> bottom_keys,
                                std::span<const LevelSpec> level_specs);

enum class TemporalFrequency { week, month, year, all };
TemporalFrequency parse_frequency(const std::string& name);
std::string frequency_name(TemporalFrequency f);

Hierarchy build_temporal(std::span<const Date> days,
                         std::span<const TemporalFrequency> frequencies);

// Draws level count ~ U{1..max_levels} and per-level category count
// ~ U{1..max_categories}; every bottom series lands in a uniform random
// category. Deterministic per seed; empty categories are dropped.
Hierarchy sample_random_hierarchy(std::size_t n_b, int max_levels,
                                  int max_categories, std::uint64_t seed);

// S^T = [C^T I], J = [0 I], U^T = [I -C].
struct Partition {
  SparseMatrix C;  // n_a x n_b
  SparseMatrix U;  // n x n_a
  SparseMatrix J;  // n_b x n
};
Partition partition(const Hierarchy& h);

// Declarative spec ({"levels":[{"name":..,"column":..}...]}) resolved against
// metadata columns. A level without "column" (or with column "*") is the
// all-in-one total; "column" may be a list, whose values are crossed.
Hierarchy hierarchy_from_spec(
    std::span<const std::string> bottom_keys,
    const std::map<std::string, std::vector<std::string>>& metadata_columns,
    const std::string& spec_json);

std::string hierarchy_to_json(const Hierarchy& h);
Hierarchy hierarchy_from_json(const std::string& json_text);
void save_hierarchy(const Hierarchy& h, const std::string& path);
Hierarchy load_hierarchy(const std::string& path);

}  // namespace hicast

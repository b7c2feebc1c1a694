#include <doctest.h>

#include <random>

#include "common.hpp"
#include "dates.hpp"
#include "hierarchy.hpp"
#include "test_util.hpp"

using namespace hicast;
using test_util::dense_from;
using test_util::random_dense;

namespace {

std::vector<double> column_sums(const SparseMatrix& s) {
  std::vector<double> sums(s.n_cols(), 0.0);
  const auto cols = s.col_indices();
  const auto vals = s.values();
  for (std::size_t p = 0; p < s.nnz(); ++p) sums[cols[p]] += vals[p];
  return sums;
}

// Structural invariants every built hierarchy must satisfy.
void check_hierarchy_invariants(const Hierarchy& h) {
  REQUIRE(h.S.n_rows() == h.n_a + h.n_b);
  REQUIRE(h.S.n_cols() == h.n_b);
  // Bottom block is the identity.
  DenseMatrix dense = to_dense(h.S);
  for (std::size_t b = 0; b < h.n_b; ++b)
    for (std::size_t j = 0; j < h.n_b; ++j)
      CHECK(dense(h.n_a + b, j) == (b == j ? 1.0 : 0.0));
  // Every column sums to the level count.
  for (double cs : column_sums(h.S))
    CHECK(cs == static_cast<double>(h.n_levels));
  // d = l * row_sums(S), entries >= l, bottom entries exactly l.
  std::vector<double> rs = row_sums(h.S);
  for (std::size_t i = 0; i < h.n_rows(); ++i) {
    CHECK(h.d[i] == static_cast<double>(h.n_levels) * rs[i]);
    CHECK(h.d[i] >= static_cast<double>(h.n_levels));
  }
  for (std::size_t b = 0; b < h.n_b; ++b)
    CHECK(h.d[h.n_a + b] == static_cast<double>(h.n_levels));
  // U^T S = 0 exactly.
  Partition p = partition(h);
  SparseMatrix ut_s = spmm(transpose(p.U), h.S);
  CHECK(ut_s.nnz() == 0);
}

LevelSpec total_level(std::span<const std::string> keys) {
  LevelSpec spec;
  spec.name = "total";
  for (const auto& k : keys) spec.group_of[k] = "all";
  return spec;
}

}  // namespace

TEST_CASE("build_cross_sectional toy hierarchy") {
  std::vector<std::string> keys{"a", "b"};
  std::vector<LevelSpec> specs{total_level(keys)};
  Hierarchy h = build_cross_sectional(keys, specs);
  CHECK(h.n_levels == 2);
  CHECK(h.n_a == 1);
  CHECK(h.n_b == 2);
  CHECK(max_abs_diff(to_dense(h.S), dense_from({{1, 1}, {1, 0}, {0, 1}})) == 0.0);
  CHECK(h.d == std::vector<double>{4, 2, 2});
  check_hierarchy_invariants(h);
}

TEST_CASE("build_cross_sectional with zero levels degenerates to the identity") {
  std::vector<std::string> keys{"a", "b"};
  Hierarchy h = build_cross_sectional(keys, {});
  CHECK(h.n_levels == 1);
  CHECK(h.n_a == 0);
  CHECK(h.S == SparseMatrix::identity(2));
  CHECK(h.d == std::vector<double>{1, 1});
  check_hierarchy_invariants(h);
}

TEST_CASE("build_cross_sectional two-level example") {
  std::vector<std::string> keys{"s1", "s2", "s3", "s4"};
  LevelSpec pairs;
  pairs.name = "pair";
  pairs.group_of = {{"s1", "A"}, {"s2", "A"}, {"s3", "B"}, {"s4", "B"}};
  std::vector<LevelSpec> specs{total_level(keys), pairs};
  Hierarchy h = build_cross_sectional(keys, specs);
  CHECK(h.n_rows() == 7);
  CHECK(h.n_levels == 3);
  for (double cs : column_sums(h.S)) CHECK(cs == 3.0);
  CHECK(h.d == std::vector<double>{12, 6, 6, 3, 3, 3, 3});
  check_hierarchy_invariants(h);
}

TEST_CASE("build_cross_sectional reports the missing key and level") {
  std::vector<std::string> keys{"a", "b"};
  LevelSpec spec;
  spec.name = "store";
  spec.group_of = {{"a", "g"}};
  std::vector<LevelSpec> specs{spec};
  try {
    (void)build_cross_sectional(keys, specs);
    FAIL("expected an error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("store") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
  }
}

TEST_CASE("build_temporal") {
  SUBCASE("two steps with the all frequency is the toy matrix") {
    std::vector<Date> days{date_from_civil(2020, 1, 1), date_from_civil(2020, 1, 2)};
    std::vector<TemporalFrequency> freqs{TemporalFrequency::all};
    Hierarchy h = build_temporal(days, freqs);
    CHECK(max_abs_diff(to_dense(h.S), dense_from({{1, 1}, {1, 0}, {0, 1}})) == 0.0);
    CHECK(h.n_levels == 2);
    check_hierarchy_invariants(h);
  }
  SUBCASE("14 aligned days bucket into two full weeks") {
    // 2016-01-04 is a Monday.
    std::vector<Date> days;
    for (int t = 0; t < 14; ++t) days.push_back(date_from_civil(2016, 1, 4) + t);
    REQUIRE(day_of_week(days[0]) == 0);
    std::vector<TemporalFrequency> freqs{TemporalFrequency::week};
    Hierarchy h = build_temporal(days, freqs);
    CHECK(h.n_a == 2);
    std::vector<double> rs = row_sums(h.S);
    CHECK(rs[0] == 7.0);
    CHECK(rs[1] == 7.0);
    check_hierarchy_invariants(h);
  }
  SUBCASE("partial edge weeks stay in as smaller buckets") {
    // Start on a Wednesday; 10 days split 5 + 5 across the Monday boundary.
    std::vector<Date> days;
    for (int t = 0; t < 10; ++t) days.push_back(date_from_civil(2016, 1, 6) + t);
    REQUIRE(day_of_week(days[0]) == 2);
    std::vector<TemporalFrequency> freqs{TemporalFrequency::week};
    Hierarchy h = build_temporal(days, freqs);
    CHECK(h.n_a == 2);
    std::vector<double> rs = row_sums(h.S);
    CHECK(rs[0] == 5.0);
    CHECK(rs[1] == 5.0);
    check_hierarchy_invariants(h);
  }
  SUBCASE("zero frequencies give the identity") {
    std::vector<Date> days{date_from_civil(2020, 1, 1), date_from_civil(2020, 1, 2)};
    Hierarchy h = build_temporal(days, {});
    CHECK(h.S == SparseMatrix::identity(2));
    CHECK(h.d == std::vector<double>{1, 1});
  }
  SUBCASE("duplicate dates are rejected") {
    std::vector<Date> days{date_from_civil(2020, 1, 1), date_from_civil(2020, 1, 1)};
    std::vector<TemporalFrequency> freqs{TemporalFrequency::all};
    CHECK_THROWS_AS((void)build_temporal(days, freqs), Error);
  }
}

TEST_CASE("sample_random_hierarchy") {
  SUBCASE("forced single level and category reproduces the toy matrix") {
    Hierarchy h = sample_random_hierarchy(2, 1, 1, 123);
    CHECK(max_abs_diff(to_dense(h.S), dense_from({{1, 1}, {1, 0}, {0, 1}})) == 0.0);
  }
  SUBCASE("identical seeds give identical matrices") {
    Hierarchy a = sample_random_hierarchy(20, 5, 8, 99);
    Hierarchy b = sample_random_hierarchy(20, 5, 8, 99);
    CHECK(a.S == b.S);
    Hierarchy c = sample_random_hierarchy(20, 5, 8, 100);
    CHECK(a.n_levels >= 1);
    (void)c;
  }
  SUBCASE("structural invariants hold at M5 scale with default caps") {
    Hierarchy h = sample_random_hierarchy(3049, 10, 100, 7);
    std::vector<double> cs = column_sums(h.S);
    for (double v : cs) CHECK(v == static_cast<double>(h.n_levels));
  }
  SUBCASE("invariants hold across many seeds") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Hierarchy h = sample_random_hierarchy(2 + seed % 11, 4, 6, seed);
      std::vector<double> cs = column_sums(h.S);
      for (double v : cs) REQUIRE(v == static_cast<double>(h.n_levels));
      std::vector<double> rs = row_sums(h.S);
      for (std::size_t i = 0; i < h.n_rows(); ++i)
        REQUIRE(h.d[i] == static_cast<double>(h.n_levels) * rs[i]);
      Partition p = partition(h);
      REQUIRE(spmm(transpose(p.U), h.S).nnz() == 0);
    }
  }
}

TEST_CASE("partition") {
  SUBCASE("toy hierarchy") {
    std::vector<std::string> keys{"a", "b"};
    std::vector<LevelSpec> specs{total_level(keys)};
    Hierarchy h = build_cross_sectional(keys, specs);
    Partition p = partition(h);
    CHECK(max_abs_diff(to_dense(p.C), dense_from({{1, 1}})) == 0.0);
    CHECK(max_abs_diff(to_dense(transpose(p.U)), dense_from({{1, -1, -1}})) == 0.0);
    CHECK(max_abs_diff(to_dense(p.J), dense_from({{0, 1, 0}, {0, 0, 1}})) == 0.0);
  }
  SUBCASE("identity hierarchy has empty C and U") {
    Hierarchy h = Hierarchy::trivial(3);
    Partition p = partition(h);
    CHECK(p.C.n_rows() == 0);
    CHECK(p.U.n_cols() == 0);
    CHECK(p.J == SparseMatrix::identity(3));
  }
  SUBCASE("7x4 example") {
    std::vector<std::string> keys{"s1", "s2", "s3", "s4"};
    LevelSpec pairs;
    pairs.name = "pair";
    pairs.group_of = {{"s1", "A"}, {"s2", "A"}, {"s3", "B"}, {"s4", "B"}};
    std::vector<LevelSpec> specs{total_level(keys), pairs};
    Partition p = partition(build_cross_sectional(keys, specs));
    CHECK(max_abs_diff(to_dense(p.C),
                       dense_from({{1, 1, 1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}})) == 0.0);
  }
}

TEST_CASE("aggregates reproduce brute-force member sums") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n_b = 2 + rng() % 9;
    Hierarchy h = sample_random_hierarchy(n_b, 3, 4, rng());
    DenseMatrix truth = random_dense(rng, n_b, 1);
    DenseMatrix agg = spmm(h.S, truth);
    DenseMatrix dense = to_dense(h.S);
    for (std::size_t i = 0; i < h.n_rows(); ++i) {
      double expected = 0.0;
      for (std::size_t b = 0; b < n_b; ++b)
        if (dense(i, b) != 0.0) expected += truth(b, 0);
      CHECK(agg(i, 0) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("duplicate identical levels double-count in d") {
  std::vector<std::string> keys{"a", "b"};
  std::vector<LevelSpec> specs{total_level(keys), total_level(keys)};
  Hierarchy h = build_cross_sectional(keys, specs);
  CHECK(h.n_levels == 3);
  CHECK(h.d == std::vector<double>{6, 6, 3, 3});
}

TEST_CASE("hierarchy spec JSON resolves metadata columns") {
  std::vector<std::string> keys{"p1", "p2", "p3", "p4"};
  std::map<std::string, std::vector<std::string>> meta{
      {"store", {"s1", "s1", "s2", "s2"}},
      {"state", {"CA", "CA", "CA", "TX"}},
  };
  SUBCASE("total plus one column") {
    Hierarchy h = hierarchy_from_spec(
        keys, meta, R"({"levels":[{"name":"total"},{"name":"store","column":"store"}]})");
    CHECK(h.n_levels == 3);
    CHECK(h.n_a == 3);  // total + two stores
    check_hierarchy_invariants(h);
  }
  SUBCASE("crossed columns") {
    Hierarchy h = hierarchy_from_spec(
        keys, meta, R"({"levels":[{"name":"sxs","column":["state","store"]}]})");
    CHECK(h.n_a == 3);  // CA|s1, CA|s2, TX|s2
    CHECK(h.row_names[0] == "sxs:CA|s1");
  }
  SUBCASE("unknown column is a data error") {
    CHECK_THROWS_AS((void)hierarchy_from_spec(
                        keys, meta, R"({"levels":[{"column":"nope"}]})"),
                    Error);
  }
}

TEST_CASE("date utilities") {
  SUBCASE("civil round trip across four years") {
    Date d = date_from_civil(2015, 12, 28);
    for (int i = 0; i < 1500; ++i) {
      CivilDate c = civil_from_date(d);
      CHECK(date_from_civil(c.year, c.month, c.day) == d);
      d = d + 1;
    }
  }
  SUBCASE("known anchors") {
    CHECK(day_of_week(date_from_civil(2016, 1, 4)) == 0);   // a Monday
    CHECK(day_of_week(date_from_civil(1970, 1, 1)) == 3);   // a Thursday
    CHECK(month_of_year(date_from_civil(2020, 2, 29)) == 2);
    CHECK(day_of_month(date_from_civil(2020, 2, 29)) == 29);
    CHECK(week_of_year(date_from_civil(2016, 1, 4)) == 1);
    CHECK(week_of_year(date_from_civil(2016, 1, 1)) == 53);  // ISO week of 2015
    CHECK(format_date(parse_date("2019-07-09")) == "2019-07-09");
    CHECK_THROWS_AS((void)parse_date("not-a-date"), Error);
  }
}

TEST_CASE("hierarchy JSON round trip") {
  Hierarchy h = sample_random_hierarchy(15, 4, 5, 21);
  Hierarchy back = hierarchy_from_json(hierarchy_to_json(h));
  CHECK(back.S == h.S);
  CHECK(back.d == h.d);
  CHECK(back.n_levels == h.n_levels);
  CHECK(back.row_names == h.row_names);
}

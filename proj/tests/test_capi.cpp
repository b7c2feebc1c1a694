// Exercises the shared library strictly through the public C header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hicast.h"

namespace {

std::string work_dir() {
  auto dir = std::filesystem::temp_directory_path() / "hicast_capi_tests";
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string write_file(const std::string& name, const std::string& content) {
  std::string path = work_dir() + "/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

hicast_panel* toy_panel() {
  std::string path = write_file("toy_panel.csv",
                                "series_id,date,target\n"
                                "a,2020-01-01,1\n"
                                "a,2020-01-02,2\n"
                                "b,2020-01-01,3\n"
                                "b,2020-01-02,4\n");
  hicast_panel* p = nullptr;
  REQUIRE(hicast_panel_load_csv(path.c_str(), nullptr, &p) == HICAST_OK);
  return p;
}

}  // namespace

TEST_CASE("version and error strings") {
  CHECK(std::strlen(hicast_version()) > 0);
  hicast_panel* p = nullptr;
  CHECK(hicast_panel_load_csv(nullptr, nullptr, &p) == HICAST_EINVAL);
  CHECK(std::strlen(hicast_last_error()) > 0);
}

TEST_CASE("panel lifecycle through the C surface") {
  hicast_panel* p = nullptr;
  const char* cfg = R"({"n_series":12,"n_days":60,"levels":[3],"zero_fraction":0.3,"seed":4})";
  REQUIRE(hicast_panel_synth(cfg, &p) == HICAST_OK);
  size_t n_series = 0, n_days = 0;
  CHECK(hicast_panel_info(p, &n_series, &n_days) == HICAST_OK);
  CHECK(n_series == 12);
  CHECK(n_days == 60);

  std::string data = work_dir() + "/synth_panel.csv";
  std::string meta = work_dir() + "/synth_meta.csv";
  REQUIRE(hicast_panel_write_csv(p, data.c_str(), meta.c_str()) == HICAST_OK);
  hicast_panel* back = nullptr;
  REQUIRE(hicast_panel_load_csv(data.c_str(), meta.c_str(), &back) == HICAST_OK);
  size_t ns2 = 0, nd2 = 0;
  hicast_panel_info(back, &ns2, &nd2);
  CHECK(ns2 == n_series);
  CHECK(nd2 == n_days);
  hicast_panel_free(back);
  hicast_panel_free(p);
}

TEST_CASE("data errors carry the data status") {
  std::string dup = write_file("dup.csv",
                               "series_id,date,target\n"
                               "a,2020-01-01,1\n"
                               "a,2020-01-01,2\n");
  hicast_panel* p = nullptr;
  CHECK(hicast_panel_load_csv(dup.c_str(), nullptr, &p) == HICAST_EDATA);
  CHECK(hicast_panel_load_csv("/nonexistent/x.csv", nullptr, &p) == HICAST_EIO);
}

TEST_CASE("hierarchy build, info and persistence") {
  hicast_panel* p = toy_panel();
  hicast_hierarchy* h = nullptr;
  REQUIRE(hicast_hierarchy_build(p, R"({"levels":[{"name":"total"}]})", &h) ==
          HICAST_OK);
  size_t n_rows = 0, n_bottom = 0, n_levels = 0;
  CHECK(hicast_hierarchy_info(h, &n_rows, &n_bottom, &n_levels) == HICAST_OK);
  CHECK(n_rows == 3);
  CHECK(n_bottom == 2);
  CHECK(n_levels == 2);
  double sp = 0.0;
  CHECK(hicast_hierarchy_sparsity(h, &sp) == HICAST_OK);
  CHECK(sp == doctest::Approx(1.0 / 3.0));

  std::string path = work_dir() + "/h.json";
  REQUIRE(hicast_hierarchy_save(h, path.c_str()) == HICAST_OK);
  hicast_hierarchy* back = nullptr;
  REQUIRE(hicast_hierarchy_load(path.c_str(), &back) == HICAST_OK);
  size_t rows2 = 0;
  hicast_hierarchy_info(back, &rows2, nullptr, nullptr);
  CHECK(rows2 == 3);
  hicast_hierarchy_free(back);
  hicast_hierarchy_free(h);
  hicast_panel_free(p);
}

TEST_CASE("hierarchical loss context reproduces the worked example") {
  hicast_panel* p = toy_panel();
  hicast_hierarchy* cs = nullptr;
  hicast_hierarchy* te = nullptr;
  REQUIRE(hicast_hierarchy_build(p, R"({"levels":[{"name":"total"}]})", &cs) ==
          HICAST_OK);
  REQUIRE(hicast_hierarchy_temporal(p, "all", &te) == HICAST_OK);

  const unsigned rows[] = {0, 0, 1, 1};
  const unsigned cols[] = {0, 1, 0, 1};
  hicast_context* ctx = nullptr;
  REQUIRE(hicast_context_create(cs, te, rows, cols, 4, 2, &ctx) == HICAST_OK);

  const double preds[] = {1, 0, 0, 0};
  const double targets[] = {0, 0, 0, 0};
  double grad[4], hess[4];
  REQUIRE(hicast_hloss_objective(ctx, preds, targets, 4, grad, hess) == HICAST_OK);
  CHECK(grad[0] == 9.0 / 16.0);
  CHECK(grad[1] == 3.0 / 16.0);
  CHECK(grad[2] == 3.0 / 16.0);
  CHECK(grad[3] == 1.0 / 16.0);
  for (double hv : hess) CHECK(hv == 9.0 / 16.0);

  double value = 0.0;
  REQUIRE(hicast_hloss_metric(ctx, preds, targets, 4, &value) == HICAST_OK);
  CHECK(value == 9.0 / 32.0);

  CHECK(hicast_hloss_objective(nullptr, preds, targets, 4, grad, hess) ==
        HICAST_EINVAL);
  hicast_context_free(ctx);
  hicast_hierarchy_free(cs);
  hicast_hierarchy_free(te);
  hicast_panel_free(p);
}

TEST_CASE("train, forecast, evaluate and scenario round trip") {
  hicast_panel* p = nullptr;
  const char* synth_cfg =
      R"({"n_series":24,"n_days":200,"levels":[4],"zero_fraction":0.3,"seed":11})";
  REQUIRE(hicast_panel_synth(synth_cfg, &p) == HICAST_OK);
  hicast_hierarchy* h = nullptr;
  REQUIRE(hicast_hierarchy_build(
              p, R"({"levels":[{"name":"total"},{"name":"level1","column":"level1"}]})",
              &h) == HICAST_OK);

  const std::string out = work_dir() + "/train_out";
  const char* train_cfg = R"({
    "scenario":"bottom-up","objective":"hl","metric":"hl",
    "valid_days":14,"test_days":7,"seed":3,
    "train":{"n_estimators":8,"num_leaves":8,"min_child_samples":5,
             "learning_rate":0.2,"early_stopping_rounds":0}})";
  size_t n_models = 0;
  REQUIRE(hicast_train(p, h, train_cfg, out.c_str(), &n_models) == HICAST_OK);
  CHECK(n_models == 1);
  CHECK(std::filesystem::exists(out + "/model_bottom.json"));
  CHECK(std::filesystem::exists(out + "/train_log.csv"));

  const std::string fc = out + "/forecast.csv";
  REQUIRE(hicast_forecast(p, h, (out + "/model_bottom.json").c_str(),
                          R"({"horizon":7})", fc.c_str()) == HICAST_OK);
  CHECK(std::filesystem::exists(fc));

  char table[8192];
  REQUIRE(hicast_evaluate(p, h, fc.c_str(), nullptr, (out + "/report.csv").c_str(),
                          table, sizeof(table)) == HICAST_OK);
  CHECK(std::string(table).find("all_series") != std::string::npos);

  // Evaluating a run against its own report pins the relative columns at 1.
  char report_csv[16384];
  const char* scenario_cfg = R"({
    "scenario":"bottom-up","objective":"sl","metric":"sl",
    "horizon":7,"valid_days":14,"test_days":7,"seed":3,
    "train":{"n_estimators":6,"num_leaves":8,"min_child_samples":5,
             "learning_rate":0.2,"early_stopping_rounds":0}})";
  REQUIRE(hicast_run_scenario(p, h, scenario_cfg, (out + "/run1").c_str(), nullptr,
                              report_csv, sizeof(report_csv)) == HICAST_OK);
  REQUIRE(hicast_run_scenario(p, h, scenario_cfg, (out + "/run2").c_str(),
                              (out + "/run1/report.csv").c_str(), report_csv,
                              sizeof(report_csv)) == HICAST_OK);
  std::string report(report_csv);
  CHECK(report.find(",1,") != std::string::npos);  // rel columns exactly 1

  // Deterministic reruns: identical forecast files.
  std::ifstream f1(out + "/run1/forecast.csv"), f2(out + "/run2/forecast.csv");
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);

  // Invalid grid combinations surface as EINVAL.
  const char* bad_cfg = R"({"scenario":"global","objective":"hl","reconciliation":"ols"})";
  CHECK(hicast_run_scenario(p, h, bad_cfg, nullptr, nullptr, nullptr, 0) ==
        HICAST_EINVAL);

  // Multi-seed protocol: mean report with per-seed artifacts.
  const char* seeds_cfg = R"({
    "scenario":"bottom-up","objective":"sl","metric":"sl",
    "horizon":7,"valid_days":14,"test_days":7,"seeds":[0,1],
    "train":{"n_estimators":4,"num_leaves":8,"min_child_samples":5,
             "learning_rate":0.2,"early_stopping_rounds":0,
             "bagging_fraction":0.7}})";
  REQUIRE(hicast_run_scenario(p, h, seeds_cfg, (out + "/multi").c_str(), nullptr,
                              report_csv, sizeof(report_csv)) == HICAST_OK);
  CHECK(std::filesystem::exists(out + "/multi/report.csv"));
  CHECK(std::filesystem::exists(out + "/multi/seed0/forecast.csv"));
  CHECK(std::filesystem::exists(out + "/multi/seed1/report.csv"));

  hicast_hierarchy_free(h);
  hicast_panel_free(p);
}

TEST_CASE("gappy forecast files are rejected") {
  hicast_panel* p = toy_panel();
  hicast_hierarchy* h = nullptr;
  REQUIRE(hicast_hierarchy_build(p, R"({"levels":[{"name":"total"}]})", &h) ==
          HICAST_OK);
  std::string gappy = write_file("gappy_forecast.csv",
                                 "series_id,step,value\n"
                                 "a,1,1.0\n"
                                 "a,2,1.0\n"
                                 "b,1,2.0\n");  // b is missing step 2
  CHECK(hicast_evaluate(p, h, gappy.c_str(), nullptr, nullptr, nullptr, 0) ==
        HICAST_EDATA);
  CHECK(std::string(hicast_last_error()).find("missing forecast steps") !=
        std::string::npos);
  hicast_hierarchy_free(h);
  hicast_panel_free(p);
}

TEST_CASE("reconciler through the C surface") {
  hicast_panel* p = toy_panel();
  hicast_hierarchy* h = nullptr;
  REQUIRE(hicast_hierarchy_build(p, R"({"levels":[{"name":"total"}]})", &h) ==
          HICAST_OK);

  hicast_reconciler* r = nullptr;
  REQUIRE(hicast_reconciler_fit(h, "ols", nullptr, &r) == HICAST_OK);
  const double base[] = {10, 4, 4};
  double fixed[3];
  REQUIRE(hicast_reconcile_apply(r, base, 3, fixed) == HICAST_OK);
  CHECK(fixed[0] == doctest::Approx(28.0 / 3).epsilon(1e-12));
  CHECK(fixed[1] == doctest::Approx(14.0 / 3).epsilon(1e-12));

  std::string path = work_dir() + "/rec.json";
  REQUIRE(hicast_reconciler_save(r, path.c_str()) == HICAST_OK);
  hicast_reconciler* back = nullptr;
  REQUIRE(hicast_reconciler_load(path.c_str(), &back) == HICAST_OK);
  double fixed2[3];
  REQUIRE(hicast_reconcile_apply(back, base, 3, fixed2) == HICAST_OK);
  CHECK(fixed2[0] == fixed[0]);

  CHECK(hicast_reconciler_fit(h, "not-a-method", nullptr, &r) == HICAST_EINVAL);
  CHECK(hicast_reconciler_fit(h, "mint-shrink", nullptr, &r) == HICAST_EINVAL);

  hicast_reconciler_free(back);
  hicast_reconciler_free(r);
  hicast_hierarchy_free(h);
  hicast_panel_free(p);
}

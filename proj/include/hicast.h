/*
 * hicast - hierarchical forecasting core
 *
 * C interface to the shared library. Objects are opaque handles created and
 * destroyed through these functions; every call returns a status code and
 * the per-thread message of the last failure is available through
 * hicast_last_error(). Configuration-heavy entry points take JSON text so
 * the surface stays small and stable.
 */
#ifndef HICAST_H
#define HICAST_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HICAST_API __declspec(dllexport)
#else
#define HICAST_API __attribute__((visibility("default")))
#endif

typedef enum hicast_status {
  HICAST_OK = 0,
  HICAST_ERROR = 1,    /* internal failure */
  HICAST_EINVAL = 2,   /* invalid argument or bad option combination */
  HICAST_EDATA = 3,    /* malformed input data */
  HICAST_ENUMERIC = 4, /* numerical failure (singular system) */
  HICAST_EIO = 5       /* file could not be read or written */
} hicast_status;

typedef struct hicast_panel hicast_panel;
typedef struct hicast_hierarchy hicast_hierarchy;
typedef struct hicast_context hicast_context;
typedef struct hicast_reconciler hicast_reconciler;

HICAST_API const char* hicast_version(void);

/* Message of the most recent failing call on this thread ("" if none). */
HICAST_API const char* hicast_last_error(void);

/* ------------------------------------------------------------------ */
/* Panels                                                              */
/* ------------------------------------------------------------------ */

/* Long-format CSV series_id,date,target[,exog...]; meta_csv may be NULL. */
HICAST_API int hicast_panel_load_csv(const char* data_csv, const char* meta_csv,
                                     hicast_panel** out);

/* M5 competition layout: sales, calendar and price files. */
HICAST_API int hicast_panel_load_m5(const char* sales_csv, const char* calendar_csv,
                                    const char* prices_csv, hicast_panel** out);

/* config JSON: {"n_series":500,"n_days":730,"levels":[10],
 *               "zero_fraction":0.4,"seed":0,"start":"2016-01-04"} */
HICAST_API int hicast_panel_synth(const char* config_json, hicast_panel** out);

HICAST_API int hicast_panel_write_csv(const hicast_panel* panel, const char* data_csv,
                                      const char* meta_csv);
HICAST_API int hicast_panel_info(const hicast_panel* panel, size_t* n_series,
                                 size_t* n_days);
HICAST_API void hicast_panel_free(hicast_panel* panel);

/* ------------------------------------------------------------------ */
/* Hierarchies                                                         */
/* ------------------------------------------------------------------ */

/* spec_json is either a declarative spec {"levels":[{"name":...,
 * "column":...}...]} resolved against the panel metadata, or a materialized
 * hierarchy file produced by hicast_hierarchy_save. */
HICAST_API int hicast_hierarchy_build(const hicast_panel* panel, const char* spec_json,
                                      hicast_hierarchy** out);

/* frequencies: comma-separated list out of week,month,year,all. */
HICAST_API int hicast_hierarchy_temporal(const hicast_panel* panel,
                                         const char* frequencies,
                                         hicast_hierarchy** out);

HICAST_API int hicast_hierarchy_random(size_t n_bottom, int max_levels,
                                       int max_categories, unsigned long long seed,
                                       hicast_hierarchy** out);

HICAST_API int hicast_hierarchy_load(const char* path, hicast_hierarchy** out);
HICAST_API int hicast_hierarchy_save(const hicast_hierarchy* h, const char* path);
HICAST_API int hicast_hierarchy_info(const hicast_hierarchy* h, size_t* n_rows,
                                     size_t* n_bottom, size_t* n_levels);

/* 1 - nnz / (rows * cols) of the summing matrix. */
HICAST_API int hicast_hierarchy_sparsity(const hicast_hierarchy* h, double* out);
HICAST_API void hicast_hierarchy_free(hicast_hierarchy* h);

/* ------------------------------------------------------------------ */
/* Hierarchical loss                                                   */
/* ------------------------------------------------------------------ */

/* Precomputes the scaled summing matrices and the constant second-order
 * derivative. series_rows/time_cols map each flat sample onto the bottom
 * grid; temporal may be NULL for a cross-sectional-only loss. */
HICAST_API int hicast_context_create(const hicast_hierarchy* cross_sectional,
                                     const hicast_hierarchy* temporal,
                                     const unsigned* series_rows,
                                     const unsigned* time_cols, size_t n_samples,
                                     size_t n_time_cols, hicast_context** out);

/* Per-sample gradient and second-order derivative of the hierarchical loss. */
HICAST_API int hicast_hloss_objective(const hicast_context* ctx,
                                      const double* predictions, const double* targets,
                                      size_t n, double* grad_out, double* hess_out);

HICAST_API int hicast_hloss_metric(const hicast_context* ctx, const double* predictions,
                                   const double* targets, size_t n, double* value_out);
HICAST_API void hicast_context_free(hicast_context* ctx);

/* ------------------------------------------------------------------ */
/* Training and forecasting                                            */
/* ------------------------------------------------------------------ */

/* config JSON mirrors the run configuration (scenario, objective, metric,
 * reconciliation, horizon, valid_days, test_days, seed, train {...}).
 * Writes model_<level>.json files, train_log.csv and, for the scenarios
 * that reconcile, insample.csv into out_dir. */
HICAST_API int hicast_train(const hicast_panel* panel, const hicast_hierarchy* h,
                            const char* config_json, const char* out_dir,
                            size_t* n_models_out);

/* model_path: one model file or a directory of model_*.json. config JSON:
 * {"horizon":28,"future":false}; forecasts start at the panel end minus
 * horizon unless "future" is true. Output CSV: series_id,step,value. */
HICAST_API int hicast_forecast(const hicast_panel* panel, const hicast_hierarchy* h,
                               const char* model_path, const char* config_json,
                               const char* out_csv);

/* kind: "naive" or "seasonal-naive" (with period). */
HICAST_API int hicast_naive_forecast(const hicast_panel* panel, const char* kind,
                                     int period, int horizon, const char* out_csv);

/* End-to-end train/forecast/reconcile/evaluate. Writes report.csv and
 * forecast.csv into out_dir (if not NULL); the report CSV is also copied
 * into report_buf (truncated if needed) when report_buf is not NULL. */
HICAST_API int hicast_run_scenario(const hicast_panel* panel, const hicast_hierarchy* h,
                                   const char* config_json, const char* out_dir,
                                   const char* baseline_report_csv, char* report_buf,
                                   size_t report_buf_len);

/* ------------------------------------------------------------------ */
/* Reconciliation                                                      */
/* ------------------------------------------------------------------ */

/* method: base|bottom-up|ols|wls-struct|wls-var|mint-shrink|erm.
 * insample_csv (row,day,actual,predicted) is required for wls-var,
 * mint-shrink and erm; pass NULL otherwise. */
HICAST_API int hicast_reconciler_fit(const hicast_hierarchy* h, const char* method,
                                     const char* insample_csv, hicast_reconciler** out);

HICAST_API int hicast_reconciler_load(const char* path, hicast_reconciler** out);
HICAST_API int hicast_reconciler_save(const hicast_reconciler* r, const char* path);

/* Shrinkage intensity lambda of a fitted mint-shrink reconciler. */
HICAST_API int hicast_reconciler_shrinkage(const hicast_reconciler* r, double* out);

/* base: one forecast per hierarchy row; out receives the reconciled row
 * vector of the same length. */
HICAST_API int hicast_reconcile_apply(const hicast_reconciler* r, const double* base,
                                      size_t n, double* out);

/* Reconciles a full-hierarchy forecast CSV step by step. */
HICAST_API int hicast_reconcile_csv(const hicast_reconciler* r,
                                    const hicast_hierarchy* h, const char* forecast_csv,
                                    const char* out_csv);
HICAST_API void hicast_reconciler_free(hicast_reconciler* r);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */
/* ------------------------------------------------------------------ */

/* Scores a forecast CSV against the last steps of the panel, per
 * aggregation level. The CSV may cover the bottom series only (they are
 * aggregated first) or every hierarchy row. baseline_report_csv (a prior
 * report.csv) fills the relative columns; table_buf receives the pretty
 * table when not NULL. */
HICAST_API int hicast_evaluate(const hicast_panel* panel, const hicast_hierarchy* h,
                               const char* forecast_csv,
                               const char* baseline_report_csv,
                               const char* out_report_csv, char* table_buf,
                               size_t table_buf_len);

/* ------------------------------------------------------------------ */
/* Benchmarks                                                          */
/* ------------------------------------------------------------------ */

/* config JSON: {"sizes":[100,300,1000,3000],"levels":12,"timesteps":28,
 *               "repetitions":5,"scenarios":true,"reconcile":true,
 *               "plots":true,"seed":0}. Writes bench_*.csv and
 * gradient_scaling.svg into out_dir. */
HICAST_API int hicast_bench(const char* config_json, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* HICAST_H */

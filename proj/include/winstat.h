/*
 * winstat — win statistics for hierarchical composite endpoints.
 *
 * C interface of the shared library. All functions return a status code;
 * on failure winstat_last_error() carries a thread-local message valid
 * until the next library call on the same thread. Strings returned through
 * out-parameters are heap-allocated and must be released with
 * winstat_string_free(); handles with their matching *_free function.
 */

#ifndef WINSTAT_H
#define WINSTAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WINSTAT_API __declspec(dllexport)
#else
#define WINSTAT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum winstat_status {
  WINSTAT_OK = 0,
  WINSTAT_ERR_ARGUMENT = 1,   /* null pointers, bad enum values */
  WINSTAT_ERR_VALIDATION = 2, /* data violates a documented precondition */
  WINSTAT_ERR_PARSE = 3,      /* malformed CSV/JSON input */
  WINSTAT_ERR_IO = 4,         /* filesystem failure */
  WINSTAT_ERR_DOMAIN = 5,     /* mathematical domain violation */
  WINSTAT_ERR_INTERNAL = 6
} winstat_status;

/* Opaque handles. */
typedef struct winstat_hce winstat_hce;
typedef struct winstat_dataset winstat_dataset;

WINSTAT_API const char* winstat_version(void);
WINSTAT_API const char* winstat_last_error(void);
WINSTAT_API void winstat_string_free(char* s);

/* ------------------------------------------------------------------ */
/* HCE definitions (JSON config with components[] and horizon)        */
/* ------------------------------------------------------------------ */

WINSTAT_API winstat_status winstat_hce_parse(const char* json_text,
                                             winstat_hce** out);
WINSTAT_API winstat_status winstat_hce_load(const char* path,
                                            winstat_hce** out);
WINSTAT_API winstat_status winstat_hce_to_json(const winstat_hce* hce,
                                               char** json_text);
WINSTAT_API void winstat_hce_free(winstat_hce* hce);

/* ------------------------------------------------------------------ */
/* Subject datasets (CSV schema: subject_id, arm, stratum,            */
/* followup_time, then <name>_time,<name>_status or <name>_value)     */
/* ------------------------------------------------------------------ */

WINSTAT_API winstat_status winstat_dataset_parse(const char* csv_text,
                                                 const winstat_hce* hce,
                                                 winstat_dataset** out);
WINSTAT_API winstat_status winstat_dataset_load(const char* path,
                                                const winstat_hce* hce,
                                                winstat_dataset** out);
WINSTAT_API void winstat_dataset_free(winstat_dataset* dataset);

/* Validation report as JSON ({"violations": [...], "warnings": [...]}).
 * Returns WINSTAT_OK even when violations exist; inspect the report. */
WINSTAT_API winstat_status winstat_dataset_validate(
    const winstat_dataset* dataset, const char* options_json,
    char** report_json);

/* ------------------------------------------------------------------ */
/* Analysis                                                           */
/* ------------------------------------------------------------------ */

/* options_json keys (all optional):
 *   "treatment_label"  arm label playing treatment (default "1")
 *   "comparator_label" arm label playing comparator (default "0")
 *   "stratified"       bool, add the stratified block
 *   "weight_scheme"    "equal" | "pair-count" | "sample-size"
 *   "permutations"     integer >= 100, add the permutation block
 *   "seed"             permutation seed (default 0)
 *   "threads"          worker threads (default 1)
 *   "stamp"            bool, include a wall-clock timestamp in the manifest
 * Returns the full analysis report as JSON. */
WINSTAT_API winstat_status winstat_analyze(const winstat_dataset* dataset,
                                           const char* options_json,
                                           char** report_json);

/* Pairwise win ratios of every arm label plus circular triples.
 * options_json keys: "threads", "stamp". */
WINSTAT_API winstat_status winstat_transitivity(const winstat_dataset* dataset,
                                                const char* options_json,
                                                char** report_json);

/* Within-subject win statistics over a paired CSV (subject_id,y1,y0). */
WINSTAT_API winstat_status winstat_individual(const char* paired_csv,
                                              char** report_json);

/* ------------------------------------------------------------------ */
/* Closed forms                                                       */
/* ------------------------------------------------------------------ */

WINSTAT_API winstat_status winstat_std_normal_cdf(double x, double* out);

WINSTAT_API winstat_status winstat_theory_normal(double mu_treat,
                                                 double mu_ctrl,
                                                 double sd_treat,
                                                 double sd_ctrl,
                                                 char** report_json);

/* design_json: {"n_measurements", "followup_years", "sigma_s", "sigma_e",
 * "slope_mean_treat", "slope_mean_ctrl"} or explicit "measurement_times". */
WINSTAT_API winstat_status winstat_theory_slope(const char* design_json,
                                                char** report_json);

/* strata_json: {"strata": [{"weight","mu_treat","mu_ctrl","sigma"}, ...]} */
WINSTAT_API winstat_status winstat_theory_strata(const char* strata_json,
                                                 char** report_json);

/* Per-stratum plot data with marginal and pooled rows appended
 * (columns: stratum,weight,mu_treat,mu_ctrl,sigma,theta,win_ratio). */
WINSTAT_API winstat_status winstat_strata_csv(const char* strata_json,
                                              char** csv_text);

/* axis: "slope_sd" | "followup" | "n_measurements". Emits the plot-data
 * CSV (columns x,theta_true,wr_true,theta_lsme,wr_lsme,theta_mc,wr_mc)
 * and a JSON mirror; either out-pointer may be NULL. */
WINSTAT_API winstat_status winstat_sweep(const char* design_json,
                                         const char* axis, const double* grid,
                                         size_t grid_len, char** csv_text,
                                         char** json_text);

/* ------------------------------------------------------------------ */
/* Simulation                                                         */
/* ------------------------------------------------------------------ */

/* scenario_json: {"design": {...}, "n_per_arm", "intercept_mean",
 * "intercept_sd", "event_components": [...], "seed"}.
 * options_json keys: "method" ("lsme" | "mc" | "both", default "lsme"),
 * "replications" (default 1), "threads", "stamp".
 * Returns the Monte Carlo summary with closed-form comparison. */
WINSTAT_API winstat_status winstat_simulate(const char* scenario_json,
                                            const char* options_json,
                                            char** summary_json);

/* One replication's dataset in the subject CSV schema (slopes estimated
 * by "lsme" or "mc"); replication seeds match winstat_simulate. */
WINSTAT_API winstat_status winstat_simulate_dataset(const char* scenario_json,
                                                    uint64_t replication,
                                                    const char* method,
                                                    char** dataset_csv,
                                                    char** hce_json);

#ifdef __cplusplus
}
#endif

#endif /* WINSTAT_H */

#ifndef CQL_H
#define CQL_H

/*
 * C interface to the composite quasi-likelihood regression library.
 *
 * Every function that can fail returns a status code; on failure the
 * thread-local message from cql_last_error() describes what went wrong.
 * Objects come back through out-parameters as opaque handles owned by the
 * caller and released with the matching *_free function. Strings returned
 * through char** are heap copies released with cql_string_free.
 */

#ifdef __cplusplus
extern "C" {
#endif

#define CQL_OK 0
#define CQL_ERR_INVALID 1  /* malformed arguments or input values */
#define CQL_ERR_IO 2       /* unreadable or unwritable files */
#define CQL_ERR_NUMERIC 3  /* a computation could not be completed */
#define CQL_ERR_INTERNAL 4 /* unexpected failure */

typedef struct cql_dataset cql_dataset;
typedef struct cql_fit cql_fit;
typedef struct cql_scenario cql_scenario;
typedef struct cql_table cql_table;

const char* cql_version(void);

/* Message from the most recent failing call on this thread. */
const char* cql_last_error(void);

void cql_string_free(char* s);

/*
 * Dataset: CSV with a header row; `response` names the y column, remaining
 * columns become predictors in header order.
 */
int cql_dataset_load_csv(const char* path, const char* response,
                         cql_dataset** out);
int cql_dataset_parse_csv(const char* text, const char* response,
                          cql_dataset** out);
int cql_dataset_dims(const cql_dataset* d, int* n, int* p);
void cql_dataset_free(cql_dataset* d);

/*
 * Penalized composite fit (initial lasso, data-driven weights, weighted
 * refit). basis: "cqrK" (e.g. "cqr9"), "l1l2", "l1", or "l2". penalty:
 * "scad", "lasso", or "adaptive". lambda: "auto" for cross-validation or a
 * positive number fixing the refit-stage penalty level.
 */
int cql_fit_run(const cql_dataset* d, const char* basis, const char* penalty,
                const char* lambda, unsigned long long seed, int cv_folds,
                cql_fit** out);
int cql_fit_report_json(const cql_fit* f, char** json_out);
void cql_fit_free(cql_fit* f);

/*
 * Diagnostic report of the estimated moment matrix, density weights a, and
 * optimal weights for a dataset. mode: "constrained" or "unconstrained".
 */
int cql_weights_table(const cql_dataset* d, const char* basis, const char* mode,
                      unsigned long long seed, cql_table** out);

/*
 * Population asymptotic-efficiency table. dists: "all" or comma-separated
 * catalog names; methods: "all" or a comma-separated subset of
 * L1,L2,L1-L2+,L1-L2,ECQR,WCQR+,WCQR; k_list: comma-separated quantile
 * counts for the CQR families.
 */
int cql_efficiency_table(const char* dists, const char* methods,
                         const char* k_list, cql_table** out);

/* Population optimal weight pattern on the levels-point quantile grid. */
int cql_weight_pattern_table(const char* dists, int levels, cql_table** out);

int cql_scenario_load(const char* path, cql_scenario** out);
int cql_scenario_parse(const char* json_text, cql_scenario** out);
void cql_scenario_free(cql_scenario* s);

/*
 * Runs the scenario's replication study. summary: one row per method with
 * median model error, mean TP/FP, mean sigma_hat_w, oracle benchmark, and
 * failure counts. per_rep: tidy rows (rep, method, model_error) for
 * plotting. Either out-pointer may be NULL to skip that table.
 */
int cql_simulate_run(const cql_scenario* s, cql_table** summary,
                     cql_table** per_rep);

/* Marginal F-statistic screening; keeps the `keep` strongest columns. */
int cql_screen_table(const cql_dataset* d, int keep, cql_table** out);

/*
 * Tables are rectangular string grids. rows excludes the header. Cell
 * pointers stay valid until the table is freed.
 */
int cql_table_dims(const cql_table* t, int* rows, int* cols);
const char* cql_table_header(const cql_table* t, int col);
const char* cql_table_cell(const cql_table* t, int row, int col);
int cql_table_csv(const cql_table* t, char** csv_out);
int cql_table_write_csv(const cql_table* t, const char* path); /* "-" = stdout */
void cql_table_free(cql_table* t);

#ifdef __cplusplus
}
#endif

#endif /* CQL_H */

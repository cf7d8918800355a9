#ifndef DDESINDY_H
#define DDESINDY_H

/* C interface to the delay-SINDy discovery library.
 *
 * All functions return a dsy_status; on failure dsy_last_error() describes
 * what went wrong (thread-local, valid until the next failing call on the
 * same thread). Strings returned through char** are heap-allocated and must
 * be released with dsy_string_free().
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    DSY_OK = 0,
    DSY_ERR_CONFIG = 1,  /* invalid input or configuration */
    DSY_ERR_NUMERIC = 2  /* integration or linear algebra failure */
} dsy_status;

const char *dsy_last_error(void);
void dsy_string_free(char *s);

/* ---- experiment configuration ------------------------------------------ */

typedef struct dsy_config dsy_config;

/* Newline-separated list of built-in experiment names. */
dsy_status dsy_preset_list(char **out);

dsy_status dsy_config_preset(const char *name, dsy_config **out);
dsy_status dsy_config_parse(const char *json, dsy_config **out);
dsy_status dsy_config_to_json(const dsy_config *config, char **out);

/* mode is one of "bo", "grid", "both". */
dsy_status dsy_config_set_mode(dsy_config *config, const char *mode);
dsy_status dsy_config_set_seed(dsy_config *config, uint64_t seed);
dsy_status dsy_config_set_runs(dsy_config *config, int runs);

void dsy_config_free(dsy_config *config);

/* ---- simulation --------------------------------------------------------- */

/* Integrates a named benchmark system ("logistic", "sir", "mackey_glass",
 * "two_delay_cubic"). params_json is a JSON object of parameter overrides,
 * e.g. {"rho": 1.8, "tau": 1.0}; pass NULL or "{}" for the defaults.
 * Output is CSV: t,x1,...,xn,dx1,...,dxn with one row every `decimate`
 * integration steps. */
dsy_status dsy_simulate(const char *system, const char *params_json,
                        double t_end, double step, int decimate, char **csv_out);

/* ---- discovery ---------------------------------------------------------- */

typedef struct dsy_report dsy_report;

dsy_status dsy_run_experiment(const dsy_config *config, dsy_report **out);

dsy_status dsy_report_parse(const char *json, dsy_report **out);
dsy_status dsy_report_to_json(const dsy_report *report, char **out);
dsy_status dsy_report_summary(const dsy_report *report, char **out);

/* report.json plus per-run evaluation logs and simulated-vs-true CSVs. */
dsy_status dsy_report_write(const dsy_report *report, const char *dir);

void dsy_report_free(dsy_report *report);

/* ---- validation --------------------------------------------------------- */

/* Simulates a fitted model (JSON as produced inside reports) from the first
 * row of the reference CSV and returns the maximum absolute deviation over
 * the window [lo, hi]. */
dsy_status dsy_validate(const char *model_json, const char *data_csv,
                        double lo, double hi, double step, double *max_dev);

#ifdef __cplusplus
}
#endif

#endif /* DDESINDY_H */

#ifndef RAREBAR_H
#define RAREBAR_H

/* C API for the rarebar pricing library. All functions returning strings
 * allocate them with malloc semantics; release with rb_string_free. An
 * experiment handle owns its config text and options; it is not thread-safe,
 * use one handle per thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
  RB_OK = 0,
  RB_ERR_INVALID = 1,  /* bad config, bad argument */
  RB_ERR_RUNTIME = 2   /* estimator or validation failure */
} rb_status;

typedef struct rb_experiment rb_experiment;

/* Takes a JSON config document (not a path). Never fails; errors surface
 * when a run_* function parses the config. */
rb_experiment* rb_experiment_create(const char* config_json);
void rb_experiment_destroy(rb_experiment* exp);

rb_status rb_experiment_set_seed(rb_experiment* exp, uint64_t seed);
rb_status rb_experiment_set_runs(rb_experiment* exp, size_t runs);
rb_status rb_experiment_set_workers(rb_experiment* exp, size_t workers);

/* Override a config leaf by dotted path, e.g. ("model.sigma", "0.4").
 * The value is parsed as JSON; non-JSON text is taken as a string. */
rb_status rb_experiment_set_override(rb_experiment* exp, const char* dotted_path,
                                     const char* value_json);

/* Replicated single-point estimate. out_json receives the full record;
 * out_line (optional, may be NULL) the one-line summary. Non-convergence
 * returns RB_ERR_RUNTIME and still fills out_json with a status record. */
rb_status rb_experiment_run_price(rb_experiment* exp, char** out_json, char** out_line);

/* Sweep over the config's sweep block; out_csv receives the table. */
rb_status rb_experiment_run_sweep(rb_experiment* exp, char** out_csv);

/* CV-ratio comparison of the first two configured methods. */
rb_status rb_experiment_run_compare(rb_experiment* exp, char** out_csv);

/* Message of the last failed call on this handle; owned by the handle. */
const char* rb_experiment_last_error(const rb_experiment* exp);

/* Run the validation suites (NULL or "" = all). out_report (optional)
 * receives one line per suite. RB_OK iff every suite passed. */
rb_status rb_validate(const char* suite, char** out_report);

void rb_string_free(char* s);

/* Static version / build identifier. Do not free. */
const char* rb_version(void);

#ifdef __cplusplus
}
#endif

#endif /* RAREBAR_H */

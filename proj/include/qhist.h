/* qhist.h — C interface to the quantum-histories experiment runner.
 *
 * All entry points are synchronous.  qh_run_experiment loads a JSON config
 * from disk, runs the requested experiment, and writes the table and summary
 * outputs named inside the config; on any failure nothing is written.  Status
 * codes double as process exit codes for the bundled CLI.
 */
#ifndef QHIST_H
#define QHIST_H

#ifdef __cplusplus
extern "C" {
#endif

/* status codes */
#define QH_OK 0             /* run completed, outputs written        */
#define QH_ERR_INTERNAL 1   /* unexpected failure inside the library */
#define QH_ERR_VALIDATION 2 /* malformed config or invalid inputs    */
#define QH_ERR_CAP 3        /* a resource cap (dims, nodes) was hit  */

/* "qhist <version>". Static storage, never freed by the caller. */
const char* qh_version(void);

/* Message for the most recent failure on this thread; empty string after a
 * success. Static storage, invalidated by the next call on this thread. */
const char* qh_last_error(void);

/* One line per experiment kind: "<name>  <summary>\n". Static storage. */
const char* qh_list_experiments(void);

/* Opaque handle describing where a finished run placed its outputs. */
typedef struct qh_run_result qh_run_result;

/* Runs the experiment described by the config file at config_path.  Returns
 * QH_OK and stores a fresh handle in *out (when out is non-null); the caller
 * releases it with qh_run_result_free.  On failure returns one of the QH_ERR
 * codes, leaves *out null, and records a message for qh_last_error. */
int qh_run_experiment(const char* config_path, qh_run_result** out);

/* Paths of the written outputs. Valid until the handle is freed; the empty
 * string when the handle is null. */
const char* qh_run_table_path(const qh_run_result* result);
const char* qh_run_summary_path(const qh_run_result* result);

void qh_run_result_free(qh_run_result* result);

#ifdef __cplusplus
}
#endif

#endif /* QHIST_H */

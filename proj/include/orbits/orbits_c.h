#ifndef ORBITS_C_H
#define ORBITS_C_H

/* C interface to the orbits library.
 *
 * All entry points return a status code (ORBITS_OK on success) and report
 * results as heap-allocated JSON or CSV strings owned by the caller; release
 * them with orbits_string_free. On failure every output pointer is set to
 * NULL and orbits_last_error() describes what went wrong (thread-local).
 *
 * Input and output schemas are documented in FORMATS.md.
 */

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values are stable across releases. */
enum {
    ORBITS_OK = 0,
    ORBITS_ERR_CONFIG = 1,
    ORBITS_ERR_IO = 2,
    ORBITS_ERR_OUTSIDE_ENERGY_SHELL = 10,
    ORBITS_ERR_BRANCH_VIOLATION = 11,
    ORBITS_ERR_MOMENTUM_SOLVE_FAILURE = 12,
    ORBITS_ERR_NEWTON_DIVERGENCE = 13,
    ORBITS_ERR_BVP_NON_CONVERGENCE = 14,
    ORBITS_ERR_STRIP_EXIT = 15,
    ORBITS_ERR_ENERGY_DRIFT_EXCEEDED = 16,
    ORBITS_ERR_NOT_CLOSED = 17,
    ORBITS_ERR_NO_MINIMUM_FOUND = 18,
    ORBITS_ERR_STEP_FAILURE = 19,
    ORBITS_ERR_NON_UNIQUE_MINIMIZER = 20,
    ORBITS_ERR_CRITERION_DISAGREEMENT = 30,
    ORBITS_ERR_AUDIT_MISMATCH = 31,
    ORBITS_ERR_INTERNAL = 99
};

/* Opaque model handle. */
typedef struct orbits_model orbits_model;

/* Parses a model from JSON text / loads one from a file. On success *out
 * owns the model; free it with orbits_model_free. */
int orbits_model_parse(const char* json_text, orbits_model** out);
int orbits_model_load(const char* path, orbits_model** out);
void orbits_model_free(orbits_model* model);

/* Serializes the model back to normalized JSON. */
int orbits_model_dump(const orbits_model* model, char** json_text);

/* Checks positive definiteness of the kinetic metric and coefficient sanity.
 * Returns ORBITS_OK when the model is admissible, ORBITS_ERR_CONFIG when it
 * is not; *report_json is written in both cases. */
int orbits_model_validate(const orbits_model* model, char** report_json);

/* Minimizers of F(x0, E) at one energy plus the hyperbolicity verdict and
 * the monodromy cross-check for each. options_json requires "energy";
 * see FORMATS.md for the full key set. Either output may be NULL when the
 * caller does not need it. */
int orbits_solve(const orbits_model* model, const char* options_json,
                 char** minimizers_json, char** profile_csv);

/* Continuation sweep over [e_start, e_end]: branches, detected crossings of
 * the global minimum, and a per-step summary table. */
int orbits_sweep(const orbits_model* model, const char* options_json,
                 char** branches_json, char** crossings_json,
                 char** summary_csv);

/* Perturbation studies. options_json selects "mode": "kernel",
 * "first_order", "response" or "monte_carlo". */
int orbits_perturb(const orbits_model* model, const char* options_json,
                   char** report_json);

/* Frees a string returned by any of the calls above. NULL is a no-op. */
void orbits_string_free(char* text);

/* Stable name of a status code ("ok", "config", ...). */
const char* orbits_status_name(int status);

/* Process exit code convention for the status: 0 success, 2 config,
 * 3 I/O, 4 solve or property violation, 1 internal. */
int orbits_exit_code(int status);

/* Message of the most recent failure on this thread; empty string if none. */
const char* orbits_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* ORBITS_C_H */

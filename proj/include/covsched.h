/*
 * covsched C API: covariance-driven sensor transmission scheduling for
 * remote Kalman estimation over packet-dropping channels.
 *
 * Usage: create a session, load one JSON experiment config, run commands
 * against it. All functions returning int yield a status code; details are
 * available from covsched_last_message() and the machine-readable report
 * from covsched_last_report_json(). Sessions are not thread-safe; use one
 * session per thread.
 */
#ifndef COVSCHED_H
#define COVSCHED_H

#include <stdint.h>

#if defined(_WIN32)
#  ifdef COVSCHED_BUILD
#    define COVSCHED_API __declspec(dllexport)
#  else
#    define COVSCHED_API __declspec(dllimport)
#  endif
#else
#  define COVSCHED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; nonzero values double as CLI exit codes. */
#define COVSCHED_OK 0
#define COVSCHED_ERR_CONFIG 1       /* usage or config schema error */
#define COVSCHED_ERR_PRECONDITION 2 /* mathematical precondition failed */
#define COVSCHED_ERR_VIOLATION 3    /* an invariant check failed */
#define COVSCHED_ERR_INTERNAL 4

typedef struct covsched_session covsched_session;

COVSCHED_API covsched_session* covsched_session_new(void);
COVSCHED_API void covsched_session_free(covsched_session* session);

/* Parses and validates a config document (strict schema, defaults
 * materialized). Replaces any previously loaded config. */
COVSCHED_API int covsched_load_config(covsched_session* session,
                                      const char* json_text);
COVSCHED_API int covsched_load_config_file(covsched_session* session,
                                           const char* path);

/* Overrides every seed in the loaded config (plant, measurement, channel,
 * table1). Call after loading. */
COVSCHED_API int covsched_set_seed(covsched_session* session, uint64_t seed);

/* command: solve | simulate | verify | tradeoff | table1 | counterexamples.
 * Artifacts are written under out_dir (created if missing). */
COVSCHED_API int covsched_run(covsched_session* session, const char* command,
                              const char* out_dir);

/* Human-readable outcome of the last call; never NULL after a call. */
COVSCHED_API const char* covsched_last_message(const covsched_session* session);

/* JSON report of the last successful run (artifact list plus summary);
 * empty object before the first run. */
COVSCHED_API const char* covsched_last_report_json(const covsched_session* session);

/* Echo of the loaded config with all defaults materialized, or NULL if no
 * config is loaded. */
COVSCHED_API const char* covsched_config_echo_json(const covsched_session* session);

COVSCHED_API const char* covsched_version(void);

#ifdef __cplusplus
}
#endif

#endif /* COVSCHED_H */

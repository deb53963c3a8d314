/* SPDX-License-Identifier: Apache-2.0 */

/* C interface to the protomon runtime-verification library.
 *
 * Objects are opaque handles created by *_new / *_load and released by the
 * matching *_free. Every fallible call returns a pm_status; on failure a
 * description is available from pm_last_error() on the calling thread.
 * Strings returned through char** are heap-allocated and owned by the
 * caller, who releases them with pm_string_free(). */

#ifndef PROTOMON_H
#define PROTOMON_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(PROTOMON_BUILDING)
#define PM_API __declspec(dllexport)
#else
#define PM_API __declspec(dllimport)
#endif
#else
#define PM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pm_status {
  PM_OK = 0,
  PM_ERR_ARGUMENT = 1,     /* null handle, bad option, unknown name */
  PM_ERR_PARSE = 2,        /* spec text is not well formed */
  PM_ERR_INVALID_SPEC = 3, /* spec parses but fails validation */
  PM_ERR_EVENT = 4,        /* malformed event JSON */
  PM_ERR_IO = 5,           /* file or socket could not be used */
  PM_ERR_TRANSPORT = 6,    /* monitor endpoint unreachable or refused */
  PM_ERR_INTERNAL = 99
} pm_status;

typedef enum pm_verdict {
  PM_ACCEPTING = 0,
  PM_CONTINUING = 1,
  PM_VIOLATION = 2
} pm_verdict;

typedef struct pm_spec pm_spec;
typedef struct pm_monitor pm_monitor;
typedef struct pm_service pm_service;

/* Receives one JSON line per served request. */
typedef void (*pm_log_fn)(const char* line, void* user);

PM_API const char* pm_version(void);
PM_API const char* pm_status_name(pm_status status);
PM_API const char* pm_verdict_name(pm_verdict verdict);

/* Message for the last failed call on this thread; "" if none. Valid until
 * the next library call on the same thread. */
PM_API const char* pm_last_error(void);
PM_API void pm_string_free(char* s);

/* Parses and validates spec text. On PM_ERR_PARSE or PM_ERR_INVALID_SPEC the
 * last error holds one "line:col: kind: message" diagnostic per line. */
PM_API pm_status pm_spec_load(const char* text, size_t len, pm_spec** out);
PM_API pm_status pm_spec_load_file(const char* path, pm_spec** out);
PM_API void pm_spec_free(pm_spec* spec);
/* Writes a JSON array of {kind,message,line,column}; "[]" for a valid spec.
 * Returns PM_OK whenever the array was produced. */
PM_API pm_status pm_spec_diagnostics(const char* text, size_t len, char** json_out);
/* Canonical source text of a loaded spec. */
PM_API pm_status pm_spec_to_source(const pm_spec* spec, char** out);

/* The monitor keeps its own reference to the spec; the spec handle may be
 * freed afterwards. */
PM_API pm_status pm_monitor_new(const pm_spec* spec, pm_monitor** out);
PM_API void pm_monitor_free(pm_monitor* monitor);
/* Feeds one JSON event. A violation is a verdict, not an error. Either
 * out-pointer may be null. */
PM_API pm_status pm_monitor_step_json(pm_monitor* monitor, const char* event_json, size_t len,
                                      pm_verdict* verdict, int* relevant);
PM_API pm_status pm_monitor_verdict(const pm_monitor* monitor, pm_verdict* verdict);
PM_API size_t pm_monitor_events_consumed(const pm_monitor* monitor);
/* 1-based index of the first violating event, 0 if none. */
PM_API size_t pm_monitor_first_violation(const pm_monitor* monitor);
/* Event types acceptable instead of the violating event (or next, if no
 * violation), one per line. */
PM_API pm_status pm_monitor_explain(const pm_monitor* monitor, char** out);

PM_API pm_status pm_service_new(pm_service** out);
PM_API void pm_service_free(pm_service* service);
/* Binds host:port (port 0 picks a free port). `log` may be null. */
PM_API pm_status pm_service_bind(pm_service* service, const char* host, int port, pm_log_fn log,
                                 void* log_user, int* bound_port);
/* Serves on a background thread. */
PM_API pm_status pm_service_start(pm_service* service);
/* Serves on the calling thread until pm_service_stop from another thread. */
PM_API pm_status pm_service_run(pm_service* service);
PM_API void pm_service_stop(pm_service* service);

/* Newline-separated names of the shipped scenarios. */
PM_API pm_status pm_sim_scenarios(char** out);
/* Runs a scenario against the monitor service at `endpoint`. Writes the
 * transcript to *transcript_out and the number of warnings to *warnings.
 * `record_path` may be null. */
PM_API pm_status pm_sim_run(const char* scenario, const char* spec_text, size_t spec_len,
                            const char* endpoint, const char* record_path, char** transcript_out,
                            size_t* warnings);

#ifdef __cplusplus
}
#endif

#endif /* PROTOMON_H */

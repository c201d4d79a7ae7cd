/* C interface to the tutoring engine. Every call returns a tutor_status
 * (0 on success, otherwise one of the TUTOR_E_* codes); the message for the
 * last failure on the calling thread is available from tutor_last_error().
 * Strings returned through char** out-parameters are owned by the caller and
 * released with tutor_string_free(). */
#ifndef TUTOR_C_H
#define TUTOR_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TUTOR_API __declspec(dllexport)
#else
#define TUTOR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int tutor_status;

enum {
    TUTOR_OK = 0,
    TUTOR_E_INVALID_MARK = 1,
    TUTOR_E_FAILED_PREREQUISITE = 2,
    TUTOR_E_DUPLICATE_ASSESSMENT = 3,
    TUTOR_E_INSUFFICIENT_DATA = 4,
    TUTOR_E_INVALID_MAPPING = 5,
    TUTOR_E_DUPLICATE_SNIPPET = 6,
    TUTOR_E_INVALID_SNIPPET = 7,
    TUTOR_E_CONFIGURATION = 8,
    TUTOR_E_PROMPT_TOO_LARGE = 9,
    TUTOR_E_TIMEOUT = 10,
    TUTOR_E_BACKEND = 11,
    TUTOR_E_EMPTY_COMPLETION = 12,
    TUTOR_E_BATCH_FAILED = 13,
    TUTOR_E_NO_CANDIDATES = 14,
    TUTOR_E_NO_PROSE = 15,
    TUTOR_E_MISSING_TIER = 16,
    TUTOR_E_INCOMPLETE_REPORT = 17,
    TUTOR_E_IO = 18,
    TUTOR_E_PARSE = 19,
    TUTOR_E_NOT_FOUND = 20,
    TUTOR_E_CONFLICT = 21,
    TUTOR_E_INVALID_ARGUMENT = 22,
    TUTOR_E_INTERNAL = 99
};

enum { TUTOR_TIER_BELOW_AVERAGE = 0, TUTOR_TIER_AVERAGE = 1, TUTOR_TIER_ABOVE_AVERAGE = 2 };

typedef struct tutor_engine tutor_engine;
typedef struct tutor_service tutor_service;

TUTOR_API const char* tutor_last_error(void);
TUTOR_API void tutor_string_free(char* s);

/* config_path and backend_override ("scripted" or "remote") may be NULL. */
TUTOR_API tutor_status tutor_engine_open(const char* config_path, const char* backend_override,
                                         tutor_engine** out);
TUTOR_API void tutor_engine_close(tutor_engine* engine);

TUTOR_API tutor_status tutor_categorize(double mark, int* tier_out);

/* Flesch reading ease of `text` (code excluded) and its band label. */
TUTOR_API tutor_status tutor_fkrs(tutor_engine* engine, const char* text, double* score_out,
                                  char** band_out);

/* Writes the cohort as line-delimited JSON to *jsonl_out. */
TUTOR_API tutor_status tutor_cohort_generate(size_t n, double mean, double std_dev, uint64_t seed,
                                             char** jsonl_out);

/* Runs the plan against the cohort file and exports the report into out_dir
 * (NULL skips export). *report_json_out receives the report as JSON. */
TUTOR_API tutor_status tutor_experiment_run(tutor_engine* engine, const char* plan_path,
                                            const char* cohort_path, const char* out_dir,
                                            char** report_json_out);

TUTOR_API tutor_status tutor_service_create(tutor_engine* engine, tutor_service** out);
TUTOR_API void tutor_service_destroy(tutor_service* service);
/* In-process request; body may be NULL. */
TUTOR_API tutor_status tutor_service_handle(tutor_service* service, const char* method,
                                            const char* path, const char* body, int* status_out,
                                            char** body_out);
/* Blocks serving HTTP until tutor_service_stop is called from another thread. */
TUTOR_API tutor_status tutor_service_serve(tutor_service* service, const char* host, int port);
TUTOR_API void tutor_service_stop(tutor_service* service);

#ifdef __cplusplus
}
#endif

#endif /* TUTOR_C_H */

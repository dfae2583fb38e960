/*
 * Copyright 2026 The trustscreen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef TRUSTSCREEN_H
#define TRUSTSCREEN_H

/*
 * Stable C interface of the trustscreen pipeline.
 *
 * Every call returns a ts_status: TS_OK or an error code. The message of the
 * most recent failure on the calling thread is available from
 * ts_last_error(). Strings handed out through `char**` parameters are owned
 * by the caller and released with ts_string_free(). Summaries are JSON.
 */

#include <stdint.h>

#if defined(_WIN32)
#define TS_API __declspec(dllexport)
#else
#define TS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int ts_status;

enum {
    TS_OK = 0,
    TS_INVALID_ARGUMENT = 10,
    TS_CONFIG_ERROR = 11,
    TS_IO_ERROR = 12,
    TS_MALFORMED_ROW = 20,
    TS_NON_MONOTONIC_TIMESTAMP = 21,
    TS_EMPTY_SERIES = 22,
    TS_PROBABILITY_OUT_OF_RANGE = 23,
    TS_SCORE_OUT_OF_RANGE = 24,
    TS_EMPTY_LEXICON = 25,
    TS_UNKNOWN_SYMBOL = 26,
    TS_MALFORMED_MODEL_FILE = 27,
    TS_CONSTANT_SERIES = 30,
    TS_TOO_SHORT = 31,
    TS_NON_CONVERGENCE = 32,
    TS_NON_STATIONARY_FIT = 33,
    TS_INSUFFICIENT_HISTORY = 34,
    TS_TOO_FEW_POINTS = 35,
    TS_EMPTY_CORPUS = 40,
    TS_PROMPT_TOO_SHORT = 41,
    TS_LENGTH_MISMATCH = 42,
    TS_EMPTY_SCORES = 43,
    TS_SINGLE_CLASS = 44,
    TS_DEGENERATE_FOLD = 45,
    TS_WRONG_DIMENSION = 46,
    TS_NO_LABELS = 50,
    TS_EMPTY_SUBSET = 51,
    TS_INTERNAL = 99
};

/* Opaque pipeline configuration. */
typedef struct ts_config ts_config;

TS_API const char* ts_version(void);

/* Message of the last failure on this thread; "" after a success. */
TS_API const char* ts_last_error(void);

/* Symbolic name such as "ConfigError". */
TS_API const char* ts_status_name(ts_status status);

/* Non-zero for statuses caused by bad user input. */
TS_API int ts_status_is_validation(ts_status status);

TS_API void ts_string_free(char* s);

/* Defaults pointing at `data_dir` (the bundled data directory layout). */
TS_API ts_status ts_config_new(const char* data_dir, ts_config** out);
TS_API void ts_config_free(ts_config* cfg);

/* Applies a `key = value` file; relative paths resolve against its directory. */
TS_API ts_status ts_config_load(ts_config* cfg, const char* path);

/* One assignment; relative paths resolve against the working directory. */
TS_API ts_status ts_config_set(ts_config* cfg, const char* key, const char* value);

TS_API ts_status ts_config_set_seed(ts_config* cfg, uint64_t seed);

/* Full `key = value` dump. */
TS_API ts_status ts_config_dump(const ts_config* cfg, char** text);

/*
 * Stages. Each writes its artifact into the configured output directory and,
 * when `out_path` is non-NULL, copies it there as well.
 */

/* anomalies.jsonl (ARIMA severity or multivariate scores per anomaly.method). */
TS_API ts_status ts_detect(const ts_config* cfg, const char* out_path, char** summary);

/*
 * collection.jsonl plus queries.jsonl. `anomaly_date` (YYYY-MM-DD) retrieves
 * around one date; otherwise the anomalies file at `anomalies_path` (NULL =
 * the output directory's) supplies every day at or above the minimum severity.
 */
TS_API ts_status ts_retrieve(const ts_config* cfg, const char* anomalies_path, const char* anomaly_date,
                             const char* out_path, const char* trace_path, char** summary);

/* assessed.jsonl from a collection (NULL = the output directory's). */
TS_API ts_status ts_assess(const ts_config* cfg, const char* collection_path, const char* out_path,
                           char** summary);

/* Trains the two n-gram detector channels and saves the bundle to `bundle_dir`. */
TS_API ts_status ts_train_detector(const ts_config* cfg, const char* bundle_dir, char** summary);

/* metrics.json and combination_grid.csv from assessed records (NULL = the output directory's). */
TS_API ts_status ts_evaluate(const ts_config* cfg, const char* assessed_path, const char* direction,
                             char** summary);

/* sweep.csv; the summary carries the argmax threshold per metric. */
TS_API ts_status ts_sweep(const ts_config* cfg, const char* assessed_path, const char* out_path, char** summary);

/* detect, retrieve, assess and evaluate in sequence; stage errors name the stage. */
TS_API ts_status ts_run_pipeline(const ts_config* cfg, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* TRUSTSCREEN_H */

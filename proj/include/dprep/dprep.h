//
// Copyright 2026 The dprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPREP_DPREP_H_
#define DPREP_DPREP_H_

/* C interface to the dprep engine. Objects are opaque handles; every
 * fallible call returns a dprep_status and leaves a thread-local message
 * readable through dprep_last_error(). Strings returned through `char**`
 * out-parameters are owned by the caller and released with
 * dprep_string_free(). Configuration is passed as JSON text; the keys are
 * listed in README.md. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(DPREP_BUILDING_LIBRARY)
#define DPREP_API __attribute__((visibility("default")))
#else
#define DPREP_API
#endif

typedef enum dprep_status {
  DPREP_OK = 0,
  DPREP_ERR_INTERNAL = 1,
  DPREP_ERR_INVALID_ARGUMENT = 2,
  DPREP_ERR_BUDGET_EXCEEDED = 3,
  DPREP_ERR_SINGULAR_FIT = 4,
  DPREP_ERR_DATA = 5,
  DPREP_ERR_IO = 6,
  DPREP_ERR_DEGENERATE_INTERVAL = 7
} dprep_status;

typedef struct dprep_dataset dprep_dataset;
typedef struct dprep_ledger dprep_ledger;

DPREP_API const char* dprep_version(void);
DPREP_API const char* dprep_status_name(dprep_status status);
/* Message for the last failing call on this thread; "" if none. */
DPREP_API const char* dprep_last_error(void);
DPREP_API void dprep_string_free(char* s);

/* Operational warnings (for example uncapped releases) go to stderr unless
 * a callback is installed. Pass NULL to restore stderr. */
typedef void (*dprep_warning_fn)(const char* message, void* user);
DPREP_API void dprep_set_warning_callback(dprep_warning_fn fn, void* user);

/* Delimited text with a header row. `schema_path` may be NULL, in which
 * case every column is numeric. */
DPREP_API dprep_status dprep_dataset_load(const char* path, const char* schema_path,
                                          char delimiter, dprep_dataset** out);
DPREP_API dprep_status dprep_dataset_from_text(const char* text, const char* schema_text,
                                               char delimiter, dprep_dataset** out);
DPREP_API void dprep_dataset_free(dprep_dataset* d);
DPREP_API size_t dprep_dataset_rows(const dprep_dataset* d);
DPREP_API size_t dprep_dataset_cols(const dprep_dataset* d);

/* `path` may be NULL for an in-memory ledger. `cap` <= 0 means uncapped. */
DPREP_API dprep_status dprep_ledger_open(const char* path, double cap, dprep_ledger** out);
DPREP_API void dprep_ledger_free(dprep_ledger* l);
/* `remaining` is set to -1 when the ledger has no cap. */
DPREP_API dprep_status dprep_ledger_status(dprep_ledger* l, double* spent, double* remaining,
                                           size_t* releases);

/* Custodian-only local fit summary. */
DPREP_API dprep_status dprep_fit(const dprep_dataset* d, const char* config_json,
                                 char** summary_json);

/* Release report in `report_json`. `debug_json` receives the custodian-only
 * document when `unsafe_debug` is nonzero and is set to NULL otherwise. The
 * ledger entry is written before the report exists. */
DPREP_API dprep_status dprep_ad_verify(const dprep_dataset* d, dprep_ledger* ledger,
                                       const char* config_json, int unsafe_debug,
                                       char** report_json, char** debug_json);
DPREP_API dprep_status dprep_am_verify(const dprep_dataset* d, dprep_ledger* ledger,
                                       const char* config_json, int unsafe_debug,
                                       char** report_json, char** debug_json);

/* Budget-free simulations returning CSV. */
DPREP_API dprep_status dprep_ad_mselect(const char* config_json, char** csv);
DPREP_API dprep_status dprep_am_contour(const char* config_json, char** csv);

DPREP_API dprep_status dprep_invert(const char* config_json, char** result_json);

/* Recomputes posterior summaries from a release report. `matches` (may be
 * NULL) is set to 1 when they equal the report's own summary block. */
DPREP_API dprep_status dprep_report_summarize(const char* report_json, char** summary_json,
                                              int* matches);

DPREP_API dprep_status dprep_overlap_measure(double lower1, double upper1, double lower2,
                                             double upper2, int allow_degenerate, double* out);
DPREP_API dprep_status dprep_invert_overlap(double nu, double l1, double l2, double* out);
DPREP_API dprep_status dprep_delta_star(double sigma_hat_o, double alpha, double n0, double n,
                                        double* out);
DPREP_API dprep_status dprep_error_bound(int M, double epsilon, double omega,
                                         double variance_cap, double* out);

#ifdef __cplusplus
}
#endif

#endif /* DPREP_DPREP_H_ */

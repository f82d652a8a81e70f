#ifndef REG_C_API_H
#define REG_C_API_H

/* C interface to the content-selection library. Every call returns a status;
   on failure reg_last_error() holds a message for the calling thread. Strings
   returned through `char**` are owned by the caller and released with
   reg_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(REG_BUILDING_LIBRARY)
#define REG_API __attribute__((visibility("default")))
#else
#define REG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum reg_status {
  REG_OK = 0,
  REG_E_INVALID_ARGUMENT = 1,
  REG_E_PARSE = 2,
  REG_E_VALIDATION = 3,
  REG_E_PROTOCOL = 4,
  REG_E_NOT_FOUND = 5,
  REG_E_RUNTIME = 6,
  REG_E_INTERNAL = 7
} reg_status;

typedef enum reg_report_format {
  REG_REPORT_MARKDOWN = 0,
  REG_REPORT_CSV = 1,
  /* Requires exactly two runs. */
  REG_REPORT_SIGNIFICANCE = 2
} reg_report_format;

typedef enum reg_describe_format {
  REG_DESCRIBE_TEXT = 0,
  REG_DESCRIBE_JSON = 1
} reg_describe_format;

typedef struct reg_corpus reg_corpus;
typedef struct reg_model reg_model;
typedef struct reg_run reg_run;

REG_API const char* reg_version(void);
REG_API const char* reg_last_error(void);
REG_API const char* reg_status_name(reg_status status);
REG_API void reg_string_free(char* s);

/* Corpus */
REG_API reg_status reg_corpus_from_json(const char* json, reg_corpus** out);
/* `config_json` uses the synthetic generator's config format. */
REG_API reg_status reg_corpus_synthesize(const char* config_json, uint64_t seed,
                                         reg_corpus** out);
REG_API reg_status reg_corpus_to_json(const reg_corpus* corpus, char** out);
/* JSON: counts, reference-type histogram and, for generated corpora, the
   generating category of each speaker. */
REG_API reg_status reg_corpus_summary(const reg_corpus* corpus, char** out);
REG_API void reg_corpus_free(reg_corpus* corpus);

/* Model */
REG_API reg_status reg_model_from_json(const char* json, reg_model** out);
REG_API reg_status reg_model_to_json(const reg_model* model, char** out);
REG_API reg_status reg_model_describe(const reg_model* model, const reg_corpus* corpus,
                                      const char* trial_id, reg_describe_format format,
                                      char** out);
REG_API void reg_model_free(reg_model* model);

/* Experiments. `options_json` keys (all optional): method, folds, seed, tau,
   oracle_profiles, allow_sparse, grid_c, grid_gamma, include_speaker_ids,
   keep_models, jobs. */
REG_API reg_status reg_experiment_run(const reg_corpus* corpus, const char* options_json,
                                      reg_run** out);
REG_API reg_status reg_run_to_json(const reg_run* run, char** out);
REG_API reg_status reg_run_method(const reg_run* run, char** out);
/* Models kept with keep_models, in iteration then group order. */
REG_API reg_status reg_run_model_count(const reg_run* run, size_t* out);
REG_API reg_status reg_run_model_at(const reg_run* run, size_t index, char** name,
                                    char** model_json);
/* Labels default to each run's method name when `labels` is NULL. */
REG_API reg_status reg_report_render(const reg_run* const* runs, const char* const* labels,
                                     size_t count, reg_report_format format, char** out);
REG_API void reg_run_free(reg_run* run);

#ifdef __cplusplus
}
#endif

#endif

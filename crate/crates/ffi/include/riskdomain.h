#ifndef RISKDOMAIN_H
#define RISKDOMAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Number of risk-factor domains, the length of a score array.
 */
#define RD_NUM_DOMAINS 7

/*
 Risk-factor domains plus `Other`; the most labels a paragraph can get.
 */
#define RD_MAX_LABELS 8

typedef enum RdStatus {
  RD_STATUS_OK = 0,
  /*
   Invalid configuration or parameters.
   */
  RD_STATUS_CONFIG = 1,
  /*
   Malformed or inconsistent input data, including unreadable files.
   */
  RD_STATUS_DATA = 2,
  /*
   A numerical failure such as an undefined statistic.
   */
  RD_STATUS_NUMERICAL = 3,
  /*
   Null pointer, invalid UTF-8 or an out-of-range argument.
   */
  RD_STATUS_INVALID_ARGUMENT = 4,
  /*
   Internal panic caught at the boundary.
   */
  RD_STATUS_INTERNAL = 5,
} RdStatus;

/*
 Loaded classification pipeline.
 */
typedef struct RdPipeline RdPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *rd_last_error_message(void);

/*
 Library version as a static string.
 */
const char *rd_version(void);

/*
 Display name of domain `index` (0-7) as a static string, or null.
 */
const char *rd_domain_name(uint32_t index);

/*
 Loads the bundle directory `dir` into `*out`.

 # Safety
 `dir` must be a nul-terminated string and `out` a valid pointer.
 */
enum RdStatus rd_pipeline_load(const char *dir, struct RdPipeline **out);

/*
 Releases a pipeline; null is ignored.

 # Safety
 `pipeline` must come from [`rd_pipeline_load`] and not be used afterwards.
 */
void rd_pipeline_free(struct RdPipeline *pipeline);

/*
 Classifies one paragraph.

 `scores` receives [`RD_NUM_DOMAINS`] values in domain order. `labels`
 receives up to [`RD_MAX_LABELS`] domain indices, best first, and
 `*n_labels` their count. Either of `scores` and `labels` may be null to
 skip it; `n_labels` must be non-null when `labels` is.

 # Safety
 Pointers must be valid for the stated lengths; `text` nul-terminated.
 */
enum RdStatus rd_pipeline_classify(const struct RdPipeline *pipeline,
                                   const char *text,
                                   double *scores,
                                   uint32_t *labels,
                                   size_t *n_labels);

/*
 Porter stem of `word` in `*out`; release it with [`rd_string_free`].

 # Safety
 `word` must be nul-terminated and `out` a valid pointer.
 */
enum RdStatus rd_porter_stem(const char *word, char **out);

/*
 Releases a string returned by this library; null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void rd_string_free(char *s);

/*
 Fleiss's kappa of a row-major `n_items x n_raters` table of category codes.

 # Safety
 `ratings` must hold `n_items * n_raters` values; `out` must be valid.
 */
enum RdStatus rd_fleiss_kappa(const int32_t *ratings, size_t n_items, size_t n_raters, double *out);

/*
 Multi-rater kappa (pairwise chance agreement; Cohen's kappa for two
 raters) of a row-major `n_items x n_raters` table.

 # Safety
 As for [`rd_fleiss_kappa`].
 */
enum RdStatus rd_multi_kappa(const int32_t *ratings, size_t n_items, size_t n_raters, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISKDOMAIN_H */

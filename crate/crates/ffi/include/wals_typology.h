#ifndef WALS_TYPOLOGY_H
#define WALS_TYPOLOGY_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WtReportFormat {
  WT_REPORT_FORMAT_TSV = 0,
  WT_REPORT_FORMAT_MARKDOWN = 1,
} WtReportFormat;

/**
 * Result of a fallible call.
 */
typedef enum WtStatus {
  WT_STATUS_OK = 0,
  WT_STATUS_NULL_ARGUMENT = 1,
  WT_STATUS_INVALID_UTF8 = 2,
  WT_STATUS_BUFFER_TOO_SMALL = 3,
  WT_STATUS_CONFIG = 4,
  WT_STATUS_DATA = 5,
  WT_STATUS_INVARIANT = 6,
  WT_STATUS_PANIC = 7,
} WtStatus;

/**
 * A loaded parallel corpus for one language.
 */
typedef struct WtCorpus WtCorpus;

/**
 * A loaded WALS database.
 */
typedef struct WtDatabase WtDatabase;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *wt_version(void);

/**
 * Copy of the last error message on this thread, or null if none. Free
 * with `wt_string_free`.
 */
char *wt_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void wt_string_free(char *s);

/**
 * Loads `wals.csv` and `rules.csv`.
 *
 * # Safety
 * Paths must be nul-terminated strings; `out` must be writable.
 */
enum WtStatus wt_database_load(const char *wals_path,
                               const char *rules_path,
                               struct WtDatabase **out);

/**
 * # Safety
 * `db` must be null or a handle from `wt_database_load`, freed once.
 */
void wt_database_free(struct WtDatabase *db);

/**
 * # Safety
 * `db` must be a live handle or null (which yields 0).
 */
size_t wt_database_language_count(const struct WtDatabase *db);

/**
 * Loads `<dir>/source.conll`, `target.txt` and `align.txt`.
 *
 * # Safety
 * Strings must be nul-terminated; `out` must be writable.
 */
enum WtStatus wt_corpus_load(const char *dir, const char *language_code, struct WtCorpus **out);

/**
 * # Safety
 * `corpus` must be null or a handle from `wt_corpus_load`, freed once.
 */
void wt_corpus_free(struct WtCorpus *corpus);

/**
 * Number of sentence pairs.
 *
 * # Safety
 * `corpus` must be a live handle or null (which yields 0).
 */
size_t wt_corpus_len(const struct WtCorpus *corpus);

/**
 * Writes the normalized text feature vector of `rule` into `values`.
 * `len` receives the vector length; if `capacity` is smaller, nothing is
 * written and `WT_STATUS_BUFFER_TOO_SMALL` is returned. For 92A,
 * `particle` (if non-null) receives the inferred particle or null.
 *
 * # Safety
 * `values` must hold `capacity` doubles; other pointers as documented.
 */
enum WtStatus wt_text_vector(const struct WtCorpus *corpus,
                             const char *rule,
                             double *values,
                             size_t capacity,
                             size_t *len,
                             char **particle);

/**
 * Runs the leave-one-out grids for `rules` (comma separated, or null for
 * all six) over every language directory in `corpus_dir` and returns the
 * report text in `out`.
 *
 * # Safety
 * Strings must be nul-terminated; `out` must be writable.
 */
enum WtStatus wt_evaluate_report(const struct WtDatabase *db,
                                 const char *corpus_dir,
                                 const char *rules,
                                 enum WtReportFormat format,
                                 char **out);

/**
 * Writes the default synthetic benchmark with the given seed and sentence
 * count (0 keeps the default) into `dir`.
 *
 * # Safety
 * `dir` must be a nul-terminated string.
 */
enum WtStatus wt_synth_benchmark(const char *dir, uint64_t seed, size_t sentences);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WALS_TYPOLOGY_H */

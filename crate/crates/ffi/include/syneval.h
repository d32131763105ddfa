#ifndef SYNEVAL_H
#define SYNEVAL_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SynevalStatus {
  SYNEVAL_STATUS_OK = 0,
  SYNEVAL_STATUS_NULL_POINTER = 1,
  SYNEVAL_STATUS_INVALID_UTF8 = 2,
  SYNEVAL_STATUS_INVALID_ARGUMENT = 3,
  SYNEVAL_STATUS_IO = 4,
  SYNEVAL_STATUS_PARSE = 5,
  SYNEVAL_STATUS_GRAMMAR = 6,
  SYNEVAL_STATUS_PANIC = 7,
} SynevalStatus;

/**
 * Opaque grammar handle.
 */
typedef struct SynevalGrammar SynevalGrammar;

/**
 * Opaque n-gram model handle.
 */
typedef struct SynevalModel SynevalModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the library.
 */
const char *syneval_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *syneval_version(void);

/**
 * Loads a bundled grammar by name, e.g. `"full.grammar"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum SynevalStatus syneval_grammar_bundled(const char *name, struct SynevalGrammar **out);

/**
 * Loads a grammar file; includes resolve relative to its directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SynevalStatus syneval_grammar_load(const char *path, struct SynevalGrammar **out);

/**
 * # Safety
 * `grammar` must be null or a handle not yet freed.
 */
void syneval_grammar_free(struct SynevalGrammar *grammar);

/**
 * Number of conditions declared by the grammar.
 *
 * # Safety
 * `grammar` must be a live handle; `out` must be writable.
 */
enum SynevalStatus syneval_grammar_condition_count(const struct SynevalGrammar *grammar,
                                                   size_t *out);

/**
 * Number of minimal pairs, for one condition id or all when `condition`
 * is null.
 *
 * # Safety
 * `grammar` must be a live handle; `condition` null or NUL-terminated;
 * `out` writable.
 */
enum SynevalStatus syneval_grammar_pair_count(const struct SynevalGrammar *grammar,
                                              const char *condition,
                                              size_t *out);

/**
 * Writes the pairs of one condition (or all when null) as JSON Lines.
 *
 * # Safety
 * `grammar` must be a live handle; `condition` null or NUL-terminated;
 * `path` NUL-terminated.
 */
enum SynevalStatus syneval_grammar_write_pairs(const struct SynevalGrammar *grammar,
                                               const char *condition,
                                               const char *path);

/**
 * Trains a modified Kneser-Ney model on a one-sentence-per-line corpus.
 *
 * # Safety
 * `corpus_path` must be NUL-terminated; `out` writable.
 */
enum SynevalStatus syneval_model_train(const char *corpus_path,
                                       size_t order,
                                       uint64_t min_count,
                                       struct SynevalModel **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum SynevalStatus syneval_model_load_arpa(const char *path, struct SynevalModel **out);

/**
 * # Safety
 * `model` must be a live handle; `path` NUL-terminated.
 */
enum SynevalStatus syneval_model_save_arpa(const struct SynevalModel *model, const char *path);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void syneval_model_free(struct SynevalModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
enum SynevalStatus syneval_model_order(const struct SynevalModel *model, size_t *out);

/**
 * log10 probability of a whitespace-tokenized sentence, end marker included.
 *
 * # Safety
 * `model` must be a live handle; `sentence` NUL-terminated; `out` writable.
 */
enum SynevalStatus syneval_model_sentence_log10prob(const struct SynevalModel *model,
                                                    const char *sentence,
                                                    double *out);

/**
 * Perplexity over a one-sentence-per-line corpus file.
 *
 * # Safety
 * `model` must be a live handle; `corpus_path` NUL-terminated; `out` writable.
 */
enum SynevalStatus syneval_model_perplexity(const struct SynevalModel *model,
                                            const char *corpus_path,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNEVAL_H */

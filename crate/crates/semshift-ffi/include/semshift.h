/* C interface to the semshift historical embedding library. */

#pragma once

/* Generated by cbindgen from crates/semshift-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Anything but `SEMSHIFT_STATUS_OK` leaves a
 * message readable through `semshift_last_error` on the calling thread.
 */
typedef enum SemshiftStatus {
  SEMSHIFT_STATUS_OK = 0,
  SEMSHIFT_STATUS_NULL_ARGUMENT = 1,
  SEMSHIFT_STATUS_INVALID_UTF8 = 2,
  SEMSHIFT_STATUS_IO = 3,
  SEMSHIFT_STATUS_FORMAT = 4,
  SEMSHIFT_STATUS_MISSING_WORD = 5,
  SEMSHIFT_STATUS_INVALID_ARGUMENT = 6,
  SEMSHIFT_STATUS_INSUFFICIENT_DATA = 7,
  SEMSHIFT_STATUS_INTERNAL = 8,
} SemshiftStatus;

/**
 * Opaque ranked-neighbour list, most similar first.
 */
typedef struct SemshiftNeighbors SemshiftNeighbors;

/**
 * Opaque embedding-space handle.
 */
typedef struct SemshiftSpace SemshiftSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library as a static NUL-terminated string.
 */
const char *semshift_version(void);

/**
 * Message from the most recent failing call on this thread, or `NULL` when
 * nothing has failed yet. Valid until the next failing call on the thread.
 */
const char *semshift_last_error(void);

/**
 * Loads an embedding space for `decade` from a text or binary container
 * file (the format is sniffed). On failure `out` is left untouched.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SemshiftStatus semshift_space_load(const char *path,
                                        int32_t decade,
                                        struct SemshiftSpace **out);

/**
 * Releases a space handle. `NULL` is a no-op.
 *
 * # Safety
 * `space` must be a pointer from `semshift_space_load`, freed once.
 */
void semshift_space_free(struct SemshiftSpace *space);

/**
 * Vector dimensionality; 0 for a `NULL` handle.
 *
 * # Safety
 * `space` must be `NULL` or a live handle.
 */
size_t semshift_space_dim(const struct SemshiftSpace *space);

/**
 * Vocabulary size; 0 for a `NULL` handle.
 *
 * # Safety
 * `space` must be `NULL` or a live handle.
 */
size_t semshift_space_len(const struct SemshiftSpace *space);

/**
 * Decade the space was loaded for; 0 for a `NULL` handle.
 *
 * # Safety
 * `space` must be `NULL` or a live handle.
 */
int32_t semshift_space_decade(const struct SemshiftSpace *space);

/**
 * Whether `token` has a vector; false for `NULL` arguments.
 *
 * # Safety
 * `space` must be `NULL` or a live handle; `token` `NULL` or NUL-terminated.
 */
bool semshift_space_contains(const struct SemshiftSpace *space, const char *token);

/**
 * Cosine similarity between two tokens of one space.
 *
 * # Safety
 * Pointer arguments must be valid as documented on `semshift_space_load`.
 */
enum SemshiftStatus semshift_space_cosine(const struct SemshiftSpace *space,
                                          const char *a,
                                          const char *b,
                                          double *out);

/**
 * Ranks the `k` nearest neighbours of `token` over the space's whole
 * vocabulary (this ABI exposes no POS filtering). Fewer than `k` rows come
 * back when the vocabulary is smaller. On failure `out` is left untouched.
 *
 * # Safety
 * Pointer arguments must be valid as documented on `semshift_space_load`.
 */
enum SemshiftStatus semshift_space_knn(const struct SemshiftSpace *space,
                                       const char *token,
                                       size_t k,
                                       struct SemshiftNeighbors **out);

/**
 * Number of neighbours in the list; 0 for a `NULL` handle.
 *
 * # Safety
 * `neighbors` must be `NULL` or a live handle.
 */
size_t semshift_neighbors_len(const struct SemshiftNeighbors *neighbors);

/**
 * Borrowed token at `index` (most similar first); `NULL` when out of range.
 * The pointer dies with the handle.
 *
 * # Safety
 * `neighbors` must be `NULL` or a live handle.
 */
const char *semshift_neighbors_token(const struct SemshiftNeighbors *neighbors, size_t index);

/**
 * Cosine similarity at `index`; NaN when out of range.
 *
 * # Safety
 * `neighbors` must be `NULL` or a live handle.
 */
double semshift_neighbors_similarity(const struct SemshiftNeighbors *neighbors, size_t index);

/**
 * Releases a neighbour list. `NULL` is a no-op.
 *
 * # Safety
 * `neighbors` must be a pointer from `semshift_space_knn`, freed once.
 */
void semshift_neighbors_free(struct SemshiftNeighbors *neighbors);

/**
 * Neighbourhood-turnover change rate of `token` between two spaces: one
 * minus the Jaccard overlap of the two `k`-nearest-neighbour sets, in
 * [0, 1]. Each pool is its space's whole vocabulary.
 *
 * # Safety
 * Pointer arguments must be valid as documented on `semshift_space_load`.
 */
enum SemshiftStatus semshift_change_rate(const struct SemshiftSpace *earlier,
                                         const struct SemshiftSpace *later,
                                         const char *token,
                                         size_t k,
                                         double *out);

/**
 * Jaccard distance between two string sets (duplicates collapse). Undefined
 * and an error when both sets are empty.
 *
 * # Safety
 * `a` and `b` must point to `a_len`/`b_len` NUL-terminated strings; either
 * pointer may be `NULL` when its length is 0.
 */
enum SemshiftStatus semshift_jaccard(const char *const *a,
                                     size_t a_len,
                                     const char *const *b,
                                     size_t b_len,
                                     double *out);

/**
 * Pearson correlation of two length-`n` samples and its two-tailed p-value.
 * Either out-pointer may be `NULL` when that value is not needed.
 *
 * # Safety
 * `x` and `y` must point to `n` doubles each.
 */
enum SemshiftStatus semshift_pearson(const double *x,
                                     const double *y,
                                     size_t n,
                                     double *out_rho,
                                     double *out_p);

/**
 * Log-density of `token` under the unit-variance Gaussian prototype fitted
 * to `members` (larger means more prototypical). Every member must have a
 * vector in the space.
 *
 * # Safety
 * Pointer arguments must be valid as documented on `semshift_jaccard`.
 */
enum SemshiftStatus semshift_prototype_score(const struct SemshiftSpace *space,
                                             const char *const *members,
                                             size_t members_len,
                                             const char *token,
                                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

/* billsim C API: legislative text similarity kernels. */

#ifndef BILLSIM_H
#define BILLSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum BillsimStatus {
  BILLSIM_STATUS_OK = 0,
  BILLSIM_STATUS_NULL_ARGUMENT = 1,
  BILLSIM_STATUS_INVALID_UTF8 = 2,
  BILLSIM_STATUS_INVALID_ARGUMENT = 3,
  BILLSIM_STATUS_IO_ERROR = 4,
  BILLSIM_STATUS_PARSE_ERROR = 5,
} BillsimStatus;

/**
 * Opaque trained-classifier handle.
 */
typedef struct BillsimClassifier BillsimClassifier;

/**
 * Alignment scoring parameters (mismatch and gap penalties are <= 0).
 */
typedef struct BillsimAlignParams {
  double match_score;
  double mismatch;
  double gap_open;
  double gap_extend;
} BillsimAlignParams;

/**
 * Local alignment outcome; spans are half-open token ranges.
 */
typedef struct BillsimAlignResult {
  double raw_score;
  uint64_t a_start;
  uint64_t a_end;
  uint64_t b_start;
  uint64_t b_end;
  uint64_t aligned_len;
} BillsimAlignResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *billsim_version(void);

/**
 * Default alignment parameters (2 / -1 / -2 / -0.5).
 */
struct BillsimAlignParams billsim_default_align_params(void);

/**
 * Aligns two NUL-terminated UTF-8 texts at the word-token level.
 * `params` may be NULL for defaults.
 *
 * # Safety
 * `text_a` and `text_b` must be valid NUL-terminated strings and `out` a
 * valid pointer.
 */
enum BillsimStatus billsim_align(const char *text_a,
                                 const char *text_b,
                                 const struct BillsimAlignParams *params,
                                 struct BillsimAlignResult *out);

/**
 * Writes the four normalized similarity features for a text pair into
 * `out_features[0..4]`.
 *
 * # Safety
 * As [`billsim_align`]; `out_features` must point to at least 4 doubles.
 */
enum BillsimStatus billsim_align_features(const char *text_a,
                                          const char *text_b,
                                          const struct BillsimAlignParams *params,
                                          double *out_features);

/**
 * Loads a trained classifier from a model JSON file. On success `*out`
 * owns the handle; release it with [`billsim_classifier_free`].
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BillsimStatus billsim_classifier_load(const char *path, struct BillsimClassifier **out);

/**
 * Predicts from a feature vector. `out_probs`, when non-NULL, receives the
 * 5 class probabilities.
 *
 * # Safety
 * `classifier` must be a live handle from [`billsim_classifier_load`];
 * `features` must point to `num_features` doubles.
 */
enum BillsimStatus billsim_classifier_predict(const struct BillsimClassifier *classifier,
                                              const double *features,
                                              uintptr_t num_features,
                                              uint32_t *out_label,
                                              double *out_probs);

/**
 * Aligns two texts and classifies the pair in one call.
 *
 * # Safety
 * As [`billsim_align`] and [`billsim_classifier_predict`].
 */
enum BillsimStatus billsim_classify_pair(const struct BillsimClassifier *classifier,
                                         const char *text_a,
                                         const char *text_b,
                                         const struct BillsimAlignParams *params,
                                         uint32_t *out_label,
                                         double *out_probs);

/**
 * Releases a classifier handle; NULL is a no-op.
 *
 * # Safety
 * `classifier` must be NULL or a pointer from [`billsim_classifier_load`]
 * that has not been freed.
 */
void billsim_classifier_free(struct BillsimClassifier *classifier);

/**
 * Weighted Cohen's kappa over two equal-length label arrays (values 0..=4).
 *
 * # Safety
 * `labels_a` and `labels_b` must point to `len` elements each.
 */
enum BillsimStatus billsim_weighted_kappa(const uint32_t *labels_a,
                                          const uint32_t *labels_b,
                                          uintptr_t len,
                                          bool quadratic,
                                          double *out);

/**
 * Bill-level similarity from a row-major `n_i x n_j` matrix of subsection
 * pair labels (values 0..=4). Writes the directed normalized sums and the
 * final max score.
 *
 * # Safety
 * `labels` must point to `n_i * n_j` elements; out-pointers may be NULL to
 * skip that value, except `out_score`.
 */
enum BillsimStatus billsim_bill_similarity(const uint32_t *labels,
                                           uintptr_t n_i,
                                           uintptr_t n_j,
                                           double *out_score,
                                           double *out_sigma_star_ij,
                                           double *out_sigma_star_ji);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BILLSIM_H */

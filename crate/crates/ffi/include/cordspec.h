#ifndef CORDSPEC_H
#define CORDSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsAmbient {
  CS_AMBIENT_S3 = 0,
  CS_AMBIENT_S2X_S1 = 1,
} CsAmbient;

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_CONFIG = 3,
  CS_STATUS_COMPUTATION = 4,
  CS_STATUS_BUFFER_TOO_SMALL = 5,
  CS_STATUS_PANIC = 6,
} CsStatus;

/**
 * A holonomy representation of a one-cusped manifold group.
 */
typedef struct CsGroup CsGroup;

/**
 * Cords of a group up to a length cutoff.
 */
typedef struct CsSpectrum CsSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *cs_status_string(enum CsStatus status);

/**
 * Message of the last failed call on this thread.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes; `needed` may be null.
 */
enum CsStatus cs_last_error(char *buf, size_t cap, size_t *needed);

/**
 * The bundled figure-eight knot group.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CsStatus cs_group_figure_eight(struct CsGroup **out);

/**
 * Parses a holonomy file's JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CsStatus cs_group_from_json(const char *json, struct CsGroup **out);

/**
 * # Safety
 * `g` must come from a `cs_group_*` constructor, or be null.
 */
void cs_group_free(struct CsGroup *g);

/**
 * Largest height at which the cusp horoball is embedded.
 *
 * # Safety
 * `g` must be a live group handle and `out` a valid pointer.
 */
enum CsStatus cs_group_max_embedded_height(const struct CsGroup *g, double *out);

/**
 * Cords of length ≤ `cutoff` for the cusp horoball at `height`
 * (`height ≤ 0` selects the largest embedded height).
 *
 * # Safety
 * `g` must be a live group handle and `out` a valid pointer.
 */
enum CsStatus cs_spectrum_enumerate(const struct CsGroup *g,
                                    double height,
                                    double cutoff,
                                    struct CsSpectrum **out);

/**
 * # Safety
 * `s` must come from `cs_spectrum_enumerate`, or be null.
 */
void cs_spectrum_free(struct CsSpectrum *s);

/**
 * # Safety
 * `s` must be a live spectrum handle and `out` a valid pointer.
 */
enum CsStatus cs_spectrum_len(const struct CsSpectrum *s, size_t *out);

/**
 * Length of cord `i` (cords are sorted by length).
 *
 * # Safety
 * `s` must be a live spectrum handle and `out` a valid pointer.
 */
enum CsStatus cs_spectrum_length(const struct CsSpectrum *s, size_t i, double *out);

/**
 * Class word of cord `i`, NUL-terminated.
 *
 * # Safety
 * `s` must be a live spectrum handle, `buf` valid for `cap` bytes; `needed`
 * may be null.
 */
enum CsStatus cs_spectrum_class_word(const struct CsSpectrum *s,
                                     size_t i,
                                     char *buf,
                                     size_t cap,
                                     size_t *needed);

/**
 * Morse index, nullity and smallest Hessian eigenvalue of cord `i` on a
 * mesh of `mesh` segments.
 *
 * # Safety
 * `s` must be a live spectrum handle; the out pointers must be valid.
 */
enum CsStatus cs_spectrum_index(const struct CsSpectrum *s,
                                size_t i,
                                size_t mesh,
                                size_t *index,
                                size_t *nullity,
                                double *min_eigenvalue);

/**
 * `2p + q − pq`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CsStatus cs_torus_euler_char(int64_t p, int64_t q, enum CsAmbient ambient, int64_t *out);

/**
 * Degree-0 and degree-1 counts of cord families of length ≤ `max_length`;
 * all higher degrees vanish.
 *
 * # Safety
 * `count0` and `count1` must be valid pointers.
 */
enum CsStatus cs_torus_rank_counts(int64_t p,
                                   int64_t q,
                                   enum CsAmbient ambient,
                                   double max_length,
                                   size_t *count0,
                                   size_t *count1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORDSPEC_H */

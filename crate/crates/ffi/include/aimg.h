#ifndef AIMG_H
#define AIMG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AimgStatus {
  AIMG_STATUS_OK = 0,
  AIMG_STATUS_NULL_POINTER = 1,
  AIMG_STATUS_INVALID_UTF8 = 2,
  AIMG_STATUS_PARSE = 3,
  AIMG_STATUS_GROUP = 4,
  AIMG_STATUS_RESOURCE_EXCEEDED = 5,
  AIMG_STATUS_NO_DECOMPOSITION = 6,
  AIMG_STATUS_UNKNOWN_LABEL = 7,
  AIMG_STATUS_INVARIANT_VIOLATION = 8,
  AIMG_STATUS_PANIC = 9,
} AimgStatus;

typedef enum AimgCurveVerdict {
  AIMG_CURVE_VERDICT_MEMBER = 0,
  AIMG_CURVE_VERDICT_NOT_MEMBER = 1,
  AIMG_CURVE_VERDICT_EXCLUDED_J = 2,
} AimgCurveVerdict;

typedef struct AimgCatalog AimgCatalog;

typedef struct AimgGroup AimgGroup;

typedef struct AimgMap AimgMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; owned by the library.
const char *aimg_last_error(void);

// # Safety
// `s` must come from this library or be null.
void aimg_string_free(char *s);

void aimg_set_cap_order(uintptr_t cap);

// Parses `{"level": N, "gens": [[a,b,c,d], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum AimgStatus aimg_group_from_json(const char *json, struct AimgGroup **out);

// # Safety
// `g` must come from `aimg_group_from_json` or be null.
void aimg_group_free(struct AimgGroup *g);

// # Safety
// `g` must be a live handle and `out` writable.
enum AimgStatus aimg_group_genus(const struct AimgGroup *g, uint64_t *out);

// Index of `[G,G]` in `G ∩ SL2(Ẑ)`.
//
// # Safety
// `g` must be a live handle and `out` writable.
enum AimgStatus aimg_group_commutator_index(const struct AimgGroup *g, uint64_t *out);

// Parses an expression in `t` such as `"(t^2+1)/(2*t)"`.
//
// # Safety
// `expr` must be a NUL-terminated string and `out` writable.
enum AimgStatus aimg_map_parse(const char *expr, struct AimgMap **out);

// # Safety
// `m` must come from this library or be null.
void aimg_map_free(struct AimgMap *m);

// Canonical text form; release with `aimg_string_free`.
//
// # Safety
// `m` must be a live handle.
char *aimg_map_to_string(const struct AimgMap *m);

// `J` with `pi = J ∘ u`.
//
// # Safety
// `pi` and `u` must be live handles and `out` writable.
enum AimgStatus aimg_solve_left_factor(const struct AimgMap *pi,
                                       const struct AimgMap *u,
                                       struct AimgMap **out);

// Loads catalog JSON text; fails on any invariant violation.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum AimgStatus aimg_catalog_from_json(const char *json, struct AimgCatalog **out);

// The catalog bundled with the library.
//
// # Safety
// `out` must be writable.
enum AimgStatus aimg_catalog_sample(struct AimgCatalog **out);

// # Safety
// `c` must come from this library or be null.
void aimg_catalog_free(struct AimgCatalog *c);

// Membership of `j` (text such as `"1732"` or `"-5/3"`) in `π_G(P^1(Q))`.
// On `Member`, `witness` (if not null) receives the parameter `t`.
//
// # Safety
// Handles must be live, strings NUL-terminated, `verdict` writable and
// `witness` writable or null.
enum AimgStatus aimg_check_curve(const struct AimgCatalog *catalog,
                                 const char *label,
                                 const char *j,
                                 enum AimgCurveVerdict *verdict,
                                 char **witness);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIMG_H */

#ifndef DELAUNAY_GLUE_H
#define DELAUNAY_GLUE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DgStatus {
  DG_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or index out of bounds.
   */
  DG_STATUS_INVALID_ARGUMENT = 1,
  DG_STATUS_DOMAIN = 2,
  DG_STATUS_RANGE = 3,
  DG_STATUS_CONFIG = 4,
  DG_STATUS_PRECONDITION = 5,
  /**
   * Integration, convergence or other numerical failure.
   */
  DG_STATUS_NUMERICAL = 6,
  DG_STATUS_CONSISTENCY = 7,
  DG_STATUS_IO = 8,
  DG_STATUS_PANIC = 9,
} DgStatus;

/**
 * Opaque profile handle.
 */
typedef struct DgProfile DgProfile;

typedef struct DgNeckParams {
  double epsilon;
  double tau;
} DgNeckParams;

typedef struct DgProfileSample {
  double s;
  double sigma;
  double sigma_s;
  double k;
  double rho;
} DgProfileSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Neck parameters (epsilon, tau) of necksize `epsilon` in (0, 1].
 */
enum DgStatus dg_neck_params(double epsilon, struct DgNeckParams *params);

/**
 * Profile on [-s_max, s_max]; `step <= 0` selects the default step.
 */
enum DgStatus dg_profile_new(double epsilon, double s_max, double step, struct DgProfile **profile);

/**
 * Releases a profile; null is ignored.
 */
void dg_profile_free(struct DgProfile *profile);

/**
 * Number of grid points, 0 for null.
 */
size_t dg_profile_len(const struct DgProfile *profile);

enum DgStatus dg_profile_sample(const struct DgProfile *profile,
                                size_t index,
                                struct DgProfileSample *sample);

/**
 * Isothermal period S of necksize `epsilon` in (0, 1).
 */
enum DgStatus dg_period_s(double epsilon, double *period);

/**
 * Axial period T of necksize `epsilon` in (0, 1).
 */
enum DgStatus dg_period_t(double epsilon, double *period);

/**
 * Floquet exponent of angular mode `j` at necksize `epsilon`.
 */
enum DgStatus dg_floquet_exponent(double epsilon, int32_t j, double *gamma);

/**
 * Runs the two-ended gluing for a JSON config and returns the residual
 * report as a JSON string (free with [`dg_string_free`]). When `out_dir`
 * is not null the OBJ pieces and the report are written there as well.
 */
enum DgStatus dg_glue_run_json(const char *config, const char *out_dir, char **report);

/**
 * Releases a string returned by the library; null is ignored.
 */
void dg_string_free(char *s);

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * nul-terminated) and returns the full message length plus one, or 0 when
 * the last call succeeded.
 */
size_t dg_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DELAUNAY_GLUE_H */

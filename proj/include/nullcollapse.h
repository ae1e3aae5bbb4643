/* nullcollapse - public C interface.
 *
 * A verification engine for compact null hypersurfaces: it checks that a
 * declared hypersurface is null and expansion-free with the required Ricci
 * conditions, builds the associated one-parameter family of Riemannian
 * metrics on the surface, and scans the parameter toward zero to classify
 * the family as collapsing with bounded diameter, blowing up in curvature,
 * or inconclusive.
 *
 * All objects are opaque handles. Functions return nlc_status; on failure
 * nlc_last_error() carries a thread-local message. Returned strings are
 * owned by their handle and stay valid until the handle is freed.
 */
#ifndef NULLCOLLAPSE_H
#define NULLCOLLAPSE_H

#include <stddef.h>

#if defined(_WIN32)
#define NLC_API __declspec(dllexport)
#else
#define NLC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlc_status {
  NLC_OK = 0,
  NLC_ERROR_INVALID_ARGUMENT = 1,
  NLC_ERROR_SCHEMA = 2,   /* bad JSON or scenario document shape */
  NLC_ERROR_NOT_NULL = 3, /* surface fails the null check (scan without force) */
  NLC_ERROR_NUMERIC = 4,  /* singular metric, signature mismatch, ... */
  NLC_ERROR_UNKNOWN_NAME = 5,
  NLC_ERROR_INTERNAL = 6
} nlc_status;

typedef enum nlc_verdict {
  NLC_VERDICT_COLLAPSE_BOUNDED_DIAMETER = 0,
  NLC_VERDICT_UNBOUNDED_CURVATURE = 1,
  NLC_VERDICT_INCONCLUSIVE = 2
} nlc_verdict;

typedef struct nlc_scenario nlc_scenario;
typedef struct nlc_report nlc_report;

/* ---- catalog ---- */
NLC_API size_t nlc_catalog_count(void);
NLC_API const char* nlc_catalog_name(size_t index); /* NULL out of range */
NLC_API const char* nlc_catalog_summary(const char* name); /* NULL unknown */
NLC_API const char* nlc_catalog_json(const char* name);    /* NULL unknown */

/* ---- scenarios ---- */
NLC_API nlc_status nlc_scenario_from_catalog(const char* name,
                                             nlc_scenario** out);
NLC_API nlc_status nlc_scenario_from_json(const char* json_text,
                                          const char* name,
                                          nlc_scenario** out);
NLC_API const char* nlc_scenario_name(const nlc_scenario* scenario);
NLC_API void nlc_scenario_free(nlc_scenario* scenario);

/* ---- check: nullness plus hypothesis residuals ---- */
typedef struct nlc_check_options {
  int grid;    /* sample points per surface coordinate, default 24 */
  int workers; /* 0: NULLCOLLAPSE_WORKERS env or hardware concurrency */
} nlc_check_options;
NLC_API void nlc_check_options_init(nlc_check_options* options);
NLC_API nlc_status nlc_check(const nlc_scenario* scenario,
                             const nlc_check_options* options,
                             nlc_report** out);
NLC_API int nlc_report_null_ok(const nlc_report* report);
NLC_API int nlc_report_hypothesis_ok(const nlc_report* report);

/* ---- scan of the family parameter toward zero ---- */
typedef struct nlc_scan_options {
  double lambda_start;  /* default 0.1, must lie in (0, 0.5] */
  double lambda_factor; /* default 0.25, must lie in (0, 1) */
  int lambda_count;     /* default 8, at least 4 */
  int grid;             /* default 24, at least 8 */
  int workers;
  int force; /* nonzero: scan even when the null check fails */
} nlc_scan_options;
NLC_API void nlc_scan_options_init(nlc_scan_options* options);
NLC_API nlc_status nlc_scan(const nlc_scenario* scenario,
                            const nlc_scan_options* options,
                            nlc_report** out);
NLC_API nlc_status nlc_report_verdict(const nlc_report* report,
                                      nlc_verdict* out);

/* ---- evolution-equation residual traces along generators ---- */
typedef struct nlc_residual_options {
  int steps;  /* integrator steps per generator, default 400 */
  int curves; /* number of generators, deterministic starts, default 1 */
} nlc_residual_options;
NLC_API void nlc_residual_options_init(nlc_residual_options* options);
NLC_API nlc_status nlc_residuals(const nlc_scenario* scenario,
                                 const nlc_residual_options* options,
                                 nlc_report** out);

/* ---- report payloads ---- */
NLC_API const char* nlc_report_json(nlc_report* report);
/* CSV body for scan and residual reports; NULL for check reports. */
NLC_API const char* nlc_report_csv(nlc_report* report);
NLC_API void nlc_report_free(nlc_report* report);

NLC_API const char* nlc_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* NULLCOLLAPSE_H */

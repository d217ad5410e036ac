#ifndef WALKWAIT_H
#define WALKWAIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WwStatus {
  WW_STATUS_OK = 0,
  WW_STATUS_NULL_POINTER = 1,
  WW_STATUS_INVALID_SCENARIO = 2,
  WW_STATUS_INVALID_DISTRIBUTION = 3,
  WW_STATUS_REQUIRES_UNIFORM = 4,
  WW_STATUS_ASSUMPTION_VIOLATED = 5,
  WW_STATUS_NO_SIGN_CHANGE = 6,
  WW_STATUS_INVALID_BRACKET = 7,
  WW_STATUS_NUMERICS = 8,
  WW_STATUS_INVALID_ARGUMENT = 9,
  WW_STATUS_PANIC = 10,
} WwStatus;

typedef enum WwVariant {
  WW_VARIANT_ORIGINAL_EXPR = 0,
  WW_VARIANT_ORIGINAL_EQ4 = 1,
  WW_VARIANT_DISTANCE_CORRECTED = 2,
  WW_VARIANT_FULLY_CORRECTED = 3,
} WwVariant;

typedef enum WwStrategy {
  WW_STRATEGY_WALK_THEN_WAIT = 0,
  WW_STRATEGY_WAIT_AT_STOP1 = 1,
  WW_STRATEGY_WALK_ALL = 2,
} WwStrategy;

/**
 * Opaque arrival-law handle.
 */
typedef struct WwDistribution WwDistribution;

/**
 * Opaque scenario handle.
 */
typedef struct WwScenario WwScenario;

typedef struct WwKinematics {
  double shift_s;
  double ride_rest;
  double walk_rest;
  double walk_all;
} WwKinematics;

typedef struct WwBreakdown {
  double pre_walk;
  double board_term;
  double fallback_term;
  double total;
  double p_board;
  double p_missed_early;
  double p_no_bus;
  bool out_of_support;
} WwBreakdown;

typedef struct WwDecision {
  struct WwBreakdown walk_then_wait;
  struct WwBreakdown wait_at_stop1;
  struct WwBreakdown walk_all;
  enum WwStrategy recommended;
  double margin;
} WwDecision;

typedef struct WwSimStats {
  uint64_t trials;
  double mean;
  double stderr;
  double freq_board;
  double freq_missed_early;
  double freq_no_bus;
} WwSimStats;

/**
 * Renewal-mode statistics. `extra_mean` and `extra_stderr` are NaN when no
 * trial was overtaken.
 */
typedef struct WwRenewalStats {
  uint64_t trials;
  uint64_t overtaken;
  double freq_overtaken;
  double extra_mean;
  double extra_stderr;
  double weighted_mean;
} WwRenewalStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ww_last_error(void);

/**
 * Static name of a status code.
 */
const char *ww_status_name(enum WwStatus status);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum WwStatus ww_scenario_new(double d,
                              double d2,
                              double vw,
                              double vb,
                              double tw,
                              struct WwScenario **out);

/**
 * # Safety
 * `s` must be null or a handle from `ww_scenario_new` not yet freed.
 */
void ww_scenario_free(struct WwScenario *s);

/**
 * # Safety
 * `s` must be a live scenario handle and `out` valid for writes.
 */
enum WwStatus ww_scenario_derive(const struct WwScenario *s, struct WwKinematics *out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum WwStatus ww_distribution_uniform(double a, double b, struct WwDistribution **out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum WwStatus ww_distribution_exponential(double rate, struct WwDistribution **out);

/**
 * Parses `uniform:<a>,<b>` or `exp:<rate>`.
 *
 * # Safety
 * `spec` must be null or a NUL-terminated string; `out` null or valid for
 * writes.
 */
enum WwStatus ww_distribution_parse(const char *spec, struct WwDistribution **out);

/**
 * # Safety
 * `d` must be null or a handle from a distribution constructor not yet
 * freed.
 */
void ww_distribution_free(struct WwDistribution *d);

/**
 * Expected walk-then-wait time under one formula variant.
 *
 * # Safety
 * Handles must be live; `out` valid for writes.
 */
enum WwStatus ww_eval(const struct WwScenario *s,
                      const struct WwDistribution *dist,
                      enum WwVariant variant,
                      struct WwBreakdown *out);

/**
 * Corrected expected time for one strategy.
 *
 * # Safety
 * Handles must be live; `out` valid for writes.
 */
enum WwStatus ww_strategy_total(const struct WwScenario *s,
                                const struct WwDistribution *dist,
                                enum WwStrategy strategy,
                                struct WwBreakdown *out);

/**
 * # Safety
 * Handles must be live; `out` valid for writes.
 */
enum WwStatus ww_decide(const struct WwScenario *s,
                        const struct WwDistribution *dist,
                        struct WwDecision *out);

/**
 * Residual term for a uniform headway `tb`, by quadrature and in closed
 * form. Either output may be null.
 *
 * # Safety
 * `s` must be live; non-null outputs valid for writes.
 */
enum WwStatus ww_residual(const struct WwScenario *s, double tb, double *quad, double *closed);

/**
 * Waiting budget at which walk-then-wait and walk-all tie, searched on
 * `[lo, hi]`.
 *
 * # Safety
 * Handles must be live; `out` valid for writes.
 */
enum WwStatus ww_breakeven_tw(const struct WwScenario *s,
                              const struct WwDistribution *dist,
                              double lo,
                              double hi,
                              double *out);

/**
 * Stop-2 position at which walk-then-wait and walk-all tie, searched on
 * `[lo, hi]`.
 *
 * # Safety
 * Handles must be live; `out` valid for writes.
 */
enum WwStatus ww_breakeven_d2(const struct WwScenario *s,
                              const struct WwDistribution *dist,
                              double lo,
                              double hi,
                              double *out);

/**
 * Monte Carlo estimate for one strategy. Results depend only on `seed` and
 * `trials`, not on thread count.
 *
 * # Safety
 * Handles must be live; `out` valid for writes.
 */
enum WwStatus ww_run_mc(const struct WwScenario *s,
                        enum WwStrategy strategy,
                        const struct WwDistribution *dist,
                        uint64_t trials,
                        uint64_t seed,
                        struct WwSimStats *out);

/**
 * Two-bus renewal simulation with headway `tb`.
 *
 * # Safety
 * `s` must be live; `out` valid for writes.
 */
enum WwStatus ww_run_renewal(const struct WwScenario *s,
                             double tb,
                             uint64_t trials,
                             uint64_t seed,
                             struct WwRenewalStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WALKWAIT_H */

#ifndef INDOORDIM_H
#define INDOORDIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum IndoordimStatus {
  INDOORDIM_STATUS_OK = 0,
  INDOORDIM_STATUS_NULL_POINTER = 1,
  INDOORDIM_STATUS_INVALID_UTF8 = 2,
  INDOORDIM_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Scenario failed validation; the message names the key.
   */
  INDOORDIM_STATUS_CONFIG = 4,
  /**
   * Scenario text could not be parsed.
   */
  INDOORDIM_STATUS_PARSE = 5,
  INDOORDIM_STATUS_SINGULAR_CHANNEL = 6,
  INDOORDIM_STATUS_REDRAW_LIMIT = 7,
  INDOORDIM_STATUS_IO = 8,
  INDOORDIM_STATUS_OUT_OF_RANGE = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  INDOORDIM_STATUS_PANIC = 10,
} IndoordimStatus;

typedef enum IndoordimSystem {
  INDOORDIM_SYSTEM_WIFI_BASELINE = 0,
  INDOORDIM_SYSTEM_WIFI_AGGRESSIVE = 1,
  INDOORDIM_SYSTEM_STATIC = 2,
  INDOORDIM_SYSTEM_ZF_IDEAL = 3,
  INDOORDIM_SYSTEM_ZF_ERRONEOUS = 4,
} IndoordimSystem;

/**
 * Opaque dimensioning result handle.
 */
typedef struct IndoordimDimensioning IndoordimDimensioning;

/**
 * Opaque scenario handle.
 */
typedef struct IndoordimScenario IndoordimScenario;

/**
 * Mean with a 95% confidence interval.
 */
typedef struct IndoordimEstimate {
  double mean;
  double halfwidth;
  double lower;
  double upper;
  uint64_t n;
} IndoordimEstimate;

/**
 * Estimates for one system on one deployment.
 */
typedef struct IndoordimDeployment {
  uint32_t nx;
  uint32_t ny;
  uint32_t ap_count;
  /**
   * APs/km^2.
   */
  double ap_density;
  /**
   * Channels in use, 0 for zero-forcing.
   */
  uint32_t k;
  /**
   * Area throughput, Mbps/km^2.
   */
  struct IndoordimEstimate throughput;
  /**
   * Outage proportion over served users.
   */
  struct IndoordimEstimate outage;
  /**
   * Mbps/user.
   */
  double mu;
  /**
   * GB/month/user.
   */
  double demand;
  bool outage_ok;
  uint64_t redraws;
  uint64_t solver_fallbacks;
} IndoordimDeployment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *indoordim_last_error(void);

/**
 * Creates a scenario from a built-in preset name.
 *
 * # Safety
 * `name` must be a valid C string and `out` a valid pointer.
 */
enum IndoordimStatus indoordim_scenario_from_preset(const char *name,
                                                    struct IndoordimScenario **out);

/**
 * Parses and validates a TOML scenario.
 *
 * # Safety
 * `text` must be a valid C string and `out` a valid pointer.
 */
enum IndoordimStatus indoordim_scenario_from_toml(const char *text, struct IndoordimScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from this library, freed once.
 */
void indoordim_scenario_free(struct IndoordimScenario *scenario);

/**
 * Overrides the snapshot count and master seed.
 *
 * # Safety
 * `scenario` must be a valid handle.
 */
enum IndoordimStatus indoordim_scenario_set_engine(struct IndoordimScenario *scenario,
                                                   uint32_t n_snapshots,
                                                   uint64_t seed);

/**
 * Serializes the scenario to TOML. Release the string with
 * [`indoordim_string_free`].
 *
 * # Safety
 * `scenario` must be a valid handle and `out` a valid pointer.
 */
enum IndoordimStatus indoordim_scenario_to_toml(const struct IndoordimScenario *scenario,
                                                char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void indoordim_string_free(char *s);

/**
 * Evaluates one system on the `nx` x `ny` grid.
 *
 * # Safety
 * `scenario` must be a valid handle and `out` a valid pointer.
 */
enum IndoordimStatus indoordim_evaluate_deployment(const struct IndoordimScenario *scenario,
                                                   enum IndoordimSystem system,
                                                   uint32_t nx,
                                                   uint32_t ny,
                                                   struct IndoordimDeployment *out);

/**
 * Minimum AP count per demand point of the scenario's demand grid.
 *
 * # Safety
 * `scenario` must be a valid handle and `out` a valid pointer.
 */
enum IndoordimStatus indoordim_dimension(const struct IndoordimScenario *scenario,
                                         enum IndoordimSystem system,
                                         bool stop_early,
                                         struct IndoordimDimensioning **out);

/**
 * Number of demand points.
 *
 * # Safety
 * `result` must be null or a valid handle.
 */
size_t indoordim_dimensioning_len(const struct IndoordimDimensioning *result);

/**
 * AP count of the largest ladder rung.
 *
 * # Safety
 * `result` must be null or a valid handle.
 */
uint32_t indoordim_dimensioning_ladder_cap(const struct IndoordimDimensioning *result);

/**
 * Demand point `index`. `ap_count` is 0 when the demand is infeasible up to
 * the ladder cap.
 *
 * # Safety
 * `result` must be a valid handle; `demand` and `ap_count` valid pointers.
 */
enum IndoordimStatus indoordim_dimensioning_point(const struct IndoordimDimensioning *result,
                                                  size_t index,
                                                  double *demand,
                                                  uint32_t *ap_count);

/**
 * # Safety
 * `result` must be null or a handle from this library, freed once.
 */
void indoordim_dimensioning_free(struct IndoordimDimensioning *result);

/**
 * Multiwall pathloss in dB.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IndoordimStatus indoordim_path_loss_db(double l0_db,
                                            double alpha,
                                            double lw_db,
                                            double distance_m,
                                            uint32_t walls,
                                            double *out);

/**
 * Mbps/user to GB/month/user.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IndoordimStatus indoordim_throughput_to_demand(double mu_mbps_per_user,
                                                    double omega,
                                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INDOORDIM_H */

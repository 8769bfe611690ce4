/* C interface to the linkseg response-time library. */

#ifndef LINKSEG_H
#define LINKSEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef struct LinksegScenario LinksegScenario;

/**
 * Outcome of a call. Zero is success; everything else identifies the
 * failure class.
 */
typedef enum {
  LINKSEG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  LINKSEG_STATUS_NULL_POINTER = 1,
  /**
   * An argument was outside its domain.
   */
  LINKSEG_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Offered load at or beyond saturation; no steady state exists.
   */
  LINKSEG_STATUS_UNSTABLE = 3,
  /**
   * The segmentation series did not converge within its term budget.
   */
  LINKSEG_STATUS_TRUNCATION = 4,
  /**
   * Every point of the optimization grid was unstable.
   */
  LINKSEG_STATUS_NO_STABLE_POINT = 5,
  /**
   * File input or output failed.
   */
  LINKSEG_STATUS_IO = 6,
  /**
   * Internal failure inside the library.
   */
  LINKSEG_STATUS_INTERNAL = 7,
} LinksegStatus;

/**
 * Closed-form segmentation and queueing metrics for one scenario.
 *
 * Sizes are in bytes, times in seconds; `load` and `edge_probability`
 * are dimensionless.
 */
typedef struct {
  /**
   * Probability that a packet is a message's final (edge) packet.
   */
  double edge_probability;
  /**
   * Mean packet payload, bytes.
   */
  double mean_packet;
  /**
   * Packet payload variance, bytes squared.
   */
  double packet_variance;
  /**
   * Mean packets per message.
   */
  double mean_batch;
  /**
   * Second moment of packets per message.
   */
  double mean_batch_sq;
  /**
   * Mean packet service time, seconds.
   */
  double es;
  /**
   * Second moment of packet service time, seconds squared.
   */
  double es2;
  /**
   * Offered load; must stay below 1 for stability.
   */
  double load;
  /**
   * Mean queueing delay, seconds.
   */
  double ew1;
  /**
   * Mean segmentation delay, seconds.
   */
  double ew2;
  /**
   * Mean waiting time, seconds.
   */
  double ew;
  /**
   * Mean response time, seconds.
   */
  double er;
} LinksegMetrics;

/**
 * Simulation estimates with half-widths of the configured two-sided
 * confidence intervals.
 */
typedef struct {
  double mean_w1;
  double hw_w1;
  double mean_w2;
  double hw_w2;
  double mean_r_composed;
  double hw_r_composed;
  double mean_r_packet;
  double hw_r_packet;
  double utilization;
  /**
   * Total measured messages across replications.
   */
  uint64_t messages;
} LinksegSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a scenario with a fixed message size (bytes).
 */
LinksegStatus linkseg_scenario_deterministic(double message_size,
                                             double payload,
                                             double capacity_bytes_per_sec,
                                             double header_bytes,
                                             double lambda,
                                             LinksegScenario **out);

/**
 * Creates a scenario with exponentially distributed message sizes.
 */
LinksegStatus linkseg_scenario_exponential(double mean_size,
                                           double payload,
                                           double capacity_bytes_per_sec,
                                           double header_bytes,
                                           double lambda,
                                           LinksegScenario **out);

/**
 * Creates a scenario with lognormal message sizes given log-space
 * parameters.
 */
LinksegStatus linkseg_scenario_lognormal(double mu,
                                         double sigma,
                                         double payload,
                                         double capacity_bytes_per_sec,
                                         double header_bytes,
                                         double lambda,
                                         LinksegScenario **out);

/**
 * Creates a scenario with lognormal message sizes given the target mean
 * and standard deviation (bytes).
 */
LinksegStatus linkseg_scenario_lognormal_from_moments(double mean_size,
                                                      double std_size,
                                                      double payload,
                                                      double capacity_bytes_per_sec,
                                                      double header_bytes,
                                                      double lambda,
                                                      LinksegScenario **out);

/**
 * Creates a scenario whose message sizes are drawn uniformly from the
 * given sample (treated as the exact population). The sample is copied.
 */
LinksegStatus linkseg_scenario_empirical(const double *sizes,
                                         uintptr_t len,
                                         double payload,
                                         double capacity_bytes_per_sec,
                                         double header_bytes,
                                         double lambda,
                                         LinksegScenario **out);

/**
 * Replaces the series tolerance (relative tolerance and term budget).
 */
LinksegStatus linkseg_scenario_set_tolerance(LinksegScenario *scenario,
                                             double eps_rel,
                                             uint64_t n_max);

/**
 * Replaces the payload size (bytes).
 */
LinksegStatus linkseg_scenario_set_payload(LinksegScenario *scenario, double payload);

/**
 * Computes the closed-form metrics. Unstable scenarios still fill the
 * segmentation and service fields; the waiting-time fields are NaN and
 * the status is `UNSTABLE`.
 */
LinksegStatus linkseg_analyze(const LinksegScenario *scenario, LinksegMetrics *out);

/**
 * Runs the discrete-event simulation oracle for the scenario.
 */
LinksegStatus linkseg_simulate(const LinksegScenario *scenario,
                               uint64_t warmup_messages,
                               uint64_t measured_messages,
                               uint32_t replications,
                               uint64_t base_seed,
                               double confidence_level,
                               LinksegSimResult *out);

/**
 * Finds the payload size minimizing the mean response time over a
 * strictly increasing grid, then `refine_iters` local refinement rounds.
 */
LinksegStatus linkseg_optimize(const LinksegScenario *scenario,
                               const double *grid,
                               uintptr_t grid_len,
                               uint32_t refine_iters,
                               double *best_payload,
                               double *best_er);

/**
 * Releases a scenario handle. Null is acceptable and ignored.
 */
void linkseg_scenario_free(LinksegScenario *scenario);

/**
 * Returns a static, nul-terminated description of a status code.
 */
const char *linkseg_status_describe(LinksegStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINKSEG_H */

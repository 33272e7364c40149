#ifndef AQUANNR_H
#define AQUANNR_H

#include <stddef.h>
#include <stdint.h>

// Result code of every call.
typedef enum AqStatus {
  AQ_STATUS_OK = 0,
  // A required pointer argument was null.
  AQ_STATUS_NULL_POINTER = 1,
  // Malformed input: non-finite values, bad ordering, bad text.
  AQ_STATUS_INVALID_ARGUMENT = 2,
  // Input outside the mathematical domain of the operation.
  AQ_STATUS_DOMAIN = 3,
  // Not enough history for the requested estimate.
  AQ_STATUS_INSUFFICIENT_DATA = 4,
  // Invalid configuration value or key.
  AQ_STATUS_CONFIG = 5,
  // The operation failed for another reason.
  AQ_STATUS_FAILED = 6,
  // An internal panic was caught at the boundary.
  AQ_STATUS_PANIC = 7,
} AqStatus;

// Exponential moving average.
typedef struct AqEma AqEma;

// Online nearest-neighbor-regression predictor over one SNR series.
typedef struct AqNnrPredictor AqNnrPredictor;

// Streaming mean and variance.
typedef struct AqRunningStats AqRunningStats;

// Acoustic link parameters.
typedef struct AqChannelParams {
  double tx_power_w;
  double carrier_khz;
  double spreading_exponent;
  double noise_psd_w_per_hz;
  double bandwidth_hz;
} AqChannelParams;

// Outcome of one simulation run.
typedef struct AqSimMetrics {
  double packet_delivery_ratio;
  // NaN when nothing was delivered.
  double avg_end_to_end_delay;
  // Infinite when nothing was delivered.
  double avg_energy_per_delivered_packet;
  uint64_t packets_sent;
  uint64_t packets_delivered;
  double total_energy;
} AqSimMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *aq_last_error(void);

// Library version as a static NUL-terminated string.
const char *aq_version(void);

// Creates a predictor with window length `window` and `k` neighbors.
//
// # Safety
// `out` must be valid for writes.
enum AqStatus aq_nnr_new(size_t window, size_t k, struct AqNnrPredictor **out);

// Enables history compression: once `storage_limit` samples are stored,
// the oldest `fraction` of them is folded into one summary sample.
//
// # Safety
// `p` must come from [`aq_nnr_new`].
enum AqStatus aq_nnr_set_compression(struct AqNnrPredictor *p,
                                     size_t storage_limit,
                                     double fraction);

// Appends a sample; `time` must exceed the previous sample's time.
//
// # Safety
// `p` must come from [`aq_nnr_new`].
enum AqStatus aq_nnr_push(struct AqNnrPredictor *p, double time, double snr_db);

// Predicts the next sample.
//
// # Safety
// `p` must come from [`aq_nnr_new`]; `out` must be valid for writes.
enum AqStatus aq_nnr_predict(struct AqNnrPredictor *p, double *out);

// Number of stored samples.
//
// # Safety
// `p` must come from [`aq_nnr_new`]; `out` must be valid for writes.
enum AqStatus aq_nnr_len(struct AqNnrPredictor *p, size_t *out);

// Releases a predictor; null is ignored.
//
// # Safety
// `p` must come from [`aq_nnr_new`] and not be used afterwards.
void aq_nnr_free(struct AqNnrPredictor *p);

// # Safety
// `out` must be valid for writes.
enum AqStatus aq_stats_new(struct AqRunningStats **out);

// # Safety
// `s` must come from [`aq_stats_new`].
enum AqStatus aq_stats_update(struct AqRunningStats *s, double x);

// # Safety
// `s` must come from [`aq_stats_new`]; `out` must be valid for writes.
enum AqStatus aq_stats_count(struct AqRunningStats *s, uint64_t *out);

// Fails with `InsufficientData` before the first sample.
//
// # Safety
// `s` must come from [`aq_stats_new`]; `out` must be valid for writes.
enum AqStatus aq_stats_mean(struct AqRunningStats *s, double *out);

// Sample variance; fails with `InsufficientData` below two samples.
//
// # Safety
// `s` must come from [`aq_stats_new`]; `out` must be valid for writes.
enum AqStatus aq_stats_variance(struct AqRunningStats *s, double *out);

// # Safety
// `s` must come from [`aq_stats_new`] and not be used afterwards.
void aq_stats_free(struct AqRunningStats *s);

// `alpha` must lie in (0, 1].
//
// # Safety
// `out` must be valid for writes.
enum AqStatus aq_ema_new(double alpha, struct AqEma **out);

// # Safety
// `e` must come from [`aq_ema_new`].
enum AqStatus aq_ema_update(struct AqEma *e, double y);

// Fails with `InsufficientData` before the first sample.
//
// # Safety
// `e` must come from [`aq_ema_new`]; `out` must be valid for writes.
enum AqStatus aq_ema_predict(struct AqEma *e, double *out);

// # Safety
// `e` must come from [`aq_ema_new`] and not be used afterwards.
void aq_ema_free(struct AqEma *e);

// Fills `out` with the default channel parameters.
//
// # Safety
// `out` must be valid for writes.
enum AqStatus aq_channel_default(struct AqChannelParams *out);

// Absorption in dB/km at `f_khz`.
//
// # Safety
// `out` must be valid for writes.
enum AqStatus aq_absorption_db_per_km(double f_khz, double *out);

// Mean SNR in dB at `distance_m` meters.
//
// # Safety
// `params` must point to readable parameters; `out` must be valid for writes.
enum AqStatus aq_snr_db(const struct AqChannelParams *params, double distance_m, double *out);

// Probability that a packet of `bits` bits arrives intact at linear SNR
// `snr_linear`.
//
// # Safety
// `out` must be valid for writes.
enum AqStatus aq_packet_success_prob(double snr_linear, uint32_t bits, double *out);

// Runs one simulation configured by `key = value` lines applied over the
// defaults. Lines starting with `#` and blank lines are ignored.
//
// # Safety
// `config` must be a NUL-terminated string or null (defaults only); `out`
// must be valid for writes.
enum AqStatus aq_sim_run(const char *config, struct AqSimMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AQUANNR_H */

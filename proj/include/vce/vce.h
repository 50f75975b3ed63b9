#ifndef VCE_H
#define VCE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible function returns one of these; on failure
 * vce_last_error() carries a one-line diagnostic for the calling thread. */
#define VCE_OK 0
#define VCE_ERR_INVALID_ARGUMENT 1
#define VCE_ERR_VALIDATION 2
#define VCE_ERR_PARSE 3
#define VCE_ERR_IO 4
#define VCE_ERR_INFEASIBLE 5
#define VCE_ERR_INTERNAL 6

const char* vce_version(void);
const char* vce_status_name(int status);

/* Message of the last failure on this thread; valid until the next failing
 * call. Empty string when nothing failed yet. */
const char* vce_last_error(void);
/* 1-based input line of the last parse/validation failure, -1 when the
 * failure had no line context. */
int64_t vce_last_error_line(void);

/* Canonical number rendering used by every file format: %.9g with negative
 * zero folded to "0". Needs cap >= 24. */
int vce_format_double(double value, char* buf, size_t cap);

/* ---- run configuration -------------------------------------------------- */

typedef struct vce_config vce_config_t;

int vce_config_create(vce_config_t** out); /* defaults */
int vce_config_read(const char* path, vce_config_t** out);
int vce_config_write(const vce_config_t* config, const char* path);
/* Sets one key to its textual value, e.g. ("seed", "7") or
 * ("dwell_frames", "13,20,826,8786,2083"). Unknown keys are errors; range
 * checks happen in vce_config_validate. */
int vce_config_set(vce_config_t* config, const char* key, const char* value);
/* Fetches one key in the same textual form the config file uses. */
int vce_config_get(const vce_config_t* config, const char* key, char* buf, size_t cap);
int vce_config_validate(const vce_config_t* config);
void vce_config_free(vce_config_t* config);

/* ---- model -------------------------------------------------------------- */

/* Organ indices used across the API: 0 mouth, 1 esophagus, 2 stomach,
 * 3 small intestine, 4 colon. Matrices are row-major 5x5. */

typedef struct vce_hmm vce_hmm_t;

int vce_hmm_create(const double pi[5], const double trans[25], const double emit[25],
                   vce_hmm_t** out);
/* Geometric-dwell transitions from mean dwell frames, diagonal-dominant
 * emissions, capsule starting in the mouth. */
int vce_hmm_from_dwell(const double dwell_frames[5], double emission_diagonal, vce_hmm_t** out);
int vce_hmm_from_config(const vce_config_t* config, vce_hmm_t** out);
/* Copies out any of the three blocks; pass NULL for the ones not wanted. */
int vce_hmm_get(const vce_hmm_t* hmm, double pi[5], double trans[25], double emit[25]);
void vce_hmm_free(vce_hmm_t* hmm);

/* ---- posterior streams -------------------------------------------------- */

typedef struct vce_frame {
    int64_t frame_index;
    int64_t timestamp_ms;
    double organ_posterior[5];
    double anomaly_posterior;
} vce_frame;

typedef struct vce_frames vce_frames_t;

/* Validates per-frame invariants and frame-index monotonicity. */
int vce_frames_create(const vce_frame* frames, size_t count, vce_frames_t** out);
int vce_frames_read(const char* path, vce_frames_t** out);
int vce_frames_write(const vce_frames_t* frames, const char* path);
size_t vce_frames_size(const vce_frames_t* frames);
int vce_frames_get(const vce_frames_t* frames, size_t index, vce_frame* out);
void vce_frames_free(vce_frames_t* frames);

/* ---- traversals --------------------------------------------------------- */

typedef struct vce_traversal vce_traversal_t;

/* Draws one full mouth-to-colon traversal. fixed_dwell 0 samples geometric
 * dwells with the given means, 1 holds each organ for round(mean) frames. */
int vce_traversal_generate(const double dwell_frames[5], int fixed_dwell,
                           double anomaly_rate_in_si, uint64_t seed, vce_traversal_t** out);
int vce_labels_read(const char* path, vce_traversal_t** out);
int vce_labels_write(const vce_traversal_t* traversal, const char* path);
size_t vce_traversal_size(const vce_traversal_t* traversal);
int vce_traversal_get(const vce_traversal_t* traversal, size_t index, int64_t* frame_index,
                      int* organ, int* anomaly);
/* First small-intestine frame index, -1 when the labels never reach it. */
int64_t vce_traversal_entry_frame(const vce_traversal_t* traversal);
void vce_traversal_free(vce_traversal_t* traversal);

/* Synthesizes noisy classifier output for a traversal. Emission rows come
 * from the model; each frame's argmax matches its sampled symbol. */
int vce_corrupt_to_posteriors(const vce_traversal_t* traversal, const vce_hmm_t* hmm,
                              double anomaly_sensitivity, double anomaly_false_positive,
                              uint64_t seed, int64_t frame_period_ms, vce_frames_t** out);

/* ---- decoding ----------------------------------------------------------- */

typedef struct vce_decoded vce_decoded_t;

/* Maximum-probability organ sequence for the frames' argmax symbols. An
 * infeasible stream yields an empty feasible()==0 result, not an error. */
int vce_viterbi(const vce_hmm_t* hmm, const vce_frames_t* frames, vce_decoded_t** out);
int vce_decoded_read(const char* path, vce_decoded_t** out);
int vce_decoded_write(const vce_decoded_t* decoded, const char* path);
size_t vce_decoded_size(const vce_decoded_t* decoded);
int vce_decoded_get(const vce_decoded_t* decoded, size_t index, int64_t* frame_index, int* organ);
double vce_decoded_log_prob(const vce_decoded_t* decoded);
int vce_decoded_feasible(const vce_decoded_t* decoded);
void vce_decoded_free(vce_decoded_t* decoded);

/* ---- online filtering --------------------------------------------------- */

typedef struct vce_filter vce_filter_t;

int vce_filter_create(const vce_hmm_t* hmm, vce_filter_t** out);
int vce_filter_update(vce_filter_t* filter, int observed_organ);
int vce_filter_belief(const vce_filter_t* filter, double belief[5]);
/* P(small intestine or beyond) under the current belief. */
double vce_filter_entry_mass(const vce_filter_t* filter);
int vce_filter_degenerate(const vce_filter_t* filter);
int64_t vce_filter_frames_seen(const vce_filter_t* filter);
void vce_filter_free(vce_filter_t* filter);

/* ---- transmission gating ------------------------------------------------ */

typedef struct vce_gating_report {
    int has_true_entry;
    int64_t true_entry;
    int has_detected_entry;
    int64_t detected_entry;
    int64_t frames_suppressed;
    int64_t frames_transmitted;
    int has_si_frames_missed;
    int64_t si_frames_missed;
    double energy_spent;
    double energy_saved_vs_transmit_all;
} vce_gating_report;

/* Streams the frames through the forward filter and entry detector using the
 * config's threshold, hysteresis and energy model. truth may be NULL; the
 * truth-dependent fields are then absent. */
int vce_gate_run(const vce_hmm_t* hmm, const vce_frames_t* frames, const vce_config_t* config,
                 const vce_traversal_t* truth, vce_gating_report* out);
int vce_gating_report_write(const vce_gating_report* report, const char* path);
int vce_gating_report_read(const char* path, vce_gating_report* out);

/* Per-frame capture rates: base outside the small intestine, boosted inside
 * it while the anomaly posterior reaches the threshold. in_si holds one 0/1
 * per frame; rates_out receives count doubles. */
int vce_adapt_frame_rate(const vce_frames_t* frames, const int* in_si, size_t count,
                         double anomaly_threshold, double base_rate, double boosted_rate,
                         double* rates_out);

/* ---- task losses -------------------------------------------------------- */

/* value = sum_i exp(-log_sigma_i) * loss_i + log_sigma_i. Either gradient
 * output may be NULL. */
int vce_uw_loss(const double losses[2], const double log_sigma[2], double* value,
                double grad_log_sigma[2], double grad_losses[2]);

typedef struct vce_trace vce_trace_t;

int vce_trace_create(const double* loss_task1, const double* loss_task2, size_t epochs,
                     vce_trace_t** out);
int vce_trace_read(const char* path, vce_trace_t** out);
int vce_trace_write(const vce_trace_t* trace, const char* path);
int64_t vce_trace_epochs(const vce_trace_t* trace);
int vce_trace_get(const vce_trace_t* trace, int64_t epoch, double* loss_task1,
                  double* loss_task2);
void vce_trace_free(vce_trace_t* trace);

/* Dynamic weight average for 1-based epoch; the first two epochs are uniform
 * (1,1). Weights sum to 2. */
int vce_dwa_weights(const vce_trace_t* trace, double temperature, int64_t epoch,
                    double weights[2]);

/* -alpha_t (1-p_t)^gamma log(p_t) with p_t floored at 1e-12. alpha may be
 * NULL (all ones); grad (length count) and clamped may be NULL. */
int vce_focal_loss(const double* probabilities, size_t count, size_t true_class, double gamma,
                   const double* alpha, size_t alpha_count, double* value, double* grad,
                   int* clamped);
int vce_cross_entropy(const double* probabilities, size_t count, size_t true_class, double* value,
                      int* clamped);

/* ---- metrics ------------------------------------------------------------ */

#define VCE_AVERAGING_MACRO 0
#define VCE_AVERAGING_BINARY_POSITIVE 1

typedef struct vce_metrics {
    double accuracy;
    double precision;
    double recall;
    double f1;
    /* Classes whose precision or recall had a zero denominator. */
    int64_t flagged_classes[5];
    size_t num_flagged;
} vce_metrics;

/* counts is row-major num_classes x num_classes, true class per row. Binary
 * averaging reports class 1 of a 2x2 matrix. */
int vce_metrics_from_confusion(size_t num_classes, const int64_t* counts, int averaging,
                               vce_metrics* out);
/* Frame-aligned macro metrics of a decoded path against truth labels. */
int vce_eval_localization(const vce_decoded_t* decoded, const vce_traversal_t* truth,
                          vce_metrics* out);
/* Positive-class metrics of anomaly posteriors thresholded at 0.5. */
int vce_eval_anomaly(const vce_frames_t* frames, const vce_traversal_t* truth, vce_metrics* out);
/* Delimited table, header accuracy,f1,precision,recall plus one value row.
 * Needs cap >= 128. */
int vce_metrics_table(const vce_metrics* metrics, char* buf, size_t cap);
int vce_metrics_record_write(const vce_metrics* metrics, const char* path);

/* ---- confusion count files ---------------------------------------------- */

int vce_confusion_read(const char* path, int64_t counts[25]);
int vce_confusion_write(const char* path, const int64_t counts[25]);

/* ---- dataset manifests -------------------------------------------------- */

typedef struct vce_manifest vce_manifest_t;

int vce_manifest_read(const char* path, vce_manifest_t** out);
int vce_manifest_write(const vce_manifest_t* manifest, const char* path);
size_t vce_manifest_size(const vce_manifest_t* manifest);
void vce_manifest_free(vce_manifest_t* manifest);

/* Binarize -> rebalance -> 70/30 split; writes rebalanced.csv, train.csv,
 * val.csv, distribution.csv, pathologies.csv and report.txt under out_dir. */
int vce_rebalance_pipeline(const vce_manifest_t* manifest, uint64_t seed, const char* out_dir);

/* ---- experiments -------------------------------------------------------- */

/* Full seeded simulation: per-patient traversal, posteriors, decode, gate.
 * Writes config.txt, summary.csv, aggregate metrics and per-patient files
 * under out_dir. Deterministic for a given config. */
int vce_simulate(const vce_config_t* config, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* VCE_H */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "domain.hpp"
#include "hmm.hpp"

namespace vce {

struct PatientProfile {
    std::array<double, kNumOrgans> mean_dwell_frames{13.0, 20.0, 826.0, 8786.0, 2083.0};
    double anomaly_rate_in_si = 0.02;
    std::uint64_t seed = 0;
    // Fixed-length dwells instead of geometric; exercises model mismatch.
    bool fixed_dwell = false;
};

struct TraversalRecord {
    std::vector<LabelFrame> labels;
    std::int64_t entry_frame = -1;  // first small-intestine frame, -1 if absent
};

// Draws one full mouth-to-colon traversal: every organ visited in order for at
// least one frame, dwell lengths geometric (or fixed) with the given means,
// anomaly flags drawn per-frame inside the small intestine.
TraversalRecord generate_traversal(const PatientProfile& profile);

// Wraps validated labels (e.g. read from a file) into a record, locating the
// small-intestine entry frame; -1 when the labels never reach it.
TraversalRecord traversal_from_labels(std::vector<LabelFrame> labels);

// Turns ground truth into noisy classifier output. Each frame samples an
// observed organ symbol from the true state's emission row; the posterior is
// built so its argmax is exactly that symbol. Anomaly posterior lands above
// 0.5 with probability `anomaly_sensitivity` on anomalous frames and
// `anomaly_false_positive` on normal ones.
std::vector<PosteriorFrame> corrupt_to_posteriors(const TraversalRecord& record,
                                                  const ProbabilityMatrix& emissions,
                                                  double anomaly_sensitivity,
                                                  double anomaly_false_positive,
                                                  std::uint64_t seed,
                                                  std::int64_t frame_period_ms = 500);

struct EnergyModel {
    double cost_capture = 1.0;
    double cost_transmit = 10.0;
    double battery_budget = 200000.0;

    void validate() const;
};

struct GatingPolicy {
    double threshold = 0.95;
    int hysteresis = 5;
};

struct GatingReport {
    std::optional<std::int64_t> true_entry;
    std::optional<std::int64_t> detected_entry;
    std::int64_t frames_suppressed = 0;
    std::int64_t frames_transmitted = 0;
    std::optional<std::int64_t> si_frames_missed;
    double energy_spent = 0.0;
    double energy_saved_vs_transmit_all = 0.0;
};

// Streams frames through the forward filter and entry detector; frames before
// the detected entry are suppressed (capture cost only), the rest transmitted
// (capture + transmit). Truth may be null when no ground truth exists; the
// truth-dependent report fields are then absent.
GatingReport run_gating(std::span<const PosteriorFrame> frames, const GiHmm& model,
                        const GatingPolicy& policy, const EnergyModel& energy,
                        const TraversalRecord* truth = nullptr);

// Frame-rate schedule: base rate outside the small intestine; inside it,
// boosted while the anomaly posterior reaches the threshold.
std::vector<double> adapt_frame_rate(std::span<const PosteriorFrame> frames,
                                     std::span<const bool> in_si, double anomaly_threshold,
                                     double base_rate, double boosted_rate);

}  // namespace vce

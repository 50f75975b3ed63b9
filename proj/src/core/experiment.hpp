#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "io.hpp"

namespace vce {

// Builds the decoding model a configuration describes: initial distribution,
// geometric-dwell transitions, and emissions either synthesized from the
// diagonal or estimated from a confusion-count file.
GiHmm model_from_config(const RunConfig& config);

struct SimulationSummaryRow {
    std::int64_t patient = 0;
    std::int64_t frames = 0;
    std::int64_t true_entry = 0;
    std::int64_t detected_entry = -1;  // -1 = never detected
    std::int64_t si_frames_total = 0;
    std::int64_t si_frames_missed = 0;
    std::int64_t frames_suppressed = 0;
    std::int64_t frames_transmitted = 0;
    double energy_spent = 0.0;
    double energy_saved = 0.0;
    double accuracy_argmax = 0.0;
    double accuracy_viterbi = 0.0;
};

struct SimulationResult {
    std::vector<SimulationSummaryRow> rows;
    MetricsSummary localization;  // macro metrics of the decoded paths, all patients
    MetricsSummary anomaly;       // positive-class metrics of thresholded anomaly posteriors
};

// Full seeded experiment: per patient, generate a traversal, corrupt it to
// posteriors, decode, gate, and evaluate. Writes config.txt, summary.csv,
// aggregate metrics, and a per-patient directory with truth/posteriors/
// decoded/gating files. Patients run sequentially so output is byte-stable.
SimulationResult run_simulation_experiment(const RunConfig& config,
                                           const std::filesystem::path& out_dir);

struct RebalancePipelineResult {
    BinarizeResult input_stats;   // pre-rebalance counts per pathology
    RebalanceResult rebalanced;
    SplitResult subsets;          // 70/30 split of the rebalanced manifest
};

// Binarize -> rebalance -> split; writes rebalanced.csv, train.csv, val.csv,
// distribution.csv, pathologies.csv, and report.txt under out_dir.
RebalancePipelineResult run_rebalance_pipeline(const FrameManifest& manifest, std::uint64_t seed,
                                               const std::filesystem::path& out_dir);

// Frame-aligned comparison of a decoded path against truth labels.
MetricsSummary evaluate_localization(const DecodedFile& pred, std::span<const LabelFrame> truth);

// Anomaly posteriors thresholded at 0.5 against the truth anomaly flags.
MetricsSummary evaluate_anomaly(std::span<const PosteriorFrame> pred,
                                std::span<const LabelFrame> truth);

}  // namespace vce

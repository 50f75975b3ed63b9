#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "domain.hpp"
#include "hmm.hpp"
#include "metrics.hpp"
#include "mtl.hpp"
#include "simulator.hpp"

namespace vce {

// Canonical number rendering: %.9g, negative zero folded to "0". Every
// probability and energy value in the file formats goes through this, so
// round-trips are exact at 9 significant digits.
std::string format_double(double value);

// Writes the exact bytes (binary mode, no newline translation).
void write_text_file(const std::filesystem::path& path, const std::string& content);

// ---- posterior streams ----------------------------------------------------
// CSV with header
// frame_index,timestamp_ms,p_mouth,p_esophagus,p_stomach,p_small_intestine,p_colon,p_anomaly

void write_posterior_stream(const std::filesystem::path& path,
                            std::span<const PosteriorFrame> frames);
std::vector<PosteriorFrame> read_posterior_stream(const std::filesystem::path& path);

// ---- traversal labels ------------------------------------------------------
// CSV with header frame_index,organ,anomaly; organ is the lowercase name,
// anomaly is 0/1. Read enforces the anatomical ordering invariants.

void write_labels(const std::filesystem::path& path, std::span<const LabelFrame> labels);
std::vector<LabelFrame> read_labels(const std::filesystem::path& path);

// ---- confusion counts ------------------------------------------------------
// Five comma-separated integer rows, true organ per row, predicted organ per
// column; '#' comment lines are skipped and the writer documents the
// orientation in them.

void write_confusion(const std::filesystem::path& path, const ConfusionCounts5& counts);
ConfusionCounts5 read_confusion(const std::filesystem::path& path);

// ---- decoded paths ---------------------------------------------------------
// CSV rows frame_index,organ followed by a footer line `# log_prob = <v>`.
// An infeasible decode has no rows and log_prob -inf.

struct DecodedFile {
    std::vector<std::int64_t> frame_indices;
    std::vector<Organ> organs;
    double log_prob = 0.0;
};

void write_decoded(const std::filesystem::path& path, std::span<const std::int64_t> frame_indices,
                   std::span<const Organ> organs, double log_prob);
DecodedFile read_decoded(const std::filesystem::path& path);

// ---- loss traces -----------------------------------------------------------
// CSV with header epoch,loss_task1,loss_task2; epochs must run 1..E in order.

void write_loss_trace(const std::filesystem::path& path, const LossTrace& trace);
LossTrace read_loss_trace(const std::filesystem::path& path);

// ---- gating reports --------------------------------------------------------
// Flat `key = value` record; absent optional fields serialize as `none`.

void write_gating_report(const std::filesystem::path& path, const GatingReport& report);
GatingReport read_gating_report(const std::filesystem::path& path);

// ---- manifests -------------------------------------------------------------
// CSV with header patient_id,frame_index,organ,pathology_tag; empty tag means
// no pathology. Commas are not permitted inside ids or tags.

void write_manifest(const std::filesystem::path& path, const FrameManifest& manifest);
FrameManifest read_manifest(const std::filesystem::path& path);

// ---- distribution reports --------------------------------------------------
// CSV with header subset,mouth,esophagus,stomach,small_intestine,colon,negative,positive,total

void write_distribution_report(const std::filesystem::path& path,
                               std::span<const DistributionRow> rows);

// ---- metrics ---------------------------------------------------------------
// Table layout: header accuracy,f1,precision,recall plus one value row.
// Record layout: `key = value` lines plus flagged class indices.

std::string metrics_table_string(const MetricsSummary& metrics);
std::string metrics_record_string(const MetricsSummary& metrics);
void write_metrics_table(const std::filesystem::path& path, const MetricsSummary& metrics);
void write_metrics_record(const std::filesystem::path& path, const MetricsSummary& metrics);

// ---- run configuration -----------------------------------------------------

enum class DwellModel { geometric, fixed };

struct RunConfig {
    std::uint64_t seed = 7;
    std::int64_t patients = 100;
    // Expected frames per organ; the defaults are per-patient means of a
    // 20-patient test cohort at 2 frames/s.
    std::array<double, kNumOrgans> dwell_frames{13.0, 20.0, 826.0, 8786.0, 2083.0};
    DwellModel dwell_model = DwellModel::geometric;
    std::array<double, kNumOrgans> initial_distribution{1.0, 0.0, 0.0, 0.0, 0.0};
    double emission_diagonal = 0.85;
    std::string confusion_path;  // empty = synthesize from emission_diagonal
    double anomaly_rate_in_si = 0.02;
    double anomaly_sensitivity = 0.9;
    double anomaly_false_positive = 0.05;
    std::int64_t frame_period_ms = 500;
    double entry_threshold = 0.95;
    std::int64_t entry_hysteresis = 5;
    double cost_capture = 1.0;
    double cost_transmit = 10.0;
    double battery_budget = 200000.0;

    void validate() const;
};

// Parses and assigns one `key = value` pair; unknown keys and malformed
// values are errors. Range rules are enforced by validate(), not here.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

std::string run_config_string(const RunConfig& config);
void write_run_config(const std::filesystem::path& path, const RunConfig& config);
RunConfig read_run_config(const std::filesystem::path& path);  // validates

}  // namespace vce

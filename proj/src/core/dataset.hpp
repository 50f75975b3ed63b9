#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "domain.hpp"

namespace vce {

struct ManifestEntry {
    std::string patient_id;
    std::int64_t frame_index = 0;
    Organ organ = Organ::Mouth;
    std::string pathology_tag;  // empty = no pathology

    bool anomaly() const { return !pathology_tag.empty(); }
};

// Frame-index manifest; the rebalancing pipeline never touches images.
struct FrameManifest {
    std::vector<ManifestEntry> entries;

    // Enforces (patient_id, frame_index) uniqueness.
    void validate() const;
};

struct BinarizeResult {
    FrameManifest manifest;
    // Positive counts per pathology tag, the provenance the binary label drops.
    std::map<std::string, std::int64_t> pathology_counts;
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
};

// Collapses pathology tags into a single anomaly flag (tag present = positive).
BinarizeResult binarize_anomalies(const FrameManifest& manifest);

struct RebalanceResult {
    FrameManifest manifest;
    // Set when the protected classes alone keep negatives above 1.01x the
    // positives, so a 1:1 ratio is unreachable; all positives are kept and
    // achieved_ratio reports the best possible balance.
    bool insufficient_positives = false;
    double achieved_ratio = 0.0;  // negatives : positives after rebalancing
};

// Balances negatives against positives to 1:1 within +/-1%. Mouth and
// Esophagus frames are never removed; surplus negatives are downsampled from
// the remaining organs, surplus positives pathology-stratified (proportional
// quotas, at least one frame per pathology when available). Selection is
// seeded and deterministic.
RebalanceResult rebalance(const FrameManifest& manifest, std::uint64_t seed);

struct DistributionRow {
    std::string subset;
    std::array<std::int64_t, kNumOrgans> organ_counts{};
    std::int64_t negatives = 0;
    std::int64_t positives = 0;
    std::int64_t total = 0;
};

struct SplitResult {
    FrameManifest train;
    FrameManifest val;
    std::vector<DistributionRow> summary;
};

// Seeded frame-level shuffle and split; |train| = round(first * N). Original
// row order is preserved within each subset.
SplitResult split(const FrameManifest& manifest, std::pair<double, double> ratio,
                  std::uint64_t seed);

// Per-subset organ and negative/positive counts (rows: train, val, total).
std::vector<DistributionRow> distribution_report(const SplitResult& result);

}  // namespace vce

#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "rng.hpp"

namespace vce {

void FrameManifest::validate() const {
    std::unordered_set<std::string> seen;
    seen.reserve(entries.size());
    for (const ManifestEntry& e : entries) {
        // \x1f cannot appear in a parsed patient id, so the key is unambiguous.
        std::string key = e.patient_id;
        key.push_back('\x1f');
        key += std::to_string(e.frame_index);
        if (!seen.insert(std::move(key)).second) {
            fail(Errc::duplicate_frame_index, "duplicate frame " +
                                                  std::to_string(e.frame_index) +
                                                  " for patient " + e.patient_id);
        }
    }
}

BinarizeResult binarize_anomalies(const FrameManifest& manifest) {
    manifest.validate();
    BinarizeResult out;
    out.manifest = manifest;
    for (const ManifestEntry& e : manifest.entries) {
        if (e.anomaly()) {
            ++out.pathology_counts[e.pathology_tag];
            ++out.positives;
        } else {
            ++out.negatives;
        }
    }
    return out;
}

namespace {

bool is_protected(const ManifestEntry& e) {
    return e.organ == Organ::Mouth || e.organ == Organ::Esophagus;
}

FrameManifest filter_entries(const FrameManifest& manifest, const std::vector<char>& keep) {
    FrameManifest out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (keep[i]) out.entries.push_back(manifest.entries[i]);
    }
    return out;
}

double ratio_of(std::int64_t negatives, std::int64_t positives) {
    if (positives == 0) {
        return negatives == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(negatives) / static_cast<double>(positives);
}

// Proportional quotas with largest-remainder rounding and a minimum of one
// frame per pathology when the budget allows. Groups are visited in
// lexicographic tag order so the outcome is deterministic.
std::map<std::string, std::int64_t> stratified_quotas(
    const std::map<std::string, std::vector<std::size_t>>& groups, std::int64_t target) {
    std::int64_t pool = 0;
    for (const auto& [tag, members] : groups) pool += static_cast<std::int64_t>(members.size());

    std::map<std::string, std::int64_t> quota;
    std::vector<std::pair<double, std::string>> remainders;
    std::int64_t assigned = 0;
    for (const auto& [tag, members] : groups) {
        const double ideal = static_cast<double>(target) *
                             static_cast<double>(members.size()) / static_cast<double>(pool);
        const auto base = static_cast<std::int64_t>(std::floor(ideal));
        quota[tag] = base;
        assigned += base;
        remainders.emplace_back(ideal - static_cast<double>(base), tag);
    }
    // Largest remainder first; ties go to the lexicographically smaller tag.
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < target; ++i) {
        ++quota[remainders[i % remainders.size()].second];
        ++assigned;
    }
    // Give starved pathologies one frame each by taking from the largest quota.
    for (const auto& [tag, members] : groups) {
        if (quota[tag] > 0 || members.empty()) continue;
        auto richest = quota.end();
        for (auto it = quota.begin(); it != quota.end(); ++it) {
            if (it->second >= 2 && (richest == quota.end() || it->second > richest->second)) {
                richest = it;
            }
        }
        if (richest == quota.end()) break;  // nothing left to redistribute
        --richest->second;
        ++quota[tag];
    }
    return quota;
}

}  // namespace

RebalanceResult rebalance(const FrameManifest& manifest, std::uint64_t seed) {
    manifest.validate();

    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t protected_negatives = 0;
    std::int64_t protected_positives = 0;
    for (const ManifestEntry& e : manifest.entries) {
        if (e.anomaly()) {
            ++positives;
            protected_positives += is_protected(e) ? 1 : 0;
        } else {
            ++negatives;
            protected_negatives += is_protected(e) ? 1 : 0;
        }
    }

    RebalanceResult out;
    const double ratio = ratio_of(negatives, positives);
    if (ratio >= 0.99 && ratio <= 1.01) {
        out.manifest = manifest;
        out.achieved_ratio = ratio;
        return out;
    }

    Rng rng(seed);
    std::vector<char> keep(manifest.entries.size(), 1);

    if (ratio > 1.01) {
        // Too many negatives: keep every positive and every protected frame,
        // downsample the rest of the negatives toward a 1:1 count.
        std::vector<std::size_t> cuttable;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            const ManifestEntry& e = manifest.entries[i];
            if (!e.anomaly() && !is_protected(e)) cuttable.push_back(i);
        }
        const std::int64_t target_cut =
            std::min<std::int64_t>(static_cast<std::int64_t>(cuttable.size()),
                                   std::max<std::int64_t>(0, negatives - positives));
        rng.shuffle(std::span<std::size_t>(cuttable));
        for (std::int64_t i = 0; i < target_cut; ++i) keep[cuttable[i]] = 0;
        const std::int64_t kept_negatives = negatives - target_cut;
        out.achieved_ratio = ratio_of(kept_negatives, positives);
        out.insufficient_positives = out.achieved_ratio > 1.01;
    } else {
        // Too many positives: keep every negative and every protected frame,
        // select positives per pathology so each keeps a proportional share.
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            const ManifestEntry& e = manifest.entries[i];
            if (e.anomaly() && !is_protected(e)) groups[e.pathology_tag].push_back(i);
        }
        const std::int64_t target_keep =
            std::max<std::int64_t>(0, negatives - protected_positives);
        std::int64_t cuttable_total = 0;
        for (const auto& [tag, members] : groups) {
            cuttable_total += static_cast<std::int64_t>(members.size());
        }
        if (target_keep >= cuttable_total) {
            // Nothing to cut; the protected positives alone already exceed the
            // negatives, or the imbalance is within the protected frames.
            out.achieved_ratio = ratio;
        } else {
            const auto quota = stratified_quotas(groups, target_keep);
            for (auto& [tag, members] : groups) {
                rng.shuffle(std::span<std::size_t>(members));
                for (std::size_t i = static_cast<std::size_t>(quota.at(tag));
                     i < members.size(); ++i) {
                    keep[members[i]] = 0;
                }
            }
            out.achieved_ratio = ratio_of(negatives, protected_positives + target_keep);
        }
    }

    out.manifest = filter_entries(manifest, keep);
    return out;
}

namespace {

DistributionRow count_row(std::string subset, const FrameManifest& manifest) {
    DistributionRow row;
    row.subset = std::move(subset);
    for (const ManifestEntry& e : manifest.entries) {
        ++row.organ_counts[static_cast<std::size_t>(e.organ)];
        ++(e.anomaly() ? row.positives : row.negatives);
        ++row.total;
    }
    return row;
}

DistributionRow sum_rows(const DistributionRow& a, const DistributionRow& b) {
    DistributionRow row;
    row.subset = "total";
    for (std::size_t i = 0; i < row.organ_counts.size(); ++i) {
        row.organ_counts[i] = a.organ_counts[i] + b.organ_counts[i];
    }
    row.negatives = a.negatives + b.negatives;
    row.positives = a.positives + b.positives;
    row.total = a.total + b.total;
    return row;
}

}  // namespace

SplitResult split(const FrameManifest& manifest, std::pair<double, double> ratio,
                  std::uint64_t seed) {
    manifest.validate();
    if (!(ratio.first > 0.0) || !(ratio.second > 0.0) ||
        std::abs(ratio.first + ratio.second - 1.0) > 1e-9) {
        fail(Errc::invalid_argument, "split ratio components must be positive and sum to 1");
    }

    const std::size_t n = manifest.entries.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const auto train_n = static_cast<std::size_t>(std::llround(
        ratio.first * static_cast<double>(n)));
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(
                                                           std::min(train_n, n)));
    std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(
                                                         std::min(train_n, n)),
                                     order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());

    SplitResult out;
    out.train.entries.reserve(train_idx.size());
    out.val.entries.reserve(val_idx.size());
    for (std::size_t i : train_idx) out.train.entries.push_back(manifest.entries[i]);
    for (std::size_t i : val_idx) out.val.entries.push_back(manifest.entries[i]);
    out.summary = distribution_report(out);
    return out;
}

std::vector<DistributionRow> distribution_report(const SplitResult& result) {
    std::vector<DistributionRow> rows;
    rows.push_back(count_row("train", result.train));
    rows.push_back(count_row("val", result.val));
    rows.push_back(sum_rows(rows[0], rows[1]));
    return rows;
}

}  // namespace vce

#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rng.hpp"

namespace vce {

TraversalRecord generate_traversal(const PatientProfile& profile) {
    for (double d : profile.mean_dwell_frames) {
        if (!std::isfinite(d) || d < 1.0) {
            fail(Errc::dwell_too_small, "mean dwell must be >= 1, got " + std::to_string(d));
        }
    }
    if (!std::isfinite(profile.anomaly_rate_in_si) || profile.anomaly_rate_in_si < 0.0 ||
        profile.anomaly_rate_in_si > 1.0) {
        fail(Errc::invalid_argument, "anomaly rate must lie in [0, 1]");
    }

    Rng rng(profile.seed);
    std::array<std::int64_t, kNumOrgans> dwell{};
    for (int i = 0; i < kNumOrgans; ++i) {
        if (profile.fixed_dwell) {
            dwell[i] = std::max<std::int64_t>(1, std::llround(profile.mean_dwell_frames[i]));
        } else {
            dwell[i] = rng.geometric_count(profile.mean_dwell_frames[i]);
        }
    }

    TraversalRecord record;
    std::int64_t frame = 0;
    for (int organ = 0; organ < kNumOrgans; ++organ) {
        for (std::int64_t k = 0; k < dwell[organ]; ++k, ++frame) {
            LabelFrame lf;
            lf.frame_index = frame;
            lf.organ = static_cast<Organ>(organ);
            lf.anomaly = organ == static_cast<int>(Organ::SmallIntestine) &&
                         rng.bernoulli(profile.anomaly_rate_in_si);
            record.labels.push_back(lf);
        }
        if (organ == static_cast<int>(Organ::SmallIntestine)) {
            record.entry_frame = frame - dwell[organ];
        }
    }
    validate_label_sequence(record.labels);
    return record;
}

TraversalRecord traversal_from_labels(std::vector<LabelFrame> labels) {
    validate_label_sequence(labels);
    TraversalRecord record;
    record.labels = std::move(labels);
    for (const LabelFrame& lf : record.labels) {
        if (lf.organ == Organ::SmallIntestine) {
            record.entry_frame = lf.frame_index;
            break;
        }
    }
    return record;
}

std::vector<PosteriorFrame> corrupt_to_posteriors(const TraversalRecord& record,
                                                  const ProbabilityMatrix& emissions,
                                                  double anomaly_sensitivity,
                                                  double anomaly_false_positive,
                                                  std::uint64_t seed,
                                                  std::int64_t frame_period_ms) {
    if (emissions.rows() != kNumOrgans || emissions.cols() != kNumOrgans) {
        fail(Errc::shape_error, "emissions must be 5x5");
    }
    for (double p : {anomaly_sensitivity, anomaly_false_positive}) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            fail(Errc::invalid_argument, "anomaly probabilities must lie in [0, 1]");
        }
    }
    if (frame_period_ms <= 0) {
        fail(Errc::invalid_argument, "frame period must be positive");
    }

    Rng rng(seed);
    std::vector<PosteriorFrame> frames;
    frames.reserve(record.labels.size());
    for (const LabelFrame& lf : record.labels) {
        const int organ = static_cast<int>(lf.organ);
        const int symbol = rng.categorical(emissions.row(organ));

        PosteriorFrame pf;
        pf.frame_index = lf.frame_index;
        pf.timestamp_ms = lf.frame_index * frame_period_ms;
        // Winner mass in [0.55, 0.95] guarantees the argmax is the symbol: the
        // other four organs share at most 0.45.
        const double winner = rng.uniform_range(0.55, 0.95);
        std::array<double, kNumOrgans - 1> shares{};
        double share_total = 0.0;
        for (double& s : shares) {
            s = rng.uniform_open();
            share_total += s;
        }
        for (int j = 0, k = 0; j < kNumOrgans; ++j) {
            pf.organ_posterior[j] =
                j == symbol ? winner : (1.0 - winner) * shares[k++] / share_total;
        }

        const bool says_anomalous =
            rng.bernoulli(lf.anomaly ? anomaly_sensitivity : anomaly_false_positive);
        pf.anomaly_posterior =
            says_anomalous ? 0.5 + 0.5 * rng.uniform_open() : 0.5 * rng.uniform();
        pf.validate();
        frames.push_back(pf);
    }
    return frames;
}

void EnergyModel::validate() const {
    for (double v : {cost_capture, cost_transmit, battery_budget}) {
        if (!std::isfinite(v) || v <= 0.0) {
            fail(Errc::invalid_argument, "energy model values must be positive");
        }
    }
}

GatingReport run_gating(std::span<const PosteriorFrame> frames, const GiHmm& model,
                        const GatingPolicy& policy, const EnergyModel& energy,
                        const TraversalRecord* truth) {
    validate_posterior_sequence(frames);
    energy.validate();
    if (truth != nullptr) {
        if (truth->labels.size() != frames.size()) {
            fail(Errc::length_mismatch, "truth has " + std::to_string(truth->labels.size()) +
                                            " frames, posteriors " +
                                            std::to_string(frames.size()));
        }
        for (std::size_t i = 0; i < frames.size(); ++i) {
            if (truth->labels[i].frame_index != frames[i].frame_index) {
                fail(Errc::invalid_argument,
                     "truth and posterior frame indices disagree at position " +
                         std::to_string(i));
            }
        }
    }

    GatingReport report;
    FilterState state = make_filter(model);
    EntryDetector detector(policy.threshold, policy.hysteresis);
    std::size_t detected_pos = frames.size();  // first transmitted position
    for (std::size_t i = 0; i < frames.size(); ++i) {
        state = forward_update(state, model, frames[i].argmax_organ());
        if (const auto hit = detector.push(state, frames[i].frame_index); hit.has_value()) {
            report.detected_entry = *hit;
            detected_pos = i;
            break;
        }
    }

    const auto total = static_cast<std::int64_t>(frames.size());
    report.frames_suppressed = static_cast<std::int64_t>(detected_pos);
    report.frames_transmitted = total - report.frames_suppressed;
    report.energy_spent = energy.cost_capture * static_cast<double>(total) +
                          energy.cost_transmit * static_cast<double>(report.frames_transmitted);
    report.energy_saved_vs_transmit_all =
        energy.cost_transmit * static_cast<double>(report.frames_suppressed);

    if (truth != nullptr) {
        if (truth->entry_frame >= 0) {
            report.true_entry = truth->entry_frame;
        }
        if (report.detected_entry.has_value()) {
            report.si_frames_missed =
                report.true_entry.has_value()
                    ? std::max<std::int64_t>(0, *report.detected_entry - *report.true_entry)
                    : 0;
        } else {
            std::int64_t si_total = 0;
            for (const LabelFrame& lf : truth->labels) {
                si_total += lf.organ == Organ::SmallIntestine ? 1 : 0;
            }
            report.si_frames_missed = si_total;
        }
    }
    return report;
}

std::vector<double> adapt_frame_rate(std::span<const PosteriorFrame> frames,
                                     std::span<const bool> in_si, double anomaly_threshold,
                                     double base_rate, double boosted_rate) {
    if (frames.size() != in_si.size()) {
        fail(Errc::length_mismatch, "in_si has " + std::to_string(in_si.size()) +
                                        " entries for " + std::to_string(frames.size()) +
                                        " frames");
    }
    if (!std::isfinite(base_rate) || !std::isfinite(boosted_rate) || base_rate <= 0.0 ||
        boosted_rate < base_rate) {
        fail(Errc::invalid_argument, "rates must be positive with boosted >= base");
    }
    if (!std::isfinite(anomaly_threshold) || anomaly_threshold < 0.0 || anomaly_threshold > 1.0) {
        fail(Errc::invalid_argument, "anomaly threshold must lie in [0, 1]");
    }
    std::vector<double> rates(frames.size(), base_rate);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (in_si[i] && frames[i].anomaly_posterior >= anomaly_threshold) {
            rates[i] = boosted_rate;
        }
    }
    return rates;
}

}  // namespace vce

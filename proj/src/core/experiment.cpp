#include "experiment.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "rng.hpp"

namespace vce {

namespace fs = std::filesystem;

GiHmm model_from_config(const RunConfig& config) {
    config.validate();
    ProbabilityMatrix emissions =
        config.confusion_path.empty()
            ? make_diagonal_emissions(config.emission_diagonal)
            : estimate_emissions(read_confusion(config.confusion_path));
    return GiHmm::create(config.initial_distribution,
                         build_transitions(config.dwell_frames), std::move(emissions));
}

namespace {

std::string patient_dir_name(std::int64_t patient) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "patient_%04lld", static_cast<long long>(patient));
    return buf;
}

std::string summary_csv_string(const std::vector<SimulationSummaryRow>& rows) {
    std::string out(
        "patient,frames,true_entry,detected_entry,si_frames_total,si_frames_missed,"
        "frames_suppressed,frames_transmitted,energy_spent,energy_saved,"
        "accuracy_argmax,accuracy_viterbi\n");
    for (const SimulationSummaryRow& r : rows) {
        out += std::to_string(r.patient);
        out.push_back(',');
        out += std::to_string(r.frames);
        out.push_back(',');
        out += std::to_string(r.true_entry);
        out.push_back(',');
        out += std::to_string(r.detected_entry);
        out.push_back(',');
        out += std::to_string(r.si_frames_total);
        out.push_back(',');
        out += std::to_string(r.si_frames_missed);
        out.push_back(',');
        out += std::to_string(r.frames_suppressed);
        out.push_back(',');
        out += std::to_string(r.frames_transmitted);
        out.push_back(',');
        out += format_double(r.energy_spent);
        out.push_back(',');
        out += format_double(r.energy_saved);
        out.push_back(',');
        out += format_double(r.accuracy_argmax);
        out.push_back(',');
        out += format_double(r.accuracy_viterbi);
        out.push_back('\n');
    }
    return out;
}

}  // namespace

SimulationResult run_simulation_experiment(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    const GiHmm model = model_from_config(config);
    const GatingPolicy policy{config.entry_threshold, static_cast<int>(config.entry_hysteresis)};
    const EnergyModel energy{config.cost_capture, config.cost_transmit, config.battery_budget};

    std::error_code ec;
    fs::create_directories(out_dir / "patients", ec);
    if (ec) fail(Errc::io_error, "cannot create " + (out_dir / "patients").string());
    write_run_config(out_dir / "config.txt", config);

    ConfusionCounts localization_counts(kNumOrgans);
    ConfusionCounts anomaly_counts(2);
    SimulationResult result;

    for (std::int64_t p = 0; p < config.patients; ++p) {
        PatientProfile profile;
        profile.mean_dwell_frames = config.dwell_frames;
        profile.anomaly_rate_in_si = config.anomaly_rate_in_si;
        profile.fixed_dwell = config.dwell_model == DwellModel::fixed;
        profile.seed = mix_seed(config.seed, static_cast<std::uint64_t>(2 * p));

        const TraversalRecord record = generate_traversal(profile);
        const std::vector<PosteriorFrame> frames = corrupt_to_posteriors(
            record, model.emit, config.anomaly_sensitivity, config.anomaly_false_positive,
            mix_seed(config.seed, static_cast<std::uint64_t>(2 * p + 1)),
            config.frame_period_ms);
        const DecodedPath decoded = viterbi_from_posteriors(model, frames);
        const GatingReport report = run_gating(frames, model, policy, energy, &record);

        const std::size_t n = frames.size();
        SimulationSummaryRow row;
        row.patient = p;
        row.frames = static_cast<std::int64_t>(n);
        row.true_entry = record.entry_frame;
        row.detected_entry = report.detected_entry.value_or(-1);
        row.si_frames_missed = report.si_frames_missed.value_or(0);
        row.frames_suppressed = report.frames_suppressed;
        row.frames_transmitted = report.frames_transmitted;
        row.energy_spent = report.energy_spent;
        row.energy_saved = report.energy_saved_vs_transmit_all;

        std::int64_t argmax_hits = 0;
        std::int64_t viterbi_hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Organ truth = record.labels[i].organ;
            const Organ guessed = frames[i].argmax_organ();
            argmax_hits += guessed == truth ? 1 : 0;
            row.si_frames_total += truth == Organ::SmallIntestine ? 1 : 0;

            const bool truth_anomaly = record.labels[i].anomaly;
            const bool pred_anomaly = frames[i].anomaly_posterior > 0.5;
            anomaly_counts.add(truth_anomaly ? 1 : 0, pred_anomaly ? 1 : 0);

            if (decoded.feasible()) {
                const Organ via_viterbi = decoded.states[i];
                viterbi_hits += via_viterbi == truth ? 1 : 0;
                localization_counts.add(static_cast<std::size_t>(truth),
                                        static_cast<std::size_t>(via_viterbi));
            }
        }
        row.accuracy_argmax = static_cast<double>(argmax_hits) / static_cast<double>(n);
        row.accuracy_viterbi = static_cast<double>(viterbi_hits) / static_cast<double>(n);

        const fs::path patient_dir = out_dir / "patients" / patient_dir_name(p);
        fs::create_directories(patient_dir, ec);
        if (ec) fail(Errc::io_error, "cannot create " + patient_dir.string());
        write_labels(patient_dir / "truth.csv", record.labels);
        write_posterior_stream(patient_dir / "posteriors.csv", frames);
        std::vector<std::int64_t> indices;
        indices.reserve(decoded.states.size());
        for (std::size_t i = 0; i < decoded.states.size(); ++i) {
            indices.push_back(frames[i].frame_index);
        }
        write_decoded(patient_dir / "decoded.csv", indices, decoded.states, decoded.log_prob);
        write_gating_report(patient_dir / "gating.txt", report);

        result.rows.push_back(row);
    }

    result.localization = summarize(localization_counts, Averaging::macro);
    result.anomaly = summarize(anomaly_counts, Averaging::binary_positive);

    write_text_file(out_dir / "summary.csv", summary_csv_string(result.rows));
    write_metrics_table(out_dir / "metrics_localization.csv", result.localization);
    write_metrics_record(out_dir / "metrics_localization.txt", result.localization);
    write_metrics_table(out_dir / "metrics_anomaly.csv", result.anomaly);
    write_metrics_record(out_dir / "metrics_anomaly.txt", result.anomaly);
    return result;
}

RebalancePipelineResult run_rebalance_pipeline(const FrameManifest& manifest, std::uint64_t seed,
                                               const fs::path& out_dir) {
    RebalancePipelineResult result;
    result.input_stats = binarize_anomalies(manifest);
    result.rebalanced = rebalance(manifest, seed);
    result.subsets = split(result.rebalanced.manifest, {0.7, 0.3}, seed);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(Errc::io_error, "cannot create " + out_dir.string());

    write_manifest(out_dir / "rebalanced.csv", result.rebalanced.manifest);
    write_manifest(out_dir / "train.csv", result.subsets.train);
    write_manifest(out_dir / "val.csv", result.subsets.val);
    write_distribution_report(out_dir / "distribution.csv", result.subsets.summary);

    const BinarizeResult kept_stats = binarize_anomalies(result.rebalanced.manifest);
    std::string pathologies("pathology,input_frames,kept_frames\n");
    for (const auto& [tag, input_count] : result.input_stats.pathology_counts) {
        const auto it = kept_stats.pathology_counts.find(tag);
        const std::int64_t kept = it == kept_stats.pathology_counts.end() ? 0 : it->second;
        pathologies += tag;
        pathologies.push_back(',');
        pathologies += std::to_string(input_count);
        pathologies.push_back(',');
        pathologies += std::to_string(kept);
        pathologies.push_back('\n');
    }
    write_text_file(out_dir / "pathologies.csv", pathologies);

    std::string report;
    report += "input_frames = " +
              std::to_string(result.input_stats.positives + result.input_stats.negatives) + "\n";
    report += "input_negatives = " + std::to_string(result.input_stats.negatives) + "\n";
    report += "input_positives = " + std::to_string(result.input_stats.positives) + "\n";
    report += "output_frames = " + std::to_string(kept_stats.positives + kept_stats.negatives) +
              "\n";
    report += "output_negatives = " + std::to_string(kept_stats.negatives) + "\n";
    report += "output_positives = " + std::to_string(kept_stats.positives) + "\n";
    report += "achieved_ratio = " + format_double(result.rebalanced.achieved_ratio) + "\n";
    report += std::string("insufficient_positives = ") +
              (result.rebalanced.insufficient_positives ? "1" : "0") + "\n";
    report += "train_frames = " + std::to_string(result.subsets.train.entries.size()) + "\n";
    report += "val_frames = " + std::to_string(result.subsets.val.entries.size()) + "\n";
    write_text_file(out_dir / "report.txt", report);
    return result;
}

MetricsSummary evaluate_localization(const DecodedFile& pred, std::span<const LabelFrame> truth) {
    if (pred.organs.size() != truth.size()) {
        fail(Errc::length_mismatch, "prediction has " + std::to_string(pred.organs.size()) +
                                        " frames, truth " + std::to_string(truth.size()));
    }
    ConfusionCounts counts(kNumOrgans);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred.frame_indices[i] != truth[i].frame_index) {
            fail(Errc::invalid_argument,
                 "prediction and truth frame indices disagree at position " + std::to_string(i));
        }
        counts.add(static_cast<std::size_t>(truth[i].organ),
                   static_cast<std::size_t>(pred.organs[i]));
    }
    return summarize(counts, Averaging::macro);
}

MetricsSummary evaluate_anomaly(std::span<const PosteriorFrame> pred,
                                std::span<const LabelFrame> truth) {
    if (pred.size() != truth.size()) {
        fail(Errc::length_mismatch, "prediction has " + std::to_string(pred.size()) +
                                        " frames, truth " + std::to_string(truth.size()));
    }
    ConfusionCounts counts(2);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i].frame_index != truth[i].frame_index) {
            fail(Errc::invalid_argument,
                 "prediction and truth frame indices disagree at position " + std::to_string(i));
        }
        counts.add(truth[i].anomaly ? 1 : 0, pred[i].anomaly_posterior > 0.5 ? 1 : 0);
    }
    return summarize(counts, Averaging::binary_positive);
}

}  // namespace vce

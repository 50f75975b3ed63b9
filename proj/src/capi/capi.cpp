#include "vce/vce.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "hmm.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "mtl.hpp"
#include "simulator.hpp"

// Opaque handle bodies. Each owns one core value; every create/read call
// allocates a fresh handle and every accessor checks for NULL.
struct vce_config {
    vce::RunConfig config;
};
struct vce_hmm {
    vce::GiHmm model;
};
struct vce_frames {
    std::vector<vce::PosteriorFrame> frames;
};
struct vce_traversal {
    vce::TraversalRecord record;
};
struct vce_decoded {
    vce::DecodedFile file;
};
struct vce_filter {
    vce::GiHmm model;
    vce::FilterState state;
};
struct vce_trace {
    vce::LossTrace trace;
};
struct vce_manifest {
    vce::FrameManifest manifest;
};

namespace {

thread_local std::string t_error;
thread_local std::int64_t t_error_line = -1;

int map_errc(vce::Errc code) {
    switch (code) {
        case vce::Errc::invalid_argument:
        case vce::Errc::index_out_of_range:
            return VCE_ERR_INVALID_ARGUMENT;
        case vce::Errc::parse_error:
            return VCE_ERR_PARSE;
        case vce::Errc::io_error:
            return VCE_ERR_IO;
        case vce::Errc::infeasible_sequence:
            return VCE_ERR_INFEASIBLE;
        default:
            return VCE_ERR_VALIDATION;
    }
}

template <typename Body>
int guarded(Body&& body) {
    try {
        body();
        return VCE_OK;
    } catch (const vce::Error& e) {
        t_error = e.what();
        t_error_line = e.line();
        return map_errc(e.code());
    } catch (const std::exception& e) {
        t_error = e.what();
        t_error_line = -1;
        return VCE_ERR_INTERNAL;
    } catch (...) {
        t_error = "unknown failure";
        t_error_line = -1;
        return VCE_ERR_INTERNAL;
    }
}

int invalid(const char* message) {
    t_error = message;
    t_error_line = -1;
    return VCE_ERR_INVALID_ARGUMENT;
}

int copy_string(const std::string& text, char* buf, size_t cap) {
    if (buf == nullptr || cap < text.size() + 1) return invalid("buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return VCE_OK;
}

vce::ProbabilityMatrix matrix5(const double* values) {
    return vce::ProbabilityMatrix::row_stochastic(vce::kNumOrgans, vce::kNumOrgans,
                                                  std::vector<double>(values, values + 25));
}

vce::MetricsSummary to_summary(const vce_metrics& m) {
    vce::MetricsSummary summary;
    summary.accuracy = m.accuracy;
    summary.precision = m.precision;
    summary.recall = m.recall;
    summary.f1 = m.f1;
    for (size_t i = 0; i < m.num_flagged && i < 5; ++i) {
        summary.flagged_classes.push_back(static_cast<std::size_t>(m.flagged_classes[i]));
    }
    return summary;
}

void from_summary(const vce::MetricsSummary& summary, vce_metrics* out) {
    out->accuracy = summary.accuracy;
    out->precision = summary.precision;
    out->recall = summary.recall;
    out->f1 = summary.f1;
    out->num_flagged = summary.flagged_classes.size();
    for (size_t i = 0; i < summary.flagged_classes.size() && i < 5; ++i) {
        out->flagged_classes[i] = static_cast<int64_t>(summary.flagged_classes[i]);
    }
}

vce::GatingReport to_report(const vce_gating_report& r) {
    vce::GatingReport report;
    if (r.has_true_entry) report.true_entry = r.true_entry;
    if (r.has_detected_entry) report.detected_entry = r.detected_entry;
    report.frames_suppressed = r.frames_suppressed;
    report.frames_transmitted = r.frames_transmitted;
    if (r.has_si_frames_missed) report.si_frames_missed = r.si_frames_missed;
    report.energy_spent = r.energy_spent;
    report.energy_saved_vs_transmit_all = r.energy_saved_vs_transmit_all;
    return report;
}

void from_report(const vce::GatingReport& report, vce_gating_report* out) {
    out->has_true_entry = report.true_entry.has_value() ? 1 : 0;
    out->true_entry = report.true_entry.value_or(0);
    out->has_detected_entry = report.detected_entry.has_value() ? 1 : 0;
    out->detected_entry = report.detected_entry.value_or(0);
    out->frames_suppressed = report.frames_suppressed;
    out->frames_transmitted = report.frames_transmitted;
    out->has_si_frames_missed = report.si_frames_missed.has_value() ? 1 : 0;
    out->si_frames_missed = report.si_frames_missed.value_or(0);
    out->energy_spent = report.energy_spent;
    out->energy_saved_vs_transmit_all = report.energy_saved_vs_transmit_all;
}

}  // namespace

extern "C" {

const char* vce_version(void) { return "0.1.0"; }

const char* vce_status_name(int status) {
    switch (status) {
        case VCE_OK: return "ok";
        case VCE_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case VCE_ERR_VALIDATION: return "validation";
        case VCE_ERR_PARSE: return "parse";
        case VCE_ERR_IO: return "io";
        case VCE_ERR_INFEASIBLE: return "infeasible";
        case VCE_ERR_INTERNAL: return "internal";
        default: return "unknown";
    }
}

const char* vce_last_error(void) { return t_error.c_str(); }

int64_t vce_last_error_line(void) { return t_error_line; }

int vce_format_double(double value, char* buf, size_t cap) {
    if (buf == nullptr || cap < 24) return invalid("buffer too small");
    return copy_string(vce::format_double(value), buf, cap);
}

/* ---- run configuration -------------------------------------------------- */

int vce_config_create(vce_config_t** out) {
    if (out == nullptr) return invalid("out is NULL");
    *out = new vce_config{};
    return VCE_OK;
}

int vce_config_read(const char* path, vce_config_t** out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_config{vce::read_run_config(path)}; });
}

int vce_config_write(const vce_config_t* config, const char* path) {
    if (config == nullptr || path == nullptr) return invalid("config and path must be non-NULL");
    return guarded([&] { vce::write_run_config(path, config->config); });
}

int vce_config_set(vce_config_t* config, const char* key, const char* value) {
    if (config == nullptr || key == nullptr || value == nullptr) {
        return invalid("config, key and value must be non-NULL");
    }
    return guarded([&] { vce::set_config_value(config->config, key, value); });
}

int vce_config_get(const vce_config_t* config, const char* key, char* buf, size_t cap) {
    if (config == nullptr || key == nullptr) return invalid("config and key must be non-NULL");
    const std::string text = vce::run_config_string(config->config);
    const std::string wanted = std::string(key) + " = ";
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        if (line.compare(0, wanted.size(), wanted) == 0) {
            return copy_string(line.substr(wanted.size()), buf, cap);
        }
        start = end + 1;
    }
    return invalid("unknown configuration key");
}

int vce_config_validate(const vce_config_t* config) {
    if (config == nullptr) return invalid("config is NULL");
    return guarded([&] { config->config.validate(); });
}

void vce_config_free(vce_config_t* config) { delete config; }

/* ---- model -------------------------------------------------------------- */

int vce_hmm_create(const double pi[5], const double trans[25], const double emit[25],
                   vce_hmm_t** out) {
    if (pi == nullptr || trans == nullptr || emit == nullptr || out == nullptr) {
        return invalid("pi, trans, emit and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        std::array<double, vce::kNumOrgans> initial{};
        std::memcpy(initial.data(), pi, sizeof initial);
        *out = new vce_hmm{vce::GiHmm::create(initial, matrix5(trans), matrix5(emit))};
    });
}

int vce_hmm_from_dwell(const double dwell_frames[5], double emission_diagonal, vce_hmm_t** out) {
    if (dwell_frames == nullptr || out == nullptr) {
        return invalid("dwell_frames and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        std::array<double, vce::kNumOrgans> dwell{};
        std::memcpy(dwell.data(), dwell_frames, sizeof dwell);
        *out = new vce_hmm{vce::GiHmm::create(vce::kDefaultInitialDistribution,
                                              vce::build_transitions(dwell),
                                              vce::make_diagonal_emissions(emission_diagonal))};
    });
}

int vce_hmm_from_config(const vce_config_t* config, vce_hmm_t** out) {
    if (config == nullptr || out == nullptr) return invalid("config and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_hmm{vce::model_from_config(config->config)}; });
}

int vce_hmm_get(const vce_hmm_t* hmm, double pi[5], double trans[25], double emit[25]) {
    if (hmm == nullptr) return invalid("hmm is NULL");
    if (pi != nullptr) std::memcpy(pi, hmm->model.pi.data(), 5 * sizeof(double));
    if (trans != nullptr) {
        std::memcpy(trans, hmm->model.trans.values().data(), 25 * sizeof(double));
    }
    if (emit != nullptr) std::memcpy(emit, hmm->model.emit.values().data(), 25 * sizeof(double));
    return VCE_OK;
}

void vce_hmm_free(vce_hmm_t* hmm) { delete hmm; }

/* ---- posterior streams -------------------------------------------------- */

int vce_frames_create(const vce_frame* frames, size_t count, vce_frames_t** out) {
    if ((frames == nullptr && count > 0) || out == nullptr) {
        return invalid("frames and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        std::vector<vce::PosteriorFrame> converted;
        converted.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            vce::PosteriorFrame pf;
            pf.frame_index = frames[i].frame_index;
            pf.timestamp_ms = frames[i].timestamp_ms;
            std::memcpy(pf.organ_posterior.data(), frames[i].organ_posterior,
                        sizeof pf.organ_posterior);
            pf.anomaly_posterior = frames[i].anomaly_posterior;
            converted.push_back(pf);
        }
        vce::validate_posterior_sequence(converted);
        *out = new vce_frames{std::move(converted)};
    });
}

int vce_frames_read(const char* path, vce_frames_t** out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_frames{vce::read_posterior_stream(path)}; });
}

int vce_frames_write(const vce_frames_t* frames, const char* path) {
    if (frames == nullptr || path == nullptr) return invalid("frames and path must be non-NULL");
    return guarded([&] { vce::write_posterior_stream(path, frames->frames); });
}

size_t vce_frames_size(const vce_frames_t* frames) {
    return frames == nullptr ? 0 : frames->frames.size();
}

int vce_frames_get(const vce_frames_t* frames, size_t index, vce_frame* out) {
    if (frames == nullptr || out == nullptr) return invalid("frames and out must be non-NULL");
    if (index >= frames->frames.size()) return invalid("frame index out of range");
    const vce::PosteriorFrame& pf = frames->frames[index];
    out->frame_index = pf.frame_index;
    out->timestamp_ms = pf.timestamp_ms;
    std::memcpy(out->organ_posterior, pf.organ_posterior.data(), sizeof out->organ_posterior);
    out->anomaly_posterior = pf.anomaly_posterior;
    return VCE_OK;
}

void vce_frames_free(vce_frames_t* frames) { delete frames; }

/* ---- traversals --------------------------------------------------------- */

int vce_traversal_generate(const double dwell_frames[5], int fixed_dwell,
                           double anomaly_rate_in_si, uint64_t seed, vce_traversal_t** out) {
    if (dwell_frames == nullptr || out == nullptr) {
        return invalid("dwell_frames and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        vce::PatientProfile profile;
        std::memcpy(profile.mean_dwell_frames.data(), dwell_frames,
                    sizeof profile.mean_dwell_frames);
        profile.fixed_dwell = fixed_dwell != 0;
        profile.anomaly_rate_in_si = anomaly_rate_in_si;
        profile.seed = seed;
        *out = new vce_traversal{vce::generate_traversal(profile)};
    });
}

int vce_labels_read(const char* path, vce_traversal_t** out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded(
        [&] { *out = new vce_traversal{vce::traversal_from_labels(vce::read_labels(path))}; });
}

int vce_labels_write(const vce_traversal_t* traversal, const char* path) {
    if (traversal == nullptr || path == nullptr) {
        return invalid("traversal and path must be non-NULL");
    }
    return guarded([&] { vce::write_labels(path, traversal->record.labels); });
}

size_t vce_traversal_size(const vce_traversal_t* traversal) {
    return traversal == nullptr ? 0 : traversal->record.labels.size();
}

int vce_traversal_get(const vce_traversal_t* traversal, size_t index, int64_t* frame_index,
                      int* organ, int* anomaly) {
    if (traversal == nullptr) return invalid("traversal is NULL");
    if (index >= traversal->record.labels.size()) return invalid("label index out of range");
    const vce::LabelFrame& label = traversal->record.labels[index];
    if (frame_index != nullptr) *frame_index = label.frame_index;
    if (organ != nullptr) *organ = static_cast<int>(label.organ);
    if (anomaly != nullptr) *anomaly = label.anomaly ? 1 : 0;
    return VCE_OK;
}

int64_t vce_traversal_entry_frame(const vce_traversal_t* traversal) {
    return traversal == nullptr ? -1 : traversal->record.entry_frame;
}

void vce_traversal_free(vce_traversal_t* traversal) { delete traversal; }

int vce_corrupt_to_posteriors(const vce_traversal_t* traversal, const vce_hmm_t* hmm,
                              double anomaly_sensitivity, double anomaly_false_positive,
                              uint64_t seed, int64_t frame_period_ms, vce_frames_t** out) {
    if (traversal == nullptr || hmm == nullptr || out == nullptr) {
        return invalid("traversal, hmm and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        *out = new vce_frames{vce::corrupt_to_posteriors(traversal->record, hmm->model.emit,
                                                         anomaly_sensitivity,
                                                         anomaly_false_positive, seed,
                                                         frame_period_ms)};
    });
}

/* ---- decoding ----------------------------------------------------------- */

int vce_viterbi(const vce_hmm_t* hmm, const vce_frames_t* frames, vce_decoded_t** out) {
    if (hmm == nullptr || frames == nullptr || out == nullptr) {
        return invalid("hmm, frames and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        const vce::DecodedPath path = vce::viterbi_from_posteriors(hmm->model, frames->frames);
        vce::DecodedFile file;
        file.organs = path.states;
        file.log_prob = path.log_prob;
        file.frame_indices.reserve(path.states.size());
        for (size_t i = 0; i < path.states.size(); ++i) {
            file.frame_indices.push_back(frames->frames[i].frame_index);
        }
        *out = new vce_decoded{std::move(file)};
    });
}

int vce_decoded_read(const char* path, vce_decoded_t** out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_decoded{vce::read_decoded(path)}; });
}

int vce_decoded_write(const vce_decoded_t* decoded, const char* path) {
    if (decoded == nullptr || path == nullptr) return invalid("decoded and path must be non-NULL");
    return guarded([&] {
        vce::write_decoded(path, decoded->file.frame_indices, decoded->file.organs,
                           decoded->file.log_prob);
    });
}

size_t vce_decoded_size(const vce_decoded_t* decoded) {
    return decoded == nullptr ? 0 : decoded->file.organs.size();
}

int vce_decoded_get(const vce_decoded_t* decoded, size_t index, int64_t* frame_index,
                    int* organ) {
    if (decoded == nullptr) return invalid("decoded is NULL");
    if (index >= decoded->file.organs.size()) return invalid("decoded index out of range");
    if (frame_index != nullptr) *frame_index = decoded->file.frame_indices[index];
    if (organ != nullptr) *organ = static_cast<int>(decoded->file.organs[index]);
    return VCE_OK;
}

double vce_decoded_log_prob(const vce_decoded_t* decoded) {
    return decoded == nullptr ? -HUGE_VAL : decoded->file.log_prob;
}

int vce_decoded_feasible(const vce_decoded_t* decoded) {
    if (decoded == nullptr) return 0;
    return std::isfinite(decoded->file.log_prob) ? 1 : 0;
}

void vce_decoded_free(vce_decoded_t* decoded) { delete decoded; }

/* ---- online filtering --------------------------------------------------- */

int vce_filter_create(const vce_hmm_t* hmm, vce_filter_t** out) {
    if (hmm == nullptr || out == nullptr) return invalid("hmm and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_filter{hmm->model, vce::make_filter(hmm->model)}; });
}

int vce_filter_update(vce_filter_t* filter, int observed_organ) {
    if (filter == nullptr) return invalid("filter is NULL");
    return guarded([&] {
        filter->state = vce::forward_update(filter->state, filter->model,
                                            vce::organ_from_index(observed_organ));
    });
}

int vce_filter_belief(const vce_filter_t* filter, double belief[5]) {
    if (filter == nullptr || belief == nullptr) return invalid("filter and belief must be non-NULL");
    std::memcpy(belief, filter->state.belief.data(), 5 * sizeof(double));
    return VCE_OK;
}

double vce_filter_entry_mass(const vce_filter_t* filter) {
    return filter == nullptr ? 0.0 : vce::entry_mass(filter->state);
}

int vce_filter_degenerate(const vce_filter_t* filter) {
    return filter != nullptr && filter->state.last_update_degenerate ? 1 : 0;
}

int64_t vce_filter_frames_seen(const vce_filter_t* filter) {
    return filter == nullptr ? 0 : filter->state.frames_seen;
}

void vce_filter_free(vce_filter_t* filter) { delete filter; }

/* ---- transmission gating ------------------------------------------------ */

int vce_gate_run(const vce_hmm_t* hmm, const vce_frames_t* frames, const vce_config_t* config,
                 const vce_traversal_t* truth, vce_gating_report* out) {
    if (hmm == nullptr || frames == nullptr || config == nullptr || out == nullptr) {
        return invalid("hmm, frames, config and out must be non-NULL");
    }
    return guarded([&] {
        const vce::RunConfig& cfg = config->config;
        const vce::GatingPolicy policy{cfg.entry_threshold,
                                       static_cast<int>(cfg.entry_hysteresis)};
        const vce::EnergyModel energy{cfg.cost_capture, cfg.cost_transmit, cfg.battery_budget};
        const vce::GatingReport report =
            vce::run_gating(frames->frames, hmm->model, policy, energy,
                            truth == nullptr ? nullptr : &truth->record);
        from_report(report, out);
    });
}

int vce_gating_report_write(const vce_gating_report* report, const char* path) {
    if (report == nullptr || path == nullptr) return invalid("report and path must be non-NULL");
    return guarded([&] { vce::write_gating_report(path, to_report(*report)); });
}

int vce_gating_report_read(const char* path, vce_gating_report* out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    return guarded([&] { from_report(vce::read_gating_report(path), out); });
}

int vce_adapt_frame_rate(const vce_frames_t* frames, const int* in_si, size_t count,
                         double anomaly_threshold, double base_rate, double boosted_rate,
                         double* rates_out) {
    if (frames == nullptr || (in_si == nullptr && count > 0) || rates_out == nullptr) {
        return invalid("frames, in_si and rates_out must be non-NULL");
    }
    return guarded([&] {
        std::unique_ptr<bool[]> flags(new bool[count]);
        for (size_t i = 0; i < count; ++i) flags[i] = in_si[i] != 0;
        const std::vector<double> rates =
            vce::adapt_frame_rate(frames->frames, std::span<const bool>(flags.get(), count),
                                  anomaly_threshold, base_rate, boosted_rate);
        std::memcpy(rates_out, rates.data(), rates.size() * sizeof(double));
    });
}

/* ---- task losses -------------------------------------------------------- */

int vce_uw_loss(const double losses[2], const double log_sigma[2], double* value,
                double grad_log_sigma[2], double grad_losses[2]) {
    if (losses == nullptr || log_sigma == nullptr || value == nullptr) {
        return invalid("losses, log_sigma and value must be non-NULL");
    }
    return guarded([&] {
        const vce::UwResult result =
            vce::uw_loss({losses[0], losses[1]}, vce::UwParams{{log_sigma[0], log_sigma[1]}});
        *value = result.value;
        if (grad_log_sigma != nullptr) {
            grad_log_sigma[0] = result.grad_log_sigma[0];
            grad_log_sigma[1] = result.grad_log_sigma[1];
        }
        if (grad_losses != nullptr) {
            grad_losses[0] = result.grad_losses[0];
            grad_losses[1] = result.grad_losses[1];
        }
    });
}

int vce_trace_create(const double* loss_task1, const double* loss_task2, size_t epochs,
                     vce_trace_t** out) {
    if (((loss_task1 == nullptr || loss_task2 == nullptr) && epochs > 0) || out == nullptr) {
        return invalid("loss_task1, loss_task2 and out must be non-NULL");
    }
    *out = nullptr;
    return guarded([&] {
        vce::LossTrace trace;
        trace.task1.assign(loss_task1, loss_task1 + epochs);
        trace.task2.assign(loss_task2, loss_task2 + epochs);
        trace.validate();
        *out = new vce_trace{std::move(trace)};
    });
}

int vce_trace_read(const char* path, vce_trace_t** out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_trace{vce::read_loss_trace(path)}; });
}

int vce_trace_write(const vce_trace_t* trace, const char* path) {
    if (trace == nullptr || path == nullptr) return invalid("trace and path must be non-NULL");
    return guarded([&] { vce::write_loss_trace(path, trace->trace); });
}

int64_t vce_trace_epochs(const vce_trace_t* trace) {
    return trace == nullptr ? 0 : trace->trace.epochs();
}

int vce_trace_get(const vce_trace_t* trace, int64_t epoch, double* loss_task1,
                  double* loss_task2) {
    if (trace == nullptr) return invalid("trace is NULL");
    if (epoch < 1 || epoch > trace->trace.epochs()) return invalid("epoch out of range");
    const size_t i = static_cast<size_t>(epoch - 1);
    if (loss_task1 != nullptr) *loss_task1 = trace->trace.task1[i];
    if (loss_task2 != nullptr) *loss_task2 = trace->trace.task2[i];
    return VCE_OK;
}

void vce_trace_free(vce_trace_t* trace) { delete trace; }

int vce_dwa_weights(const vce_trace_t* trace, double temperature, int64_t epoch,
                    double weights[2]) {
    if (trace == nullptr || weights == nullptr) return invalid("trace and weights must be non-NULL");
    return guarded([&] {
        const std::array<double, 2> w =
            vce::dwa_weights(trace->trace, vce::DwaConfig{temperature, 2}, epoch);
        weights[0] = w[0];
        weights[1] = w[1];
    });
}

int vce_focal_loss(const double* probabilities, size_t count, size_t true_class, double gamma,
                   const double* alpha, size_t alpha_count, double* value, double* grad,
                   int* clamped) {
    if (probabilities == nullptr || value == nullptr) {
        return invalid("probabilities and value must be non-NULL");
    }
    return guarded([&] {
        vce::FocalParams params;
        params.gamma = gamma;
        if (alpha != nullptr) params.alpha.assign(alpha, alpha + alpha_count);
        const vce::FocalResult result =
            vce::focal_loss(std::span<const double>(probabilities, count), true_class, params);
        *value = result.value;
        if (grad != nullptr) {
            std::memcpy(grad, result.grad_probabilities.data(), count * sizeof(double));
        }
        if (clamped != nullptr) *clamped = result.clamped ? 1 : 0;
    });
}

int vce_cross_entropy(const double* probabilities, size_t count, size_t true_class, double* value,
                      int* clamped) {
    if (probabilities == nullptr || value == nullptr) {
        return invalid("probabilities and value must be non-NULL");
    }
    return guarded([&] {
        const vce::CrossEntropyResult result =
            vce::cross_entropy(std::span<const double>(probabilities, count), true_class);
        *value = result.value;
        if (clamped != nullptr) *clamped = result.clamped ? 1 : 0;
    });
}

/* ---- metrics ------------------------------------------------------------ */

int vce_metrics_from_confusion(size_t num_classes, const int64_t* counts, int averaging,
                               vce_metrics* out) {
    if (counts == nullptr || out == nullptr) return invalid("counts and out must be non-NULL");
    if (averaging != VCE_AVERAGING_MACRO && averaging != VCE_AVERAGING_BINARY_POSITIVE) {
        return invalid("averaging must be 0 (macro) or 1 (binary positive)");
    }
    return guarded([&] {
        const vce::ConfusionCounts matrix = vce::ConfusionCounts::from_values(
            num_classes,
            std::span<const std::int64_t>(counts, num_classes * num_classes));
        const vce::Averaging mode = averaging == VCE_AVERAGING_MACRO
                                        ? vce::Averaging::macro
                                        : vce::Averaging::binary_positive;
        from_summary(vce::summarize(matrix, mode), out);
    });
}

int vce_eval_localization(const vce_decoded_t* decoded, const vce_traversal_t* truth,
                          vce_metrics* out) {
    if (decoded == nullptr || truth == nullptr || out == nullptr) {
        return invalid("decoded, truth and out must be non-NULL");
    }
    return guarded([&] {
        from_summary(vce::evaluate_localization(decoded->file, truth->record.labels), out);
    });
}

int vce_eval_anomaly(const vce_frames_t* frames, const vce_traversal_t* truth,
                     vce_metrics* out) {
    if (frames == nullptr || truth == nullptr || out == nullptr) {
        return invalid("frames, truth and out must be non-NULL");
    }
    return guarded([&] {
        from_summary(vce::evaluate_anomaly(frames->frames, truth->record.labels), out);
    });
}

int vce_metrics_table(const vce_metrics* metrics, char* buf, size_t cap) {
    if (metrics == nullptr) return invalid("metrics is NULL");
    std::string text;
    const int status = guarded([&] { text = vce::metrics_table_string(to_summary(*metrics)); });
    if (status != VCE_OK) return status;
    return copy_string(text, buf, cap);
}

int vce_metrics_record_write(const vce_metrics* metrics, const char* path) {
    if (metrics == nullptr || path == nullptr) return invalid("metrics and path must be non-NULL");
    return guarded([&] { vce::write_metrics_record(path, to_summary(*metrics)); });
}

/* ---- confusion count files ---------------------------------------------- */

int vce_confusion_read(const char* path, int64_t counts[25]) {
    if (path == nullptr || counts == nullptr) return invalid("path and counts must be non-NULL");
    return guarded([&] {
        const vce::ConfusionCounts5 matrix = vce::read_confusion(path);
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) counts[r * 5 + c] = matrix[r][c];
        }
    });
}

int vce_confusion_write(const char* path, const int64_t counts[25]) {
    if (path == nullptr || counts == nullptr) return invalid("path and counts must be non-NULL");
    return guarded([&] {
        vce::ConfusionCounts5 matrix{};
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) matrix[r][c] = counts[r * 5 + c];
        }
        vce::write_confusion(path, matrix);
    });
}

/* ---- dataset manifests -------------------------------------------------- */

int vce_manifest_read(const char* path, vce_manifest_t** out) {
    if (path == nullptr || out == nullptr) return invalid("path and out must be non-NULL");
    *out = nullptr;
    return guarded([&] { *out = new vce_manifest{vce::read_manifest(path)}; });
}

int vce_manifest_write(const vce_manifest_t* manifest, const char* path) {
    if (manifest == nullptr || path == nullptr) {
        return invalid("manifest and path must be non-NULL");
    }
    return guarded([&] { vce::write_manifest(path, manifest->manifest); });
}

size_t vce_manifest_size(const vce_manifest_t* manifest) {
    return manifest == nullptr ? 0 : manifest->manifest.entries.size();
}

void vce_manifest_free(vce_manifest_t* manifest) { delete manifest; }

int vce_rebalance_pipeline(const vce_manifest_t* manifest, uint64_t seed, const char* out_dir) {
    if (manifest == nullptr || out_dir == nullptr) {
        return invalid("manifest and out_dir must be non-NULL");
    }
    return guarded([&] { vce::run_rebalance_pipeline(manifest->manifest, seed, out_dir); });
}

/* ---- experiments -------------------------------------------------------- */

int vce_simulate(const vce_config_t* config, const char* out_dir) {
    if (config == nullptr || out_dir == nullptr) {
        return invalid("config and out_dir must be non-NULL");
    }
    return guarded([&] { vce::run_simulation_experiment(config->config, out_dir); });
}

}  // extern "C"

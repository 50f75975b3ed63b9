// Exercises the shared library through its C surface only: handles, status
// codes, the thread-local error channel, and file pipelines.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "vce/vce.h"

namespace fs = std::filesystem;

namespace {

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
    void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, HandleDeleter<T, Free>>;

using ConfigHandle = Handle<vce_config_t, vce_config_free>;
using HmmHandle = Handle<vce_hmm_t, vce_hmm_free>;
using FramesHandle = Handle<vce_frames_t, vce_frames_free>;
using TraversalHandle = Handle<vce_traversal_t, vce_traversal_free>;
using DecodedHandle = Handle<vce_decoded_t, vce_decoded_free>;
using FilterHandle = Handle<vce_filter_t, vce_filter_free>;
using TraceHandle = Handle<vce_trace_t, vce_trace_free>;
using ManifestHandle = Handle<vce_manifest_t, vce_manifest_free>;

const fs::path& scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "vce_capi_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string scratch(const std::string& name) { return (scratch_dir() / name).string(); }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.is_open());
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.is_open());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// The capsule walking every organ for a fixed number of frames, observed
// through exact (identity-emission) classification; everything downstream of
// this pair is deterministic regardless of seeds.
HmmHandle exact_model(const double dwell[5]) {
    vce_hmm_t* hmm = nullptr;
    REQUIRE(vce_hmm_from_dwell(dwell, 1.0, &hmm) == VCE_OK);
    return HmmHandle(hmm);
}

}  // namespace

TEST_CASE("version, status names and the initial error state") {
    CHECK(std::strcmp(vce_version(), "0.1.0") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_OK), "ok") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_ERR_INVALID_ARGUMENT), "invalid_argument") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_ERR_VALIDATION), "validation") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_ERR_PARSE), "parse") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_ERR_IO), "io") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_ERR_INFEASIBLE), "infeasible") == 0);
    CHECK(std::strcmp(vce_status_name(VCE_ERR_INTERNAL), "internal") == 0);
    CHECK(std::strcmp(vce_status_name(42), "unknown") == 0);
    CHECK(std::strcmp(vce_last_error(), "") == 0);
    CHECK(vce_last_error_line() == -1);
}

TEST_CASE("format_double mirrors the file renderer") {
    char buf[32];
    REQUIRE(vce_format_double(0.288, buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "0.288") == 0);
    REQUIRE(vce_format_double(-0.0, buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "0") == 0);
    REQUIRE(vce_format_double(1.0 / 3.0, buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "0.333333333") == 0);
    CHECK(vce_format_double(1.0, buf, 8) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_format_double(1.0, nullptr, 64) == VCE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config handles expose keys textually and round-trip through files") {
    vce_config_t* raw = nullptr;
    REQUIRE(vce_config_create(&raw) == VCE_OK);
    ConfigHandle config(raw);

    char buf[128];
    REQUIRE(vce_config_get(config.get(), "seed", buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "7") == 0);
    REQUIRE(vce_config_get(config.get(), "dwell_frames", buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "13,20,826,8786,2083") == 0);
    REQUIRE(vce_config_get(config.get(), "confusion_path", buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "none") == 0);

    REQUIRE(vce_config_set(config.get(), "seed", "123") == VCE_OK);
    REQUIRE(vce_config_get(config.get(), "seed", buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "123") == 0);
    CHECK(vce_config_validate(config.get()) == VCE_OK);

    CHECK(vce_config_set(config.get(), "planet", "mars") == VCE_ERR_PARSE);
    CHECK(std::strlen(vce_last_error()) > 0);
    CHECK(vce_config_set(config.get(), "patients", "many") == VCE_ERR_PARSE);
    CHECK(vce_config_get(config.get(), "planet", buf, sizeof buf) ==
          VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_config_get(config.get(), "seed", buf, 2) == VCE_ERR_INVALID_ARGUMENT);

    // Range rules live in validate, not in set.
    REQUIRE(vce_config_set(config.get(), "entry_threshold", "0.3") == VCE_OK);
    CHECK(vce_config_validate(config.get()) == VCE_ERR_INVALID_ARGUMENT);
    REQUIRE(vce_config_set(config.get(), "entry_threshold", "0.95") == VCE_OK);
    REQUIRE(vce_config_set(config.get(), "dwell_frames", "0.5,20,826,8786,2083") == VCE_OK);
    CHECK(vce_config_validate(config.get()) == VCE_ERR_VALIDATION);
    REQUIRE(vce_config_set(config.get(), "dwell_frames", "13,20,826,8786,2083") == VCE_OK);

    const std::string path = scratch("config.txt");
    REQUIRE(vce_config_write(config.get(), path.c_str()) == VCE_OK);
    vce_config_t* reread = nullptr;
    REQUIRE(vce_config_read(path.c_str(), &reread) == VCE_OK);
    ConfigHandle loaded(reread);
    REQUIRE(vce_config_get(loaded.get(), "seed", buf, sizeof buf) == VCE_OK);
    CHECK(std::strcmp(buf, "123") == 0);

    vce_config_t* missing = nullptr;
    CHECK(vce_config_read(scratch("no_such_config.txt").c_str(), &missing) == VCE_ERR_IO);
    CHECK(missing == nullptr);

    write_file(scratch("config_bad.txt"), "planet = mars\n");
    CHECK(vce_config_read(scratch("config_bad.txt").c_str(), &missing) == VCE_ERR_PARSE);
    CHECK(vce_last_error_line() == 1);

    CHECK(vce_config_create(nullptr) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_config_validate(nullptr) == VCE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("model handles expose the dwell-derived matrices") {
    const double dwell[5] = {13, 20, 826, 8786, 2083};
    vce_hmm_t* raw = nullptr;
    REQUIRE(vce_hmm_from_dwell(dwell, 0.85, &raw) == VCE_OK);
    HmmHandle hmm(raw);

    double pi[5], trans[25], emit[25];
    REQUIRE(vce_hmm_get(hmm.get(), pi, trans, emit) == VCE_OK);
    CHECK(pi[0] == 1.0);
    CHECK(pi[4] == 0.0);
    CHECK(trans[0] == doctest::Approx(0.9230769230769230769).epsilon(1e-15));
    CHECK(trans[1] == doctest::Approx(1.0 / 13.0).epsilon(1e-15));
    CHECK(trans[2] == 0.0);
    CHECK(trans[2 * 5 + 2] == doctest::Approx(0.9987893462469733656).epsilon(1e-15));
    CHECK(trans[4 * 5 + 4] == 1.0);
    CHECK(emit[0] == doctest::Approx(0.85).epsilon(1e-15));
    CHECK(emit[1] == doctest::Approx(0.0375).epsilon(1e-15));

    // Partial extraction is allowed.
    REQUIRE(vce_hmm_get(hmm.get(), nullptr, nullptr, emit) == VCE_OK);

    // A colon row that leaks probability is rejected.
    double leaky[25];
    std::memcpy(leaky, trans, sizeof leaky);
    leaky[4 * 5 + 4] = 0.9;
    leaky[4 * 5 + 0] = 0.1;
    vce_hmm_t* bad = nullptr;
    CHECK(vce_hmm_create(pi, leaky, emit, &bad) == VCE_ERR_VALIDATION);
    CHECK(bad == nullptr);
    CHECK(vce_hmm_create(nullptr, trans, emit, &bad) == VCE_ERR_INVALID_ARGUMENT);

    const double tiny[5] = {0.5, 20, 826, 8786, 2083};
    CHECK(vce_hmm_from_dwell(tiny, 0.85, &bad) == VCE_ERR_VALIDATION);
}

TEST_CASE("traversals generate, persist and report the entry frame") {
    const double unit[5] = {1, 1, 1, 1, 1};
    vce_traversal_t* raw = nullptr;
    REQUIRE(vce_traversal_generate(unit, 1, 0.0, 9, &raw) == VCE_OK);
    TraversalHandle traversal(raw);

    REQUIRE(vce_traversal_size(traversal.get()) == 5);
    CHECK(vce_traversal_entry_frame(traversal.get()) == 3);
    for (int i = 0; i < 5; ++i) {
        int64_t frame = -1;
        int organ = -1;
        int anomaly = -1;
        REQUIRE(vce_traversal_get(traversal.get(), static_cast<size_t>(i), &frame, &organ,
                                  &anomaly) == VCE_OK);
        CHECK(frame == i);
        CHECK(organ == i);
        CHECK(anomaly == 0);
    }
    CHECK(vce_traversal_get(traversal.get(), 5, nullptr, nullptr, nullptr) ==
          VCE_ERR_INVALID_ARGUMENT);

    const std::string path = scratch("labels.csv");
    REQUIRE(vce_labels_write(traversal.get(), path.c_str()) == VCE_OK);
    vce_traversal_t* reread = nullptr;
    REQUIRE(vce_labels_read(path.c_str(), &reread) == VCE_OK);
    TraversalHandle loaded(reread);
    CHECK(vce_traversal_size(loaded.get()) == 5);
    CHECK(vce_traversal_entry_frame(loaded.get()) == 3);

    const double tiny[5] = {0.2, 1, 1, 1, 1};
    vce_traversal_t* bad = nullptr;
    CHECK(vce_traversal_generate(tiny, 1, 0.0, 9, &bad) == VCE_ERR_VALIDATION);
    CHECK(vce_traversal_size(nullptr) == 0);
    CHECK(vce_traversal_entry_frame(nullptr) == -1);
}

TEST_CASE("corrupt, decode and evaluate a deterministic capsule run") {
    const double dwell[5] = {5, 5, 5, 10, 5};
    HmmHandle hmm = exact_model(dwell);

    vce_traversal_t* traw = nullptr;
    REQUIRE(vce_traversal_generate(dwell, 1, 0.0, 3, &traw) == VCE_OK);
    TraversalHandle truth(traw);
    REQUIRE(vce_traversal_size(truth.get()) == 30);
    REQUIRE(vce_traversal_entry_frame(truth.get()) == 15);

    vce_frames_t* fraw = nullptr;
    REQUIRE(vce_corrupt_to_posteriors(truth.get(), hmm.get(), 0.9, 0.0, 4, 500, &fraw) ==
            VCE_OK);
    FramesHandle frames(fraw);
    REQUIRE(vce_frames_size(frames.get()) == 30);

    // Identity emissions force each frame's argmax onto the true organ.
    for (size_t i = 0; i < 30; ++i) {
        vce_frame frame;
        REQUIRE(vce_frames_get(frames.get(), i, &frame) == VCE_OK);
        CHECK(frame.frame_index == static_cast<int64_t>(i));
        CHECK(frame.timestamp_ms == static_cast<int64_t>(i) * 500);
        int organ = -1;
        REQUIRE(vce_traversal_get(truth.get(), i, nullptr, &organ, nullptr) == VCE_OK);
        int best = 0;
        for (int j = 1; j < 5; ++j) {
            if (frame.organ_posterior[j] > frame.organ_posterior[best]) best = j;
        }
        CHECK(best == organ);
        CHECK(frame.anomaly_posterior < 0.5);
    }

    vce_decoded_t* draw = nullptr;
    REQUIRE(vce_viterbi(hmm.get(), frames.get(), &draw) == VCE_OK);
    DecodedHandle decoded(draw);
    REQUIRE(vce_decoded_size(decoded.get()) == 30);
    CHECK(vce_decoded_feasible(decoded.get()) == 1);
    CHECK(vce_decoded_log_prob(decoded.get()) < 0.0);
    for (size_t i = 0; i < 30; ++i) {
        int64_t frame = -1;
        int organ = -1;
        REQUIRE(vce_decoded_get(decoded.get(), i, &frame, &organ) == VCE_OK);
        int expected = -1;
        REQUIRE(vce_traversal_get(truth.get(), i, nullptr, &expected, nullptr) == VCE_OK);
        CHECK(frame == static_cast<int64_t>(i));
        CHECK(organ == expected);
    }

    const std::string path = scratch("decoded.csv");
    REQUIRE(vce_decoded_write(decoded.get(), path.c_str()) == VCE_OK);
    vce_decoded_t* reread = nullptr;
    REQUIRE(vce_decoded_read(path.c_str(), &reread) == VCE_OK);
    DecodedHandle loaded(reread);
    CHECK(vce_decoded_size(loaded.get()) == 30);
    CHECK(vce_decoded_log_prob(loaded.get()) ==
          doctest::Approx(vce_decoded_log_prob(decoded.get())).epsilon(1e-8));

    vce_metrics localization;
    REQUIRE(vce_eval_localization(decoded.get(), truth.get(), &localization) == VCE_OK);
    CHECK(localization.accuracy == 1.0);
    CHECK(localization.precision == 1.0);
    CHECK(localization.recall == 1.0);
    CHECK(localization.num_flagged == 0);

    // No anomalies in truth and none predicted: both denominators collapse,
    // the positive class is flagged, accuracy stays perfect.
    vce_metrics anomaly;
    REQUIRE(vce_eval_anomaly(frames.get(), truth.get(), &anomaly) == VCE_OK);
    CHECK(anomaly.accuracy == 1.0);
    CHECK(anomaly.precision == 0.0);
    CHECK(anomaly.num_flagged == 1);
    CHECK(anomaly.flagged_classes[0] == 1);

    const std::string fpath = scratch("frames.csv");
    REQUIRE(vce_frames_write(frames.get(), fpath.c_str()) == VCE_OK);
    vce_frames_t* freread = nullptr;
    REQUIRE(vce_frames_read(fpath.c_str(), &freread) == VCE_OK);
    FramesHandle floaded(freread);
    CHECK(vce_frames_size(floaded.get()) == 30);
}

TEST_CASE("an impossible observation order decodes to an empty infeasible path") {
    const double dwell[5] = {2, 2, 2, 2, 2};
    HmmHandle hmm = exact_model(dwell);

    vce_frame frames[2] = {};
    frames[0].frame_index = 0;
    frames[0].organ_posterior[2] = 0.8;
    frames[0].organ_posterior[0] = 0.05;
    frames[0].organ_posterior[1] = 0.05;
    frames[0].organ_posterior[3] = 0.05;
    frames[0].organ_posterior[4] = 0.05;
    frames[0].anomaly_posterior = 0.1;
    frames[1] = frames[0];
    frames[1].frame_index = 1;
    frames[1].organ_posterior[0] = 0.8;
    frames[1].organ_posterior[2] = 0.05;

    vce_frames_t* fraw = nullptr;
    REQUIRE(vce_frames_create(frames, 2, &fraw) == VCE_OK);
    FramesHandle stream(fraw);

    vce_decoded_t* draw = nullptr;
    REQUIRE(vce_viterbi(hmm.get(), stream.get(), &draw) == VCE_OK);
    DecodedHandle decoded(draw);
    CHECK(vce_decoded_feasible(decoded.get()) == 0);
    CHECK(vce_decoded_size(decoded.get()) == 0);
    CHECK(std::isinf(vce_decoded_log_prob(decoded.get())));

    // The infeasible form survives the file round-trip.
    const std::string path = scratch("decoded_infeasible.csv");
    REQUIRE(vce_decoded_write(decoded.get(), path.c_str()) == VCE_OK);
    vce_decoded_t* reread = nullptr;
    REQUIRE(vce_decoded_read(path.c_str(), &reread) == VCE_OK);
    DecodedHandle loaded(reread);
    CHECK(vce_decoded_feasible(loaded.get()) == 0);
    CHECK(vce_decoded_size(loaded.get()) == 0);
}

TEST_CASE("frame streams validate on create and read") {
    vce_frame bad = {};
    bad.frame_index = 0;
    bad.organ_posterior[0] = 0.5;  // sums to 0.5
    bad.anomaly_posterior = 0.0;
    vce_frames_t* out = nullptr;
    CHECK(vce_frames_create(&bad, 1, &out) == VCE_ERR_VALIDATION);
    CHECK(out == nullptr);

    vce_frame dup[2] = {};
    for (auto& f : dup) {
        f.organ_posterior[0] = 1.0;
        f.frame_index = 3;
    }
    CHECK(vce_frames_create(dup, 2, &out) == VCE_ERR_VALIDATION);
    CHECK(vce_frames_create(nullptr, 2, &out) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_frames_create(nullptr, 0, &out) == VCE_OK);
    FramesHandle empty(out);
    CHECK(vce_frames_size(empty.get()) == 0);
    vce_frame probe;
    CHECK(vce_frames_get(empty.get(), 0, &probe) == VCE_ERR_INVALID_ARGUMENT);

    CHECK(vce_frames_read(scratch("no_such_frames.csv").c_str(), &out) == VCE_ERR_IO);
    write_file(scratch("frames_bad.csv"), "frame,stuff\n");
    CHECK(vce_frames_read(scratch("frames_bad.csv").c_str(), &out) == VCE_ERR_PARSE);
    CHECK(vce_last_error_line() == 1);
}

TEST_CASE("the online filter tracks, resets and recovers through the C surface") {
    const double dwell[5] = {2, 2, 2, 2, 2};
    HmmHandle hmm = exact_model(dwell);
    vce_filter_t* raw = nullptr;
    REQUIRE(vce_filter_create(hmm.get(), &raw) == VCE_OK);
    FilterHandle filter(raw);

    double belief[5];
    REQUIRE(vce_filter_belief(filter.get(), belief) == VCE_OK);
    CHECK(belief[0] == 1.0);
    CHECK(vce_filter_frames_seen(filter.get()) == 0);
    CHECK(vce_filter_degenerate(filter.get()) == 0);
    CHECK(vce_filter_entry_mass(filter.get()) == 0.0);

    REQUIRE(vce_filter_update(filter.get(), 0) == VCE_OK);
    REQUIRE(vce_filter_belief(filter.get(), belief) == VCE_OK);
    CHECK(belief[0] == 1.0);
    REQUIRE(vce_filter_update(filter.get(), 1) == VCE_OK);
    REQUIRE(vce_filter_belief(filter.get(), belief) == VCE_OK);
    CHECK(belief[1] == 1.0);

    // Observing the small intestine two organs early has zero likelihood;
    // the filter falls back to its prediction and flags the step.
    REQUIRE(vce_filter_update(filter.get(), 3) == VCE_OK);
    CHECK(vce_filter_degenerate(filter.get()) == 1);
    REQUIRE(vce_filter_belief(filter.get(), belief) == VCE_OK);
    CHECK(belief[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(belief[2] == doctest::Approx(0.5).epsilon(1e-15));

    REQUIRE(vce_filter_update(filter.get(), 2) == VCE_OK);
    CHECK(vce_filter_degenerate(filter.get()) == 0);
    REQUIRE(vce_filter_belief(filter.get(), belief) == VCE_OK);
    CHECK(belief[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(vce_filter_frames_seen(filter.get()) == 4);

    CHECK(vce_filter_update(filter.get(), 9) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_filter_frames_seen(filter.get()) == 4);  // failed update left state alone
}

TEST_CASE("gating through the config handle matches the deterministic scenario") {
    const double dwell[5] = {5, 5, 5, 10, 5};
    HmmHandle hmm = exact_model(dwell);

    vce_traversal_t* traw = nullptr;
    REQUIRE(vce_traversal_generate(dwell, 1, 0.0, 3, &traw) == VCE_OK);
    TraversalHandle truth(traw);
    vce_frames_t* fraw = nullptr;
    REQUIRE(vce_corrupt_to_posteriors(truth.get(), hmm.get(), 0.9, 0.0, 4, 500, &fraw) ==
            VCE_OK);
    FramesHandle frames(fraw);

    vce_config_t* craw = nullptr;
    REQUIRE(vce_config_create(&craw) == VCE_OK);
    ConfigHandle config(craw);
    REQUIRE(vce_config_set(config.get(), "entry_hysteresis", "3") == VCE_OK);

    vce_gating_report report;
    REQUIRE(vce_gate_run(hmm.get(), frames.get(), config.get(), truth.get(), &report) ==
            VCE_OK);
    CHECK(report.has_true_entry == 1);
    CHECK(report.true_entry == 15);
    CHECK(report.has_detected_entry == 1);
    CHECK(report.detected_entry == 17);
    CHECK(report.frames_suppressed == 17);
    CHECK(report.frames_transmitted == 13);
    CHECK(report.has_si_frames_missed == 1);
    CHECK(report.si_frames_missed == 2);
    CHECK(report.energy_spent == 160.0);
    CHECK(report.energy_saved_vs_transmit_all == 170.0);

    const std::string path = scratch("gating.txt");
    REQUIRE(vce_gating_report_write(&report, path.c_str()) == VCE_OK);
    vce_gating_report loaded;
    REQUIRE(vce_gating_report_read(path.c_str(), &loaded) == VCE_OK);
    CHECK(loaded.detected_entry == 17);
    CHECK(loaded.energy_spent == 160.0);
    CHECK(loaded.has_si_frames_missed == 1);
    CHECK(loaded.si_frames_missed == 2);

    // Without truth the truth-dependent fields are absent.
    vce_gating_report blind;
    REQUIRE(vce_gate_run(hmm.get(), frames.get(), config.get(), nullptr, &blind) == VCE_OK);
    CHECK(blind.has_true_entry == 0);
    CHECK(blind.has_si_frames_missed == 0);
    CHECK(blind.has_detected_entry == 1);
    CHECK(blind.detected_entry == 17);

    CHECK(vce_gate_run(nullptr, frames.get(), config.get(), nullptr, &blind) ==
          VCE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("adaptive frame rates boost only confident in-SI frames") {
    const double anomaly[5] = {0.1, 0.95, 0.7, 0.9, 0.96};
    vce_frame raw[5] = {};
    for (int i = 0; i < 5; ++i) {
        raw[i].frame_index = i;
        raw[i].timestamp_ms = i * 500;
        raw[i].organ_posterior[0] = 1.0;
        raw[i].anomaly_posterior = anomaly[i];
    }
    vce_frames_t* fraw = nullptr;
    REQUIRE(vce_frames_create(raw, 5, &fraw) == VCE_OK);
    FramesHandle frames(fraw);

    const int in_si[5] = {0, 1, 1, 1, 1};
    double rates[5] = {};
    REQUIRE(vce_adapt_frame_rate(frames.get(), in_si, 5, 0.9, 2.0, 8.0, rates) == VCE_OK);
    CHECK(rates[0] == 2.0);
    CHECK(rates[1] == 8.0);
    CHECK(rates[2] == 2.0);
    CHECK(rates[3] == 8.0);  // exactly at threshold counts
    CHECK(rates[4] == 8.0);

    CHECK(vce_adapt_frame_rate(frames.get(), in_si, 3, 0.9, 2.0, 8.0, rates) ==
          VCE_ERR_VALIDATION);
    CHECK(vce_adapt_frame_rate(frames.get(), in_si, 5, 0.9, 0.0, 8.0, rates) ==
          VCE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("uncertainty weighting reports value and both gradients") {
    const double losses[2] = {1.0, 2.0};
    const double at_zero[2] = {0.0, 0.0};
    double value = 0.0;
    double grad_sigma[2] = {};
    double grad_losses[2] = {};
    REQUIRE(vce_uw_loss(losses, at_zero, &value, grad_sigma, grad_losses) == VCE_OK);
    CHECK(value == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(grad_sigma[0] == doctest::Approx(0.0).scale(1));
    CHECK(grad_sigma[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(grad_losses[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(grad_losses[1] == doctest::Approx(1.0).epsilon(1e-15));

    // At log_sigma = log(loss) the value settles to its stationary level.
    const double stationary[2] = {0.0, std::log(2.0)};
    REQUIRE(vce_uw_loss(losses, stationary, &value, nullptr, nullptr) == VCE_OK);
    CHECK(value == doctest::Approx(2.6931471805599453094).epsilon(1e-12));

    const double bad[2] = {0.0, 1.0};
    CHECK(vce_uw_loss(bad, at_zero, &value, nullptr, nullptr) == VCE_ERR_VALIDATION);
    CHECK(vce_uw_loss(nullptr, at_zero, &value, nullptr, nullptr) ==
          VCE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("loss traces drive dynamic weighting through handles") {
    const double task1[2] = {1.0, 1.0};
    const double task2[2] = {1.0, 2.0};
    vce_trace_t* raw = nullptr;
    REQUIRE(vce_trace_create(task1, task2, 2, &raw) == VCE_OK);
    TraceHandle trace(raw);
    CHECK(vce_trace_epochs(trace.get()) == 2);

    double l1 = 0.0, l2 = 0.0;
    REQUIRE(vce_trace_get(trace.get(), 2, &l1, &l2) == VCE_OK);
    CHECK(l1 == 1.0);
    CHECK(l2 == 2.0);
    CHECK(vce_trace_get(trace.get(), 0, &l1, &l2) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_trace_get(trace.get(), 3, &l1, &l2) == VCE_ERR_INVALID_ARGUMENT);

    double weights[2] = {};
    REQUIRE(vce_dwa_weights(trace.get(), 2.0, 3, weights) == VCE_OK);
    CHECK(weights[0] == doctest::Approx(0.7550813375962908707).epsilon(1e-12));
    CHECK(weights[1] == doctest::Approx(1.2449186624037091293).epsilon(1e-12));
    CHECK(weights[0] + weights[1] == doctest::Approx(2.0).epsilon(1e-15));

    REQUIRE(vce_dwa_weights(trace.get(), 2.0, 1, weights) == VCE_OK);
    CHECK(weights[0] == 1.0);
    CHECK(weights[1] == 1.0);

    CHECK(vce_dwa_weights(trace.get(), 2.0, 4, weights) == VCE_ERR_VALIDATION);
    CHECK(vce_dwa_weights(trace.get(), 0.0, 3, weights) == VCE_ERR_INVALID_ARGUMENT);

    const std::string path = scratch("trace.csv");
    REQUIRE(vce_trace_write(trace.get(), path.c_str()) == VCE_OK);
    CHECK(slurp(path) == "epoch,loss_task1,loss_task2\n1,1,1\n2,1,2\n");
    vce_trace_t* reread = nullptr;
    REQUIRE(vce_trace_read(path.c_str(), &reread) == VCE_OK);
    TraceHandle loaded(reread);
    CHECK(vce_trace_epochs(loaded.get()) == 2);

    const double zero[1] = {0.0};
    const double one[1] = {1.0};
    vce_trace_t* bad = nullptr;
    CHECK(vce_trace_create(zero, one, 1, &bad) == VCE_ERR_VALIDATION);
}

TEST_CASE("focal and cross-entropy losses agree with the scalar forms") {
    const double probs[2] = {0.1, 0.9};
    double value = 0.0;
    double grad[2] = {};
    int clamped = -1;
    REQUIRE(vce_focal_loss(probs, 2, 1, 2.0, nullptr, 0, &value, grad, &clamped) == VCE_OK);
    CHECK(value == doctest::Approx(0.00105360515657826301).epsilon(1e-12));
    CHECK(clamped == 0);
    CHECK(grad[0] == 0.0);
    CHECK(grad[1] < 0.0);

    double ce = 0.0;
    REQUIRE(vce_cross_entropy(probs, 2, 1, &ce, nullptr) == VCE_OK);
    CHECK(ce == doctest::Approx(-std::log(0.9)).epsilon(1e-15));
    REQUIRE(vce_focal_loss(probs, 2, 1, 0.0, nullptr, 0, &value, nullptr, nullptr) == VCE_OK);
    CHECK(value == doctest::Approx(ce).epsilon(1e-15));

    const double uniform[5] = {0.2, 0.2, 0.2, 0.2, 0.2};
    REQUIRE(vce_cross_entropy(uniform, 5, 2, &ce, nullptr) == VCE_OK);
    CHECK(ce == doctest::Approx(1.6094379124341003746).epsilon(1e-12));

    const double hard[2] = {0.0, 1.0};
    REQUIRE(vce_cross_entropy(hard, 2, 0, &ce, &clamped) == VCE_OK);
    CHECK(clamped == 1);
    CHECK(ce == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));

    const double alpha[2] = {0.25, 0.75};
    REQUIRE(vce_focal_loss(probs, 2, 1, 0.0, alpha, 2, &value, nullptr, nullptr) == VCE_OK);
    CHECK(value == doctest::Approx(0.75 * -std::log(0.9)).epsilon(1e-12));

    CHECK(vce_focal_loss(probs, 0, 0, 2.0, nullptr, 0, &value, nullptr, nullptr) ==
          VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_focal_loss(probs, 2, 5, 2.0, nullptr, 0, &value, nullptr, nullptr) ==
          VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_focal_loss(probs, 2, 1, -1.0, nullptr, 0, &value, nullptr, nullptr) ==
          VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_focal_loss(probs, 2, 1, 2.0, alpha, 1, &value, nullptr, nullptr) ==
          VCE_ERR_VALIDATION);
    const double outside[2] = {0.5, 1.5};
    CHECK(vce_cross_entropy(outside, 2, 1, &ce, nullptr) == VCE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("confusion metrics cross the boundary intact") {
    const int64_t counts[4] = {85, 5, 5, 5};
    vce_metrics metrics;
    REQUIRE(vce_metrics_from_confusion(2, counts, VCE_AVERAGING_BINARY_POSITIVE, &metrics) ==
            VCE_OK);
    CHECK(metrics.accuracy == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(metrics.precision == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(metrics.recall == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(metrics.f1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(metrics.num_flagged == 0);

    char table[256];
    REQUIRE(vce_metrics_table(&metrics, table, sizeof table) == VCE_OK);
    CHECK(std::strcmp(table, "accuracy,f1,precision,recall\n0.9,0.5,0.5,0.5\n") == 0);
    CHECK(vce_metrics_table(&metrics, table, 16) == VCE_ERR_INVALID_ARGUMENT);

    const std::string record = scratch("metrics.txt");
    REQUIRE(vce_metrics_record_write(&metrics, record.c_str()) == VCE_OK);
    CHECK(slurp(record).find("flagged_classes = none\n") != std::string::npos);

    const int64_t negative[4] = {85, 5, -5, 5};
    CHECK(vce_metrics_from_confusion(2, negative, VCE_AVERAGING_BINARY_POSITIVE, &metrics) ==
          VCE_ERR_VALIDATION);
    CHECK(vce_metrics_from_confusion(2, counts, 9, &metrics) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_metrics_from_confusion(2, nullptr, 0, &metrics) == VCE_ERR_INVALID_ARGUMENT);

    int64_t matrix[25] = {};
    for (int i = 0; i < 25; ++i) matrix[i] = i;
    const std::string path = scratch("confusion.csv");
    REQUIRE(vce_confusion_write(path.c_str(), matrix) == VCE_OK);
    int64_t loaded[25] = {};
    REQUIRE(vce_confusion_read(path.c_str(), loaded) == VCE_OK);
    CHECK(std::memcmp(matrix, loaded, sizeof matrix) == 0);
    CHECK(vce_confusion_read(scratch("no_such_confusion.csv").c_str(), loaded) == VCE_ERR_IO);
}

TEST_CASE("manifests rebalance end to end through the pipeline entry point") {
    std::string csv = "patient_id,frame_index,organ,pathology_tag\n";
    int frame = 0;
    for (int i = 0; i < 4; ++i) csv += "p0," + std::to_string(frame++) + ",mouth,\n";
    for (int i = 0; i < 20; ++i) csv += "p0," + std::to_string(frame++) + ",stomach,\n";
    for (int i = 0; i < 10; ++i) {
        csv += "p0," + std::to_string(frame++) + ",small_intestine,polyp\n";
    }
    const std::string path = scratch("manifest.csv");
    write_file(path, csv);

    vce_manifest_t* raw = nullptr;
    REQUIRE(vce_manifest_read(path.c_str(), &raw) == VCE_OK);
    ManifestHandle manifest(raw);
    CHECK(vce_manifest_size(manifest.get()) == 34);

    // The writer reproduces the canonical layout byte for byte.
    const std::string copy = scratch("manifest_copy.csv");
    REQUIRE(vce_manifest_write(manifest.get(), copy.c_str()) == VCE_OK);
    CHECK(slurp(copy) == csv);

    const std::string out_dir = scratch("pipeline");
    REQUIRE(vce_rebalance_pipeline(manifest.get(), 77, out_dir.c_str()) == VCE_OK);
    for (const char* name : {"rebalanced.csv", "train.csv", "val.csv", "distribution.csv",
                             "pathologies.csv", "report.txt"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(out_dir) / name));
    }

    // 24 negatives vs 10 positives cuts 14 stomach frames; protected organs
    // survive and the 20 survivors split 14/6.
    vce_manifest_t* rb = nullptr;
    REQUIRE(vce_manifest_read((fs::path(out_dir) / "rebalanced.csv").string().c_str(), &rb) ==
            VCE_OK);
    ManifestHandle rebalanced(rb);
    CHECK(vce_manifest_size(rebalanced.get()) == 20);
    CHECK(slurp((fs::path(out_dir) / "rebalanced.csv").string()).find(",mouth,") !=
          std::string::npos);
    vce_manifest_t* train = nullptr;
    REQUIRE(vce_manifest_read((fs::path(out_dir) / "train.csv").string().c_str(), &train) ==
            VCE_OK);
    ManifestHandle train_handle(train);
    CHECK(vce_manifest_size(train_handle.get()) == 14);

    CHECK(vce_manifest_read(scratch("no_such_manifest.csv").c_str(), &raw) == VCE_ERR_IO);
    write_file(scratch("manifest_dup.csv"),
               "patient_id,frame_index,organ,pathology_tag\na,0,mouth,\na,0,mouth,\n");
    CHECK(vce_manifest_read(scratch("manifest_dup.csv").c_str(), &raw) == VCE_ERR_VALIDATION);
}

TEST_CASE("the simulation entry point is deterministic and writes the full tree") {
    vce_config_t* craw = nullptr;
    REQUIRE(vce_config_create(&craw) == VCE_OK);
    ConfigHandle config(craw);
    REQUIRE(vce_config_set(config.get(), "patients", "2") == VCE_OK);
    REQUIRE(vce_config_set(config.get(), "dwell_frames", "2,3,4,6,3") == VCE_OK);
    REQUIRE(vce_config_set(config.get(), "seed", "5") == VCE_OK);

    const std::string first = scratch("sim_a");
    const std::string second = scratch("sim_b");
    REQUIRE(vce_simulate(config.get(), first.c_str()) == VCE_OK);
    REQUIRE(vce_simulate(config.get(), second.c_str()) == VCE_OK);

    for (const char* name : {"config.txt", "summary.csv", "metrics_localization.csv",
                             "metrics_localization.txt", "metrics_anomaly.csv",
                             "metrics_anomaly.txt"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(first) / name));
    }
    for (const char* name : {"truth.csv", "posteriors.csv", "decoded.csv", "gating.txt"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(first) / "patients" / "patient_0000" / name));
        CHECK(fs::exists(fs::path(first) / "patients" / "patient_0001" / name));
    }

    CHECK(slurp((fs::path(first) / "summary.csv").string()) ==
          slurp((fs::path(second) / "summary.csv").string()));
    CHECK(slurp((fs::path(first) / "patients" / "patient_0001" / "posteriors.csv").string()) ==
          slurp((fs::path(second) / "patients" / "patient_0001" / "posteriors.csv").string()));

    CHECK(vce_simulate(nullptr, first.c_str()) == VCE_ERR_INVALID_ARGUMENT);
    CHECK(vce_simulate(config.get(), nullptr) == VCE_ERR_INVALID_ARGUMENT);
}

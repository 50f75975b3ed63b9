#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

namespace vce {

namespace {

constexpr const char* kPosteriorHeader =
    "frame_index,timestamp_ms,p_mouth,p_esophagus,p_stomach,p_small_intestine,p_colon,p_anomaly";
constexpr const char* kLabelHeader = "frame_index,organ,anomaly";
constexpr const char* kDecodedHeader = "frame_index,organ";
constexpr const char* kDecodedFooterPrefix = "# log_prob = ";
constexpr const char* kLossHeader = "epoch,loss_task1,loss_task2";
constexpr const char* kManifestHeader = "patient_id,frame_index,organ,pathology_tag";
constexpr const char* kDistributionHeader =
    "subset,mouth,esophagus,stomach,small_intestine,colon,negative,positive,total";
constexpr const char* kMetricsHeader = "accuracy,f1,precision,recall";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Reads physical lines, strips CR, tracks 1-based line numbers for errors.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
        if (!in_.is_open()) fail(Errc::io_error, "cannot open " + path_);
    }

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no_;
        return true;
    }

    std::int64_t line_no() const { return line_no_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::int64_t line_no_ = 0;
};

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::int64_t parse_i64(std::string_view text, std::int64_t line, const char* what) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(Errc::parse_error, std::string("invalid ") + what + ": '" + std::string(text) + "'",
             line);
    }
    return value;
}

std::uint64_t parse_u64(std::string_view text, std::int64_t line, const char* what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(Errc::parse_error, std::string("invalid ") + what + ": '" + std::string(text) + "'",
             line);
    }
    return value;
}

double parse_double(std::string_view text, std::int64_t line, const char* what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(Errc::parse_error, std::string("invalid ") + what + ": '" + std::string(text) + "'",
             line);
    }
    return value;
}

Organ parse_organ(std::string_view token, std::int64_t line) {
    const auto organ = organ_from_name(token);
    if (!organ.has_value()) {
        fail(Errc::parse_error, "unknown organ '" + std::string(token) + "'", line);
    }
    return *organ;
}

void expect_header(LineReader& reader, const char* header) {
    std::string line;
    if (!reader.next(line) || line != header) {
        fail(Errc::parse_error,
             "expected header '" + std::string(header) + "' in " + reader.path(), 1);
    }
}

void expect_field_count(const std::vector<std::string_view>& fields, std::size_t expected,
                        std::int64_t line) {
    if (fields.size() != expected) {
        fail(Errc::parse_error,
             "expected " + std::to_string(expected) + " fields, got " +
                 std::to_string(fields.size()),
             line);
    }
}

// Walks a `key = value` file, skipping blanks and '#' comments. The callback
// sees trimmed key and value with the 1-based line number.
template <class Fn>
void read_kv_file(const std::filesystem::path& path, Fn&& on_pair) {
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos) {
            fail(Errc::parse_error, "expected 'key = value', got '" + std::string(s) + "'",
                 reader.line_no());
        }
        on_pair(trim(s.substr(0, eq)), trim(s.substr(eq + 1)), reader.line_no());
    }
}

std::string optional_i64_string(const std::optional<std::int64_t>& value) {
    return value.has_value() ? std::to_string(*value) : std::string("none");
}

std::optional<std::int64_t> parse_optional_i64(std::string_view text, std::int64_t line,
                                               const char* what) {
    if (text == "none") return std::nullopt;
    return parse_i64(text, line, what);
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    std::string s(buf);
    return s == "-0" ? std::string("0") : s;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) fail(Errc::io_error, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) fail(Errc::io_error, "write failed for " + path.string());
}

// ---- posterior streams -----------------------------------------------------

void write_posterior_stream(const std::filesystem::path& path,
                            std::span<const PosteriorFrame> frames) {
    std::string out(kPosteriorHeader);
    out.push_back('\n');
    for (const PosteriorFrame& pf : frames) {
        out += std::to_string(pf.frame_index);
        out.push_back(',');
        out += std::to_string(pf.timestamp_ms);
        for (double p : pf.organ_posterior) {
            out.push_back(',');
            out += format_double(p);
        }
        out.push_back(',');
        out += format_double(pf.anomaly_posterior);
        out.push_back('\n');
    }
    write_text_file(path, out);
}

std::vector<PosteriorFrame> read_posterior_stream(const std::filesystem::path& path) {
    LineReader reader(path);
    expect_header(reader, kPosteriorHeader);

    std::vector<PosteriorFrame> frames;
    std::string line;
    while (reader.next(line)) {
        const std::int64_t line_no = reader.line_no();
        const auto fields = split_csv(line);
        expect_field_count(fields, 8, line_no);

        PosteriorFrame pf;
        pf.frame_index = parse_i64(fields[0], line_no, "frame_index");
        pf.timestamp_ms = parse_i64(fields[1], line_no, "timestamp_ms");
        for (int i = 0; i < kNumOrgans; ++i) {
            pf.organ_posterior[i] = parse_double(fields[2 + i], line_no, "organ posterior");
        }
        pf.anomaly_posterior = parse_double(fields[7], line_no, "anomaly posterior");

        try {
            pf.validate();
        } catch (const Error& e) {
            fail(e.code(), e.message(), line_no);
        }
        if (!frames.empty() && pf.frame_index <= frames.back().frame_index) {
            fail(Errc::invariant_violation, "frame indices must strictly increase", line_no);
        }
        frames.push_back(pf);
    }
    return frames;
}

// ---- traversal labels ------------------------------------------------------

void write_labels(const std::filesystem::path& path, std::span<const LabelFrame> labels) {
    std::string out(kLabelHeader);
    out.push_back('\n');
    for (const LabelFrame& lf : labels) {
        out += std::to_string(lf.frame_index);
        out.push_back(',');
        out += organ_name(lf.organ);
        out += lf.anomaly ? ",1\n" : ",0\n";
    }
    write_text_file(path, out);
}

std::vector<LabelFrame> read_labels(const std::filesystem::path& path) {
    LineReader reader(path);
    expect_header(reader, kLabelHeader);

    std::vector<LabelFrame> labels;
    std::string line;
    while (reader.next(line)) {
        const std::int64_t line_no = reader.line_no();
        const auto fields = split_csv(line);
        expect_field_count(fields, 3, line_no);

        LabelFrame lf;
        lf.frame_index = parse_i64(fields[0], line_no, "frame_index");
        lf.organ = parse_organ(fields[1], line_no);
        if (fields[2] == "0") {
            lf.anomaly = false;
        } else if (fields[2] == "1") {
            lf.anomaly = true;
        } else {
            fail(Errc::parse_error, "anomaly flag must be 0 or 1", line_no);
        }

        if (!labels.empty()) {
            if (lf.frame_index <= labels.back().frame_index) {
                fail(Errc::duplicate_frame_index, "frame indices must strictly increase",
                     line_no);
            }
            if (static_cast<int>(lf.organ) < static_cast<int>(labels.back().organ)) {
                fail(Errc::monotonicity_violation, "organ order decreases", line_no);
            }
        }
        labels.push_back(lf);
    }
    if (labels.empty()) {
        fail(Errc::parse_error, "label file has no data rows: " + reader.path());
    }
    return labels;
}

// ---- confusion counts ------------------------------------------------------

void write_confusion(const std::filesystem::path& path, const ConfusionCounts5& counts) {
    std::string out("# confusion counts: row = true organ, column = predicted organ\n");
    out += "# organ order: mouth,esophagus,stomach,small_intestine,colon\n";
    for (const auto& row : counts) {
        for (int c = 0; c < kNumOrgans; ++c) {
            if (c > 0) out.push_back(',');
            out += std::to_string(row[c]);
        }
        out.push_back('\n');
    }
    write_text_file(path, out);
}

ConfusionCounts5 read_confusion(const std::filesystem::path& path) {
    LineReader reader(path);
    ConfusionCounts5 counts{};
    int rows = 0;
    std::string line;
    while (reader.next(line)) {
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const std::int64_t line_no = reader.line_no();
        if (rows == kNumOrgans) {
            fail(Errc::shape_error, "expected exactly 5 count rows", line_no);
        }
        const auto fields = split_csv(s);
        if (fields.size() != static_cast<std::size_t>(kNumOrgans)) {
            fail(Errc::shape_error,
                 "expected 5 columns, got " + std::to_string(fields.size()), line_no);
        }
        for (int c = 0; c < kNumOrgans; ++c) {
            const std::int64_t v = parse_i64(fields[c], line_no, "count");
            if (v < 0) fail(Errc::negative_count, "counts must be non-negative", line_no);
            counts[rows][c] = v;
        }
        ++rows;
    }
    if (rows != kNumOrgans) {
        fail(Errc::shape_error,
             "expected 5 count rows, got " + std::to_string(rows) + " in " + reader.path());
    }
    return counts;
}

// ---- decoded paths ---------------------------------------------------------

void write_decoded(const std::filesystem::path& path, std::span<const std::int64_t> frame_indices,
                   std::span<const Organ> organs, double log_prob) {
    if (frame_indices.size() != organs.size()) {
        fail(Errc::length_mismatch, "frame index and organ counts differ");
    }
    std::string out(kDecodedHeader);
    out.push_back('\n');
    for (std::size_t i = 0; i < organs.size(); ++i) {
        out += std::to_string(frame_indices[i]);
        out.push_back(',');
        out += organ_name(organs[i]);
        out.push_back('\n');
    }
    out += kDecodedFooterPrefix;
    out += format_double(log_prob);
    out.push_back('\n');
    write_text_file(path, out);
}

DecodedFile read_decoded(const std::filesystem::path& path) {
    LineReader reader(path);
    expect_header(reader, kDecodedHeader);

    DecodedFile out;
    bool saw_footer = false;
    std::string line;
    while (reader.next(line)) {
        const std::int64_t line_no = reader.line_no();
        if (saw_footer) {
            fail(Errc::parse_error, "content after log_prob footer", line_no);
        }
        if (line.starts_with("#")) {
            if (!line.starts_with(kDecodedFooterPrefix)) {
                fail(Errc::parse_error, "unexpected comment line", line_no);
            }
            out.log_prob = parse_double(
                std::string_view(line).substr(std::string_view(kDecodedFooterPrefix).size()),
                line_no, "log_prob");
            if (!(out.log_prob <= 0.0)) {
                fail(Errc::invariant_violation, "log_prob must be <= 0", line_no);
            }
            saw_footer = true;
            continue;
        }
        const auto fields = split_csv(line);
        expect_field_count(fields, 2, line_no);
        const std::int64_t frame = parse_i64(fields[0], line_no, "frame_index");
        if (!out.frame_indices.empty() && frame <= out.frame_indices.back()) {
            fail(Errc::invariant_violation, "frame indices must strictly increase", line_no);
        }
        out.frame_indices.push_back(frame);
        out.organs.push_back(parse_organ(fields[1], line_no));
    }
    if (!saw_footer) {
        fail(Errc::parse_error, "missing log_prob footer in " + reader.path());
    }
    const bool infeasible = std::isinf(out.log_prob) && out.log_prob < 0.0;
    if (infeasible != out.organs.empty()) {
        fail(Errc::invariant_violation,
             "empty path and -inf log_prob must appear together in " + reader.path());
    }
    return out;
}

// ---- loss traces -----------------------------------------------------------

void write_loss_trace(const std::filesystem::path& path, const LossTrace& trace) {
    trace.validate();
    std::string out(kLossHeader);
    out.push_back('\n');
    for (std::size_t i = 0; i < trace.task1.size(); ++i) {
        out += std::to_string(i + 1);
        out.push_back(',');
        out += format_double(trace.task1[i]);
        out.push_back(',');
        out += format_double(trace.task2[i]);
        out.push_back('\n');
    }
    write_text_file(path, out);
}

LossTrace read_loss_trace(const std::filesystem::path& path) {
    LineReader reader(path);
    expect_header(reader, kLossHeader);

    LossTrace trace;
    std::string line;
    while (reader.next(line)) {
        const std::int64_t line_no = reader.line_no();
        const auto fields = split_csv(line);
        expect_field_count(fields, 3, line_no);
        const std::int64_t epoch = parse_i64(fields[0], line_no, "epoch");
        if (epoch != static_cast<std::int64_t>(trace.task1.size()) + 1) {
            fail(Errc::parse_error,
                 "epochs must run 1..N in order, got " + std::to_string(epoch), line_no);
        }
        const double l1 = parse_double(fields[1], line_no, "loss_task1");
        const double l2 = parse_double(fields[2], line_no, "loss_task2");
        if (!std::isfinite(l1) || l1 <= 0.0 || !std::isfinite(l2) || l2 <= 0.0) {
            fail(Errc::non_positive_loss, "losses must be positive and finite", line_no);
        }
        trace.task1.push_back(l1);
        trace.task2.push_back(l2);
    }
    return trace;
}

// ---- gating reports --------------------------------------------------------

void write_gating_report(const std::filesystem::path& path, const GatingReport& report) {
    std::string out;
    out += "true_entry = " + optional_i64_string(report.true_entry) + "\n";
    out += "detected_entry = " + optional_i64_string(report.detected_entry) + "\n";
    out += "frames_suppressed = " + std::to_string(report.frames_suppressed) + "\n";
    out += "frames_transmitted = " + std::to_string(report.frames_transmitted) + "\n";
    out += "si_frames_missed = " + optional_i64_string(report.si_frames_missed) + "\n";
    out += "energy_spent = " + format_double(report.energy_spent) + "\n";
    out += "energy_saved_vs_transmit_all = " + format_double(report.energy_saved_vs_transmit_all) +
           "\n";
    write_text_file(path, out);
}

GatingReport read_gating_report(const std::filesystem::path& path) {
    GatingReport report;
    std::unordered_set<std::string> seen;
    read_kv_file(path, [&](std::string_view key, std::string_view value, std::int64_t line_no) {
        if (!seen.insert(std::string(key)).second) {
            fail(Errc::parse_error, "duplicate key '" + std::string(key) + "'", line_no);
        }
        if (key == "true_entry") {
            report.true_entry = parse_optional_i64(value, line_no, "true_entry");
        } else if (key == "detected_entry") {
            report.detected_entry = parse_optional_i64(value, line_no, "detected_entry");
        } else if (key == "frames_suppressed") {
            report.frames_suppressed = parse_i64(value, line_no, "frames_suppressed");
        } else if (key == "frames_transmitted") {
            report.frames_transmitted = parse_i64(value, line_no, "frames_transmitted");
        } else if (key == "si_frames_missed") {
            report.si_frames_missed = parse_optional_i64(value, line_no, "si_frames_missed");
        } else if (key == "energy_spent") {
            report.energy_spent = parse_double(value, line_no, "energy_spent");
        } else if (key == "energy_saved_vs_transmit_all") {
            report.energy_saved_vs_transmit_all =
                parse_double(value, line_no, "energy_saved_vs_transmit_all");
        } else {
            fail(Errc::parse_error, "unknown key '" + std::string(key) + "'", line_no);
        }
    });
    for (const char* required : {"true_entry", "detected_entry", "frames_suppressed",
                                 "frames_transmitted", "si_frames_missed", "energy_spent",
                                 "energy_saved_vs_transmit_all"}) {
        if (!seen.contains(required)) {
            fail(Errc::parse_error,
                 "missing key '" + std::string(required) + "' in " + path.string());
        }
    }
    return report;
}

// ---- manifests -------------------------------------------------------------

void write_manifest(const std::filesystem::path& path, const FrameManifest& manifest) {
    manifest.validate();
    std::string out(kManifestHeader);
    out.push_back('\n');
    for (const ManifestEntry& e : manifest.entries) {
        if (e.patient_id.empty() || e.patient_id.find(',') != std::string::npos ||
            e.pathology_tag.find(',') != std::string::npos) {
            fail(Errc::invalid_argument,
                 "patient ids must be non-empty and ids/tags free of commas");
        }
        out += e.patient_id;
        out.push_back(',');
        out += std::to_string(e.frame_index);
        out.push_back(',');
        out += organ_name(e.organ);
        out.push_back(',');
        out += e.pathology_tag;
        out.push_back('\n');
    }
    write_text_file(path, out);
}

FrameManifest read_manifest(const std::filesystem::path& path) {
    LineReader reader(path);
    expect_header(reader, kManifestHeader);

    FrameManifest manifest;
    std::unordered_set<std::string> seen;
    std::string line;
    while (reader.next(line)) {
        const std::int64_t line_no = reader.line_no();
        const auto fields = split_csv(line);
        expect_field_count(fields, 4, line_no);

        ManifestEntry e;
        e.patient_id = std::string(fields[0]);
        if (e.patient_id.empty()) {
            fail(Errc::parse_error, "patient_id must be non-empty", line_no);
        }
        e.frame_index = parse_i64(fields[1], line_no, "frame_index");
        e.organ = parse_organ(fields[2], line_no);
        e.pathology_tag = std::string(fields[3]);

        std::string key = e.patient_id;
        key.push_back('\x1f');
        key += std::to_string(e.frame_index);
        if (!seen.insert(std::move(key)).second) {
            fail(Errc::duplicate_frame_index,
                 "duplicate (patient_id, frame_index) pair", line_no);
        }
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

// ---- distribution reports --------------------------------------------------

void write_distribution_report(const std::filesystem::path& path,
                               std::span<const DistributionRow> rows) {
    std::string out(kDistributionHeader);
    out.push_back('\n');
    for (const DistributionRow& row : rows) {
        out += row.subset;
        for (std::int64_t c : row.organ_counts) {
            out.push_back(',');
            out += std::to_string(c);
        }
        out.push_back(',');
        out += std::to_string(row.negatives);
        out.push_back(',');
        out += std::to_string(row.positives);
        out.push_back(',');
        out += std::to_string(row.total);
        out.push_back('\n');
    }
    write_text_file(path, out);
}

// ---- metrics ---------------------------------------------------------------

std::string metrics_table_string(const MetricsSummary& metrics) {
    std::string out(kMetricsHeader);
    out.push_back('\n');
    out += format_double(metrics.accuracy);
    out.push_back(',');
    out += format_double(metrics.f1);
    out.push_back(',');
    out += format_double(metrics.precision);
    out.push_back(',');
    out += format_double(metrics.recall);
    out.push_back('\n');
    return out;
}

std::string metrics_record_string(const MetricsSummary& metrics) {
    std::string out;
    out += "accuracy = " + format_double(metrics.accuracy) + "\n";
    out += "f1 = " + format_double(metrics.f1) + "\n";
    out += "precision = " + format_double(metrics.precision) + "\n";
    out += "recall = " + format_double(metrics.recall) + "\n";
    out += "flagged_classes = ";
    if (metrics.flagged_classes.empty()) {
        out += "none";
    } else {
        for (std::size_t i = 0; i < metrics.flagged_classes.size(); ++i) {
            if (i > 0) out.push_back(',');
            out += std::to_string(metrics.flagged_classes[i]);
        }
    }
    out.push_back('\n');
    return out;
}

void write_metrics_table(const std::filesystem::path& path, const MetricsSummary& metrics) {
    write_text_file(path, metrics_table_string(metrics));
}

void write_metrics_record(const std::filesystem::path& path, const MetricsSummary& metrics) {
    write_text_file(path, metrics_record_string(metrics));
}

// ---- run configuration -----------------------------------------------------

void RunConfig::validate() const {
    if (patients < 1) fail(Errc::invalid_argument, "patients must be >= 1");
    for (double d : dwell_frames) {
        if (!std::isfinite(d) || d < 1.0) {
            fail(Errc::dwell_too_small, "dwell_frames entries must be >= 1");
        }
    }
    double pi_sum = 0.0;
    for (double p : initial_distribution) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            fail(Errc::invariant_violation, "initial_distribution entries must lie in [0, 1]");
        }
        pi_sum += p;
    }
    if (std::abs(pi_sum - 1.0) > kModelRowSumTol) {
        fail(Errc::invariant_violation, "initial_distribution must sum to 1");
    }
    if (!std::isfinite(emission_diagonal) || emission_diagonal <= 0.0 ||
        emission_diagonal > 1.0) {
        fail(Errc::invalid_argument, "emission_diagonal must lie in (0, 1]");
    }
    for (double p : {anomaly_rate_in_si, anomaly_sensitivity, anomaly_false_positive}) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            fail(Errc::invalid_argument, "anomaly probabilities must lie in [0, 1]");
        }
    }
    if (frame_period_ms < 1) fail(Errc::invalid_argument, "frame_period_ms must be >= 1");
    if (!(entry_threshold > 0.5) || !(entry_threshold <= 1.0)) {
        fail(Errc::invalid_argument, "entry_threshold must lie in (0.5, 1]");
    }
    if (entry_hysteresis < 1) fail(Errc::invalid_argument, "entry_hysteresis must be >= 1");
    for (double v : {cost_capture, cost_transmit, battery_budget}) {
        if (!std::isfinite(v) || v <= 0.0) {
            fail(Errc::invalid_argument, "energy values must be positive");
        }
    }
}

namespace {

std::array<double, kNumOrgans> parse_five_doubles(std::string_view value, const char* what) {
    const auto fields = split_csv(value);
    if (fields.size() != static_cast<std::size_t>(kNumOrgans)) {
        fail(Errc::parse_error,
             std::string(what) + " needs 5 comma-separated values, got " +
                 std::to_string(fields.size()));
    }
    std::array<double, kNumOrgans> out{};
    for (int i = 0; i < kNumOrgans; ++i) {
        out[i] = parse_double(trim(fields[i]), -1, what);
    }
    return out;
}

std::string five_doubles_string(const std::array<double, kNumOrgans>& values) {
    std::string out;
    for (int i = 0; i < kNumOrgans; ++i) {
        if (i > 0) out.push_back(',');
        out += format_double(values[i]);
    }
    return out;
}

}  // namespace

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
    if (key == "seed") {
        config.seed = parse_u64(value, -1, "seed");
    } else if (key == "patients") {
        config.patients = parse_i64(value, -1, "patients");
    } else if (key == "dwell_frames") {
        config.dwell_frames = parse_five_doubles(value, "dwell_frames");
    } else if (key == "dwell_model") {
        if (value == "geometric") {
            config.dwell_model = DwellModel::geometric;
        } else if (value == "fixed") {
            config.dwell_model = DwellModel::fixed;
        } else {
            fail(Errc::parse_error, "dwell_model must be 'geometric' or 'fixed'");
        }
    } else if (key == "initial_distribution") {
        config.initial_distribution = parse_five_doubles(value, "initial_distribution");
    } else if (key == "emission_diagonal") {
        config.emission_diagonal = parse_double(value, -1, "emission_diagonal");
    } else if (key == "confusion_path") {
        config.confusion_path = value == "none" ? std::string() : std::string(value);
    } else if (key == "anomaly_rate_in_si") {
        config.anomaly_rate_in_si = parse_double(value, -1, "anomaly_rate_in_si");
    } else if (key == "anomaly_sensitivity") {
        config.anomaly_sensitivity = parse_double(value, -1, "anomaly_sensitivity");
    } else if (key == "anomaly_false_positive") {
        config.anomaly_false_positive = parse_double(value, -1, "anomaly_false_positive");
    } else if (key == "frame_period_ms") {
        config.frame_period_ms = parse_i64(value, -1, "frame_period_ms");
    } else if (key == "entry_threshold") {
        config.entry_threshold = parse_double(value, -1, "entry_threshold");
    } else if (key == "entry_hysteresis") {
        config.entry_hysteresis = parse_i64(value, -1, "entry_hysteresis");
    } else if (key == "cost_capture") {
        config.cost_capture = parse_double(value, -1, "cost_capture");
    } else if (key == "cost_transmit") {
        config.cost_transmit = parse_double(value, -1, "cost_transmit");
    } else if (key == "battery_budget") {
        config.battery_budget = parse_double(value, -1, "battery_budget");
    } else {
        fail(Errc::parse_error, "unknown configuration key '" + std::string(key) + "'");
    }
}

std::string run_config_string(const RunConfig& config) {
    std::string out;
    out += "seed = " + std::to_string(config.seed) + "\n";
    out += "patients = " + std::to_string(config.patients) + "\n";
    out += "dwell_frames = " + five_doubles_string(config.dwell_frames) + "\n";
    out += std::string("dwell_model = ") +
           (config.dwell_model == DwellModel::geometric ? "geometric" : "fixed") + "\n";
    out += "initial_distribution = " + five_doubles_string(config.initial_distribution) + "\n";
    out += "emission_diagonal = " + format_double(config.emission_diagonal) + "\n";
    out += "confusion_path = " +
           (config.confusion_path.empty() ? std::string("none") : config.confusion_path) + "\n";
    out += "anomaly_rate_in_si = " + format_double(config.anomaly_rate_in_si) + "\n";
    out += "anomaly_sensitivity = " + format_double(config.anomaly_sensitivity) + "\n";
    out += "anomaly_false_positive = " + format_double(config.anomaly_false_positive) + "\n";
    out += "frame_period_ms = " + std::to_string(config.frame_period_ms) + "\n";
    out += "entry_threshold = " + format_double(config.entry_threshold) + "\n";
    out += "entry_hysteresis = " + std::to_string(config.entry_hysteresis) + "\n";
    out += "cost_capture = " + format_double(config.cost_capture) + "\n";
    out += "cost_transmit = " + format_double(config.cost_transmit) + "\n";
    out += "battery_budget = " + format_double(config.battery_budget) + "\n";
    return out;
}

void write_run_config(const std::filesystem::path& path, const RunConfig& config) {
    write_text_file(path, run_config_string(config));
}

RunConfig read_run_config(const std::filesystem::path& path) {
    RunConfig config;
    read_kv_file(path, [&](std::string_view key, std::string_view value, std::int64_t line_no) {
        try {
            set_config_value(config, key, value);
        } catch (const Error& e) {
            fail(e.code(), e.message(), line_no);
        }
    });
    config.validate();
    return config;
}

}  // namespace vce

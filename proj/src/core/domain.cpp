#include "domain.hpp"

#include <cmath>
#include <string>

namespace vce {

namespace {
constexpr const char* kOrganNames[kNumOrgans] = {
    "mouth", "esophagus", "stomach", "small_intestine", "colon",
};
}

const char* organ_name(Organ organ) {
    return kOrganNames[static_cast<int>(organ)];
}

std::optional<Organ> organ_from_name(std::string_view name) {
    for (int i = 0; i < kNumOrgans; ++i) {
        if (name == kOrganNames[i]) return static_cast<Organ>(i);
    }
    return std::nullopt;
}

Organ organ_from_index(int index) {
    if (index < 0 || index >= kNumOrgans) {
        fail(Errc::index_out_of_range,
             "organ index " + std::to_string(index) + " outside [0, 4]");
    }
    return static_cast<Organ>(index);
}

void PosteriorFrame::validate() const {
    if (frame_index < 0) fail(Errc::invariant_violation, "frame_index must be non-negative");
    if (timestamp_ms < 0) fail(Errc::invariant_violation, "timestamp_ms must be non-negative");
    double sum = 0.0;
    for (double p : organ_posterior) {
        if (!std::isfinite(p) || p < 0.0) {
            fail(Errc::invariant_violation, "organ posterior entries must be finite and >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kPosteriorSumTol) {
        fail(Errc::invariant_violation,
             "organ posterior sums to " + std::to_string(sum) + ", expected 1");
    }
    if (!std::isfinite(anomaly_posterior) || anomaly_posterior < 0.0 || anomaly_posterior > 1.0) {
        fail(Errc::invariant_violation, "anomaly posterior must lie in [0, 1]");
    }
}

Organ PosteriorFrame::argmax_organ() const {
    int best = 0;
    for (int i = 1; i < kNumOrgans; ++i) {
        if (organ_posterior[i] > organ_posterior[best]) best = i;
    }
    return static_cast<Organ>(best);
}

ProbabilityMatrix ProbabilityMatrix::row_stochastic(int rows, int cols,
                                                    std::vector<double> values, double tol) {
    if (rows <= 0 || cols <= 0) fail(Errc::shape_error, "matrix dimensions must be positive");
    if (values.size() != static_cast<std::size_t>(rows) * cols) {
        fail(Errc::shape_error, "value count does not match rows*cols");
    }
    for (int r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) {
            const double v = values[static_cast<std::size_t>(r) * cols + c];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                fail(Errc::invariant_violation,
                     "matrix entry (" + std::to_string(r) + "," + std::to_string(c) +
                         ") outside [0, 1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) {
            fail(Errc::invariant_violation,
                 "row " + std::to_string(r) + " sums to " + std::to_string(sum));
        }
    }
    return ProbabilityMatrix(rows, cols, std::move(values));
}

const std::vector<LabelFrame>& validate_label_sequence(const std::vector<LabelFrame>& frames) {
    if (frames.empty()) fail(Errc::invalid_argument, "label sequence must be non-empty");
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].frame_index <= frames[i - 1].frame_index) {
            fail(Errc::duplicate_frame_index,
                 "frame indices must strictly increase at position " + std::to_string(i));
        }
        if (static_cast<int>(frames[i].organ) < static_cast<int>(frames[i - 1].organ)) {
            fail(Errc::monotonicity_violation,
                 "organ index decreases at position " + std::to_string(i));
        }
    }
    return frames;
}

void validate_posterior_sequence(std::span<const PosteriorFrame> frames) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].validate();
        if (i > 0 && frames[i].frame_index <= frames[i - 1].frame_index) {
            fail(Errc::duplicate_frame_index,
                 "frame indices must strictly increase at position " + std::to_string(i));
        }
    }
}

}  // namespace vce

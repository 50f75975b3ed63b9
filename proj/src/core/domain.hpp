#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace vce {

inline constexpr int kNumOrgans = 5;

// The five gastrointestinal sections in anatomical traversal order. The
// ordering is load-bearing: the transition structure and all monotonicity
// checks compare these indices.
enum class Organ : int {
    Mouth = 0,
    Esophagus = 1,
    Stomach = 2,
    SmallIntestine = 3,
    Colon = 4,
};

const char* organ_name(Organ organ);
std::optional<Organ> organ_from_name(std::string_view name);
Organ organ_from_index(int index);  // throws IndexOutOfRange

// Row-sum tolerances: model matrices are built in double precision, ingested
// posteriors come from external producers that may have rounded.
inline constexpr double kModelRowSumTol = 1e-9;
inline constexpr double kPosteriorSumTol = 1e-6;

// One time step of classifier output.
struct PosteriorFrame {
    std::int64_t frame_index = 0;
    std::int64_t timestamp_ms = 0;
    std::array<double, kNumOrgans> organ_posterior{};
    double anomaly_posterior = 0.0;

    void validate() const;

    // Argmax organ; ties resolve to the lowest index.
    Organ argmax_organ() const;
};

struct LabelFrame {
    std::int64_t frame_index = 0;
    Organ organ = Organ::Mouth;
    bool anomaly = false;
};

// Row-stochastic matrix, row-major.
class ProbabilityMatrix {
public:
    ProbabilityMatrix() = default;

    // Validates entries in [0,1] and row sums within `tol` of 1.
    static ProbabilityMatrix row_stochastic(int rows, int cols, std::vector<double> values,
                                            double tol = kModelRowSumTol);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double at(int r, int c) const { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
    std::span<const double> row(int r) const {
        return {values_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
    }
    std::span<const double> values() const { return values_; }

private:
    ProbabilityMatrix(int rows, int cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {}

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> values_;
};

// Checks anatomical ordering: organ indices non-decreasing, frame indices
// strictly increasing. Returns its argument so call sites can validate inline.
const std::vector<LabelFrame>& validate_label_sequence(const std::vector<LabelFrame>& frames);

// Frame-index monotonicity plus per-frame invariants for a posterior stream.
void validate_posterior_sequence(std::span<const PosteriorFrame> frames);

}  // namespace vce

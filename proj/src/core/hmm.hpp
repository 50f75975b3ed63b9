#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "domain.hpp"

namespace vce {

using ConfusionCounts5 = std::array<std::array<std::int64_t, kNumOrgans>, kNumOrgans>;

// The GI traversal model: initial distribution, banded left-to-right
// transitions (self-loop or advance-by-one, colon terminal) and per-organ
// emission rows over the same five-symbol alphabet.
struct GiHmm {
    std::array<double, kNumOrgans> pi{};
    ProbabilityMatrix trans;
    ProbabilityMatrix emit;

    // Validates the banded structure and stochasticity.
    static GiHmm create(const std::array<double, kNumOrgans>& pi, ProbabilityMatrix trans,
                        ProbabilityMatrix emit);
};

inline constexpr std::array<double, kNumOrgans> kDefaultInitialDistribution = {1, 0, 0, 0, 0};

// Row-normalizes a confusion count matrix into emission probabilities,
// b_j(k) = counts[j][k] / sum_k counts[j][k]. `smoothing` is an optional
// additive constant applied to every cell before normalization; with the
// default 0 a row without samples is an error rather than silently smoothed.
ProbabilityMatrix estimate_emissions(const ConfusionCounts5& confusion, double smoothing = 0.0);

// Geometric-dwell transitions: a_ii = 1 - 1/d_i and a_i,i+1 = 1/d_i for the
// first four organs, colon absorbing. Dwell means are in frames and must be
// >= 1.
ProbabilityMatrix build_transitions(const std::array<double, kNumOrgans>& mean_dwell_frames);

// Diagonal-dominant emission matrix with the remaining mass split evenly,
// used as the synthetic stand-in for a trained classifier's confusion rows.
ProbabilityMatrix make_diagonal_emissions(double diagonal);

struct DecodedPath {
    std::vector<Organ> states;  // empty when infeasible
    double log_prob = 0.0;      // natural log of the joint; -inf when infeasible

    bool feasible() const;
};

// Generic log-space Viterbi over an arbitrary state count; used directly by
// tests with reduced models and by the 5-state wrappers below.
struct GenericDecoded {
    std::vector<int> states;
    double log_prob = 0.0;

    bool feasible() const;
};

GenericDecoded viterbi_decode(std::span<const double> pi, const ProbabilityMatrix& trans,
                              const ProbabilityMatrix& emit, std::span<const int> observations);

// Exact maximum-probability state sequence for the observed symbols. Ties
// break toward the lower organ index, which can only delay the downstream
// transmission gate, never fire it early. Infeasible input yields an empty
// path with log_prob = -inf.
DecodedPath viterbi(const GiHmm& model, std::span<const Organ> observations);

// Argmax-converts each frame to its observation symbol and decodes.
DecodedPath viterbi_from_posteriors(const GiHmm& model, std::span<const PosteriorFrame> frames);

// Online belief over the current organ. The belief starts at pi one step
// before the first frame; every update applies the transition and then
// conditions on the observed symbol.
struct FilterState {
    std::array<double, kNumOrgans> belief{};
    std::int64_t frames_seen = 0;
    // Set when the last observation had zero likelihood under the predicted
    // belief; the belief was reset to the prediction alone.
    bool last_update_degenerate = false;
};

FilterState make_filter(const GiHmm& model);
FilterState forward_update(const FilterState& state, const GiHmm& model, Organ observation);

// P(current organ is the small intestine or beyond).
double entry_mass(const FilterState& state);

// Streaming small-intestine entry detector: fires at the frame where the
// entry mass has been >= threshold for `hysteresis` consecutive frames.
class EntryDetector {
public:
    EntryDetector(double threshold, std::int64_t hysteresis);

    std::optional<std::int64_t> push(const FilterState& state, std::int64_t frame_index);

    double threshold() const { return threshold_; }
    std::int64_t hysteresis() const { return hysteresis_; }

private:
    double threshold_;
    std::int64_t hysteresis_;
    std::int64_t run_ = 0;
};

// Batch form over a belief trajectory; positions double as frame indices.
std::optional<std::int64_t> detect_entry(std::span<const FilterState> beliefs, double threshold,
                                         std::int64_t hysteresis);

}  // namespace vce

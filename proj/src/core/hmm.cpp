#include "hmm.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vce {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

GiHmm GiHmm::create(const std::array<double, kNumOrgans>& pi, ProbabilityMatrix trans,
                    ProbabilityMatrix emit) {
    double pi_sum = 0.0;
    for (double p : pi) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            fail(Errc::invariant_violation, "initial distribution entries must lie in [0, 1]");
        }
        pi_sum += p;
    }
    if (std::abs(pi_sum - 1.0) > kModelRowSumTol) {
        fail(Errc::invariant_violation, "initial distribution must sum to 1");
    }
    if (trans.rows() != kNumOrgans || trans.cols() != kNumOrgans) {
        fail(Errc::shape_error, "transition matrix must be 5x5");
    }
    if (emit.rows() != kNumOrgans || emit.cols() != kNumOrgans) {
        fail(Errc::shape_error, "emission matrix must be 5x5");
    }
    for (int i = 0; i < kNumOrgans; ++i) {
        for (int j = 0; j < kNumOrgans; ++j) {
            if (j != i && j != i + 1 && trans.at(i, j) != 0.0) {
                fail(Errc::invariant_violation,
                     "transition (" + std::to_string(i) + "," + std::to_string(j) +
                         ") must be zero: only self-loops and advance-by-one are allowed");
            }
        }
    }
    if (std::abs(trans.at(kNumOrgans - 1, kNumOrgans - 1) - 1.0) > kModelRowSumTol) {
        fail(Errc::invariant_violation, "colon must be terminal (a_44 = 1)");
    }
    GiHmm model;
    model.pi = pi;
    model.trans = std::move(trans);
    model.emit = std::move(emit);
    return model;
}

ProbabilityMatrix estimate_emissions(const ConfusionCounts5& confusion, double smoothing) {
    if (!(smoothing >= 0.0)) fail(Errc::invalid_argument, "smoothing must be >= 0");
    std::vector<double> values(kNumOrgans * kNumOrgans);
    for (int j = 0; j < kNumOrgans; ++j) {
        double row_sum = 0.0;
        for (int k = 0; k < kNumOrgans; ++k) {
            if (confusion[j][k] < 0) {
                fail(Errc::negative_count, "confusion counts must be non-negative");
            }
            row_sum += static_cast<double>(confusion[j][k]) + smoothing;
        }
        if (row_sum <= 0.0) {
            fail(Errc::empty_row,
                 "true class " + std::to_string(j) + " has no samples; cannot normalize");
        }
        for (int k = 0; k < kNumOrgans; ++k) {
            values[static_cast<std::size_t>(j) * kNumOrgans + k] =
                (static_cast<double>(confusion[j][k]) + smoothing) / row_sum;
        }
    }
    return ProbabilityMatrix::row_stochastic(kNumOrgans, kNumOrgans, std::move(values));
}

ProbabilityMatrix build_transitions(const std::array<double, kNumOrgans>& mean_dwell_frames) {
    for (double d : mean_dwell_frames) {
        if (!(d >= 1.0)) {
            fail(Errc::dwell_too_small, "mean dwell " + std::to_string(d) + " below 1 frame");
        }
    }
    std::vector<double> values(kNumOrgans * kNumOrgans, 0.0);
    for (int i = 0; i + 1 < kNumOrgans; ++i) {
        const double advance = 1.0 / mean_dwell_frames[i];
        values[static_cast<std::size_t>(i) * kNumOrgans + i] = 1.0 - advance;
        values[static_cast<std::size_t>(i) * kNumOrgans + i + 1] = advance;
    }
    values[static_cast<std::size_t>(kNumOrgans - 1) * kNumOrgans + kNumOrgans - 1] = 1.0;
    return ProbabilityMatrix::row_stochastic(kNumOrgans, kNumOrgans, std::move(values));
}

ProbabilityMatrix make_diagonal_emissions(double diagonal) {
    if (!(diagonal > 0.0) || !(diagonal <= 1.0)) {
        fail(Errc::invalid_argument, "emission diagonal must lie in (0, 1]");
    }
    const double off = (1.0 - diagonal) / (kNumOrgans - 1);
    std::vector<double> values(kNumOrgans * kNumOrgans, off);
    for (int i = 0; i < kNumOrgans; ++i) {
        values[static_cast<std::size_t>(i) * kNumOrgans + i] = diagonal;
    }
    return ProbabilityMatrix::row_stochastic(kNumOrgans, kNumOrgans, std::move(values));
}

bool DecodedPath::feasible() const { return std::isfinite(log_prob); }
bool GenericDecoded::feasible() const { return std::isfinite(log_prob); }

GenericDecoded viterbi_decode(std::span<const double> pi, const ProbabilityMatrix& trans,
                              const ProbabilityMatrix& emit, std::span<const int> observations) {
    const int num_states = trans.rows();
    if (num_states <= 0 || trans.cols() != num_states) {
        fail(Errc::shape_error, "transition matrix must be square");
    }
    if (static_cast<int>(pi.size()) != num_states || emit.rows() != num_states) {
        fail(Errc::shape_error, "initial distribution and emissions must match the state count");
    }
    if (observations.empty()) {
        fail(Errc::invalid_argument, "observation sequence must be non-empty");
    }
    const int num_symbols = emit.cols();
    for (int obs : observations) {
        if (obs < 0 || obs >= num_symbols) {
            fail(Errc::index_out_of_range, "observation symbol " + std::to_string(obs));
        }
    }

    const std::size_t len = observations.size();
    std::vector<double> log_trans(static_cast<std::size_t>(num_states) * num_states);
    for (int i = 0; i < num_states; ++i) {
        for (int j = 0; j < num_states; ++j) {
            log_trans[static_cast<std::size_t>(i) * num_states + j] = std::log(trans.at(i, j));
        }
    }

    // delta[t][j]: best log joint over paths ending in j; back[t][j]: the
    // lowest predecessor index attaining it.
    std::vector<double> delta(len * num_states, kNegInf);
    std::vector<int> back(len * num_states, 0);

    for (int j = 0; j < num_states; ++j) {
        delta[j] = std::log(pi[j]) + std::log(emit.at(j, observations[0]));
    }
    for (std::size_t t = 1; t < len; ++t) {
        for (int j = 0; j < num_states; ++j) {
            double best = kNegInf;
            int best_prev = 0;
            for (int i = 0; i < num_states; ++i) {
                const double score =
                    delta[(t - 1) * num_states + i] + log_trans[static_cast<std::size_t>(i) * num_states + j];
                if (score > best) {
                    best = score;
                    best_prev = i;
                }
            }
            delta[t * num_states + j] = best + std::log(emit.at(j, observations[t]));
            back[t * num_states + j] = best_prev;
        }
    }

    double best = kNegInf;
    int last = 0;
    for (int j = 0; j < num_states; ++j) {
        if (delta[(len - 1) * num_states + j] > best) {
            best = delta[(len - 1) * num_states + j];
            last = j;
        }
    }

    GenericDecoded result;
    result.log_prob = best;
    if (!std::isfinite(best)) return result;  // infeasible: all paths have probability zero

    result.states.resize(len);
    result.states[len - 1] = last;
    for (std::size_t t = len - 1; t > 0; --t) {
        result.states[t - 1] = back[t * num_states + result.states[t]];
    }
    return result;
}

DecodedPath viterbi(const GiHmm& model, std::span<const Organ> observations) {
    std::vector<int> symbols(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i) {
        symbols[i] = static_cast<int>(observations[i]);
    }
    const GenericDecoded generic = viterbi_decode(model.pi, model.trans, model.emit, symbols);
    DecodedPath path;
    path.log_prob = generic.log_prob;
    path.states.reserve(generic.states.size());
    for (int s : generic.states) path.states.push_back(static_cast<Organ>(s));
    return path;
}

DecodedPath viterbi_from_posteriors(const GiHmm& model, std::span<const PosteriorFrame> frames) {
    validate_posterior_sequence(frames);
    std::vector<Organ> symbols(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        symbols[i] = frames[i].argmax_organ();
    }
    return viterbi(model, symbols);
}

FilterState make_filter(const GiHmm& model) {
    FilterState state;
    state.belief = model.pi;
    return state;
}

FilterState forward_update(const FilterState& state, const GiHmm& model, Organ observation) {
    const int obs = static_cast<int>(observation);
    std::array<double, kNumOrgans> predicted{};
    for (int j = 0; j < kNumOrgans; ++j) {
        double acc = 0.0;
        for (int i = 0; i < kNumOrgans; ++i) {
            acc += model.trans.at(i, j) * state.belief[i];
        }
        predicted[j] = acc;
    }

    FilterState next;
    next.frames_seen = state.frames_seen + 1;
    double total = 0.0;
    for (int j = 0; j < kNumOrgans; ++j) {
        next.belief[j] = predicted[j] * model.emit.at(j, obs);
        total += next.belief[j];
    }
    if (total <= 0.0) {
        // Observation impossible under the predicted belief; fall back to the
        // prediction alone and flag the step.
        double pred_total = 0.0;
        for (double p : predicted) pred_total += p;
        for (int j = 0; j < kNumOrgans; ++j) next.belief[j] = predicted[j] / pred_total;
        next.last_update_degenerate = true;
        return next;
    }
    for (double& b : next.belief) b /= total;
    return next;
}

double entry_mass(const FilterState& state) {
    return state.belief[static_cast<int>(Organ::SmallIntestine)] +
           state.belief[static_cast<int>(Organ::Colon)];
}

EntryDetector::EntryDetector(double threshold, std::int64_t hysteresis)
    : threshold_(threshold), hysteresis_(hysteresis) {
    if (!(threshold > 0.5) || !(threshold <= 1.0)) {
        fail(Errc::invalid_argument, "entry threshold must lie in (0.5, 1]");
    }
    if (hysteresis < 1) fail(Errc::invalid_argument, "hysteresis must be >= 1 frame");
}

std::optional<std::int64_t> EntryDetector::push(const FilterState& state,
                                                std::int64_t frame_index) {
    if (entry_mass(state) >= threshold_) {
        if (++run_ >= hysteresis_) return frame_index;
    } else {
        run_ = 0;
    }
    return std::nullopt;
}

std::optional<std::int64_t> detect_entry(std::span<const FilterState> beliefs, double threshold,
                                         std::int64_t hysteresis) {
    EntryDetector detector(threshold, hysteresis);
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        if (auto hit = detector.push(beliefs[i], static_cast<std::int64_t>(i))) return hit;
    }
    return std::nullopt;
}

}  // namespace vce

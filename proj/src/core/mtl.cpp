#include "mtl.hpp"

#include <cmath>

namespace vce {
namespace {

void require_finite_loss(double loss, const char* what) {
    if (!std::isfinite(loss)) {
        fail(Errc::non_finite_input, std::string(what) + " is not finite");
    }
}

}  // namespace

UwResult uw_loss(const std::array<double, kNumTasks>& losses, const UwParams& params) {
    UwResult out;
    for (int i = 0; i < kNumTasks; ++i) {
        require_finite_loss(losses[i], "task loss");
        require_finite_loss(params.log_sigma[i], "log sigma");
        if (losses[i] <= 0.0) {
            fail(Errc::non_positive_loss, "task losses must be positive, got " +
                                              std::to_string(losses[i]) + " for task " +
                                              std::to_string(i + 1));
        }
        const double precision = std::exp(-params.log_sigma[i]);
        out.value += precision * losses[i] + params.log_sigma[i];
        out.grad_log_sigma[i] = -precision * losses[i] + 1.0;
        out.grad_losses[i] = precision;
    }
    return out;
}

void LossTrace::validate() const {
    if (task1.size() != task2.size()) {
        fail(Errc::length_mismatch, "loss trace tasks have different lengths: " +
                                        std::to_string(task1.size()) + " vs " +
                                        std::to_string(task2.size()));
    }
    for (std::size_t i = 0; i < task1.size(); ++i) {
        require_finite_loss(task1[i], "trace loss");
        require_finite_loss(task2[i], "trace loss");
        if (task1[i] <= 0.0 || task2[i] <= 0.0) {
            fail(Errc::non_positive_loss,
                 "trace losses must be positive at epoch " + std::to_string(i + 1));
        }
    }
}

std::array<double, kNumTasks> dwa_weights(const LossTrace& trace, const DwaConfig& config,
                                          std::int64_t epoch) {
    if (config.num_tasks != kNumTasks) {
        fail(Errc::invalid_argument,
             "dwa supports exactly " + std::to_string(kNumTasks) + " tasks");
    }
    if (!(config.temperature > 0.0) || !std::isfinite(config.temperature)) {
        fail(Errc::invalid_argument, "dwa temperature must be positive and finite");
    }
    if (epoch < 1) {
        fail(Errc::invalid_argument, "epoch numbering starts at 1");
    }
    trace.validate();
    if (epoch < 3) {
        return {1.0, 1.0};
    }
    // Ratios need losses from epochs t-1 and t-2.
    if (trace.epochs() < epoch - 1) {
        fail(Errc::length_mismatch, "loss trace has " + std::to_string(trace.epochs()) +
                                        " epochs, need " + std::to_string(epoch - 1) +
                                        " for epoch " + std::to_string(epoch));
    }
    const double w1 = trace.task1[static_cast<std::size_t>(epoch - 2)] /
                      trace.task1[static_cast<std::size_t>(epoch - 3)];
    const double w2 = trace.task2[static_cast<std::size_t>(epoch - 2)] /
                      trace.task2[static_cast<std::size_t>(epoch - 3)];
    // Subtract the max exponent so extreme ratios cannot overflow.
    const double m = std::max(w1 / config.temperature, w2 / config.temperature);
    const double e1 = std::exp(w1 / config.temperature - m);
    const double e2 = std::exp(w2 / config.temperature - m);
    const double denom = e1 + e2;
    return {kNumTasks * e1 / denom, kNumTasks * e2 / denom};
}

namespace {

void check_distribution(std::span<const double> probabilities, std::size_t true_class) {
    if (probabilities.empty()) {
        fail(Errc::invalid_argument, "probability vector is empty");
    }
    if (true_class >= probabilities.size()) {
        fail(Errc::index_out_of_range,
             "true class " + std::to_string(true_class) + " out of range for " +
                 std::to_string(probabilities.size()) + " classes");
    }
    for (double p : probabilities) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            fail(Errc::invalid_argument, "probabilities must lie in [0, 1]");
        }
    }
}

}  // namespace

FocalResult focal_loss(std::span<const double> probabilities, std::size_t true_class,
                       const FocalParams& params) {
    check_distribution(probabilities, true_class);
    if (!std::isfinite(params.gamma) || params.gamma < 0.0) {
        fail(Errc::invalid_argument, "gamma must be non-negative and finite");
    }
    double alpha_t = 1.0;
    if (!params.alpha.empty()) {
        if (params.alpha.size() != probabilities.size()) {
            fail(Errc::length_mismatch, "alpha has " + std::to_string(params.alpha.size()) +
                                            " entries for " +
                                            std::to_string(probabilities.size()) + " classes");
        }
        for (double a : params.alpha) {
            if (!std::isfinite(a) || a < 0.0) {
                fail(Errc::invalid_argument, "alpha weights must be non-negative");
            }
        }
        alpha_t = params.alpha[true_class];
    }

    FocalResult out;
    const double p_raw = probabilities[true_class];
    double p = p_raw;
    if (p < kLogFloor) {
        p = kLogFloor;
        out.clamped = true;
    }
    const double modulator = std::pow(1.0 - p_raw, params.gamma);
    out.value = -alpha_t * modulator * std::log(p);
    out.grad_probabilities.assign(probabilities.size(), 0.0);
    // d/dp [-a (1-p)^g log p] = a*g*(1-p)^(g-1)*log p - a*(1-p)^g/p.
    double grad = -alpha_t * modulator / p;
    if (params.gamma > 0.0 && p_raw < 1.0) {
        grad += alpha_t * params.gamma * std::pow(1.0 - p_raw, params.gamma - 1.0) * std::log(p);
    }
    out.grad_probabilities[true_class] = grad;
    return out;
}

CrossEntropyResult cross_entropy(std::span<const double> probabilities, std::size_t true_class) {
    check_distribution(probabilities, true_class);
    CrossEntropyResult out;
    double p = probabilities[true_class];
    if (p < kLogFloor) {
        p = kLogFloor;
        out.clamped = true;
    }
    out.value = -std::log(p);
    return out;
}

double combine_mtl_loss(const std::array<double, kNumTasks>& task_losses, MtlMode mode,
                        const MtlState& state) {
    switch (mode) {
        case MtlMode::uw: {
            const auto* params = std::get_if<UwParams>(&state);
            if (params == nullptr) {
                fail(Errc::mode_state_mismatch, "uw mode requires uncertainty parameters");
            }
            return uw_loss(task_losses, *params).value;
        }
        case MtlMode::dwa:
        case MtlMode::dwa_focal: {
            const auto* dwa = std::get_if<DwaState>(&state);
            if (dwa == nullptr) {
                fail(Errc::mode_state_mismatch, "dwa modes require a loss trace state");
            }
            const auto lambda = dwa_weights(dwa->trace, dwa->config, dwa->epoch);
            double total = 0.0;
            for (int i = 0; i < kNumTasks; ++i) {
                require_finite_loss(task_losses[i], "task loss");
                total += lambda[static_cast<std::size_t>(i)] * task_losses[i];
            }
            return total;
        }
    }
    fail(Errc::invalid_argument, "unknown mtl mode");
}

}  // namespace vce

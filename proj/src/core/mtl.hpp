#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "error.hpp"

namespace vce {

inline constexpr int kNumTasks = 2;

// Probabilities are floored at this value before any log so saturation is
// deterministic and documented instead of producing infinities.
inline constexpr double kLogFloor = 1e-12;

// Homoscedastic uncertainty weighting parameters, one log sigma per task.
struct UwParams {
    std::array<double, kNumTasks> log_sigma{};
};

struct UwResult {
    double value = 0.0;
    std::array<double, kNumTasks> grad_log_sigma{};
    std::array<double, kNumTasks> grad_losses{};
};

// value = sum_i exp(-log sigma_i) * L_i + log sigma_i, with analytic
// gradients for verification against finite differences.
UwResult uw_loss(const std::array<double, kNumTasks>& losses, const UwParams& params);

struct DwaConfig {
    double temperature = 2.0;
    int num_tasks = kNumTasks;
};

// Per-task loss history; epoch e is stored at index e-1.
struct LossTrace {
    std::vector<double> task1;
    std::vector<double> task2;

    std::int64_t epochs() const { return static_cast<std::int64_t>(task1.size()); }
    void validate() const;
};

// Dynamic weight average for epoch t: lambda_i = I*exp(w_i/T)/sum_k exp(w_k/T)
// with w_i = L_i(t-1)/L_i(t-2). Epochs 1 and 2 have no ratio history and use
// uniform weights.
std::array<double, kNumTasks> dwa_weights(const LossTrace& trace, const DwaConfig& config,
                                          std::int64_t epoch);

struct FocalParams {
    double gamma = 0.0;
    std::vector<double> alpha;  // per-class weights; empty means all ones
};

struct FocalResult {
    double value = 0.0;
    std::vector<double> grad_probabilities;  // non-zero only at the true class
    bool clamped = false;                    // true when p_t hit the log floor
};

// FL(p_t) = -alpha_t * (1 - p_t)^gamma * log(p_t).
FocalResult focal_loss(std::span<const double> probabilities, std::size_t true_class,
                       const FocalParams& params);

struct CrossEntropyResult {
    double value = 0.0;
    bool clamped = false;
};

CrossEntropyResult cross_entropy(std::span<const double> probabilities, std::size_t true_class);

enum class MtlMode { uw, dwa, dwa_focal };

struct DwaState {
    LossTrace trace;
    DwaConfig config;
    std::int64_t epoch = 1;
};

using MtlState = std::variant<UwParams, DwaState>;

// Combined scalar loss for the requested weighting mode. dwa_focal differs
// from dwa only in how the second task's loss was produced upstream.
double combine_mtl_loss(const std::array<double, kNumTasks>& task_losses, MtlMode mode,
                        const MtlState& state);

}  // namespace vce

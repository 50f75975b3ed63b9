#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"

namespace vce {

enum class Averaging { macro, binary_positive };

// Square confusion matrix of raw counts; rows are true classes, columns are
// predicted classes.
class ConfusionCounts {
  public:
    explicit ConfusionCounts(std::size_t num_classes);
    static ConfusionCounts from_values(std::size_t num_classes,
                                       std::span<const std::int64_t> row_major);

    std::size_t num_classes() const { return num_classes_; }
    std::int64_t at(std::size_t true_class, std::size_t predicted) const;
    std::int64_t& at(std::size_t true_class, std::size_t predicted);
    std::int64_t total() const;
    std::span<const std::int64_t> values() const { return counts_; }

    void add(std::size_t true_class, std::size_t predicted, std::int64_t count = 1);
    void accumulate(std::span<const std::size_t> truth, std::span<const std::size_t> predicted);
    void merge(const ConfusionCounts& other);

  private:
    std::size_t num_classes_;
    std::vector<std::int64_t> counts_;
};

struct MetricsSummary {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Classes whose precision or recall had a zero denominator (macro mode:
    // any class; binary mode: the positive class). Their metrics contribute 0.
    std::vector<std::size_t> flagged_classes;
};

// Macro averaging treats every class equally; binary_positive reports the
// metrics of class 1 in a 2-class matrix.
MetricsSummary summarize(const ConfusionCounts& counts, Averaging averaging);

}  // namespace vce

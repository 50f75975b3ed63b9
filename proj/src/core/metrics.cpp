#include "metrics.hpp"

#include <algorithm>
#include <string>

namespace vce {

ConfusionCounts::ConfusionCounts(std::size_t num_classes)
    : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {
    if (num_classes == 0) {
        fail(Errc::invalid_argument, "confusion matrix needs at least one class");
    }
}

ConfusionCounts ConfusionCounts::from_values(std::size_t num_classes,
                                             std::span<const std::int64_t> row_major) {
    ConfusionCounts out(num_classes);
    if (row_major.size() != num_classes * num_classes) {
        fail(Errc::shape_error, "expected " + std::to_string(num_classes * num_classes) +
                                    " counts, got " + std::to_string(row_major.size()));
    }
    for (std::size_t i = 0; i < row_major.size(); ++i) {
        if (row_major[i] < 0) {
            fail(Errc::negative_count, "confusion counts must be non-negative");
        }
        out.counts_[i] = row_major[i];
    }
    return out;
}

std::int64_t ConfusionCounts::at(std::size_t true_class, std::size_t predicted) const {
    if (true_class >= num_classes_ || predicted >= num_classes_) {
        fail(Errc::index_out_of_range, "confusion index out of range");
    }
    return counts_[true_class * num_classes_ + predicted];
}

std::int64_t& ConfusionCounts::at(std::size_t true_class, std::size_t predicted) {
    if (true_class >= num_classes_ || predicted >= num_classes_) {
        fail(Errc::index_out_of_range, "confusion index out of range");
    }
    return counts_[true_class * num_classes_ + predicted];
}

std::int64_t ConfusionCounts::total() const {
    std::int64_t sum = 0;
    for (std::int64_t c : counts_) sum += c;
    return sum;
}

void ConfusionCounts::add(std::size_t true_class, std::size_t predicted, std::int64_t count) {
    if (count < 0) {
        fail(Errc::negative_count, "cannot add a negative count");
    }
    at(true_class, predicted) += count;
}

void ConfusionCounts::accumulate(std::span<const std::size_t> truth,
                                 std::span<const std::size_t> predicted) {
    if (truth.size() != predicted.size()) {
        fail(Errc::length_mismatch, "truth has " + std::to_string(truth.size()) +
                                        " entries, predictions " +
                                        std::to_string(predicted.size()));
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        add(truth[i], predicted[i]);
    }
}

void ConfusionCounts::merge(const ConfusionCounts& other) {
    if (other.num_classes_ != num_classes_) {
        fail(Errc::shape_error, "cannot merge confusion matrices of different sizes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
}

namespace {

struct ClassStats {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool flagged = false;
};

ClassStats class_stats(const ConfusionCounts& counts, std::size_t cls) {
    const std::size_t k = counts.num_classes();
    std::int64_t tp = counts.at(cls, cls);
    std::int64_t support = 0;    // row sum: actual members of cls
    std::int64_t predicted = 0;  // column sum: predictions of cls
    for (std::size_t j = 0; j < k; ++j) {
        support += counts.at(cls, j);
        predicted += counts.at(j, cls);
    }
    ClassStats out;
    if (predicted == 0) {
        out.flagged = true;
    } else {
        out.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    }
    if (support == 0) {
        out.flagged = true;
    } else {
        out.recall = static_cast<double>(tp) / static_cast<double>(support);
    }
    const double denom = out.precision + out.recall;
    if (denom > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / denom;
    }
    return out;
}

}  // namespace

MetricsSummary summarize(const ConfusionCounts& counts, Averaging averaging) {
    const std::size_t k = counts.num_classes();
    const std::int64_t total = counts.total();
    if (total == 0) {
        fail(Errc::empty_counts, "confusion matrix has no samples");
    }

    MetricsSummary out;
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < k; ++i) {
        correct += counts.at(i, i);
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(total);

    if (averaging == Averaging::binary_positive) {
        if (k != 2) {
            fail(Errc::shape_error,
                 "binary averaging needs a 2x2 matrix, got " + std::to_string(k) + "x" +
                     std::to_string(k));
        }
        const ClassStats s = class_stats(counts, 1);
        out.precision = s.precision;
        out.recall = s.recall;
        out.f1 = s.f1;
        if (s.flagged) {
            out.flagged_classes.push_back(1);
        }
        return out;
    }

    for (std::size_t cls = 0; cls < k; ++cls) {
        const ClassStats s = class_stats(counts, cls);
        out.precision += s.precision;
        out.recall += s.recall;
        out.f1 += s.f1;
        if (s.flagged) {
            out.flagged_classes.push_back(cls);
        }
    }
    out.precision /= static_cast<double>(k);
    out.recall /= static_cast<double>(k);
    out.f1 /= static_cast<double>(k);
    return out;
}

}  // namespace vce

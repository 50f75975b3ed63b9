#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vce {

// Fine-grained failure kinds. The C API collapses these to coarse status
// codes; tests assert on the exact kind.
enum class Errc {
    invalid_argument,
    non_finite_input,
    monotonicity_violation,
    duplicate_frame_index,
    empty_row,
    dwell_too_small,
    infeasible_sequence,
    non_positive_loss,
    mode_state_mismatch,
    length_mismatch,
    index_out_of_range,
    empty_counts,
    parse_error,
    invariant_violation,
    shape_error,
    negative_count,
    io_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::int64_t line = -1);

    Errc code() const { return code_; }

    // The message without the kind/line prefix what() carries; callers that
    // re-raise with extra context use this to avoid stacking prefixes.
    const std::string& message() const { return message_; }

    // 1-based file line for parse/invariant errors, -1 otherwise.
    std::int64_t line() const { return line_; }

private:
    Errc code_;
    std::string message_;
    std::int64_t line_;
};

[[noreturn]] void fail(Errc code, const std::string& message, std::int64_t line = -1);

}  // namespace vce

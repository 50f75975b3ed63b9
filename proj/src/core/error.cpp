#include "error.hpp"

namespace vce {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::non_finite_input: return "NonFiniteInput";
        case Errc::monotonicity_violation: return "MonotonicityViolation";
        case Errc::duplicate_frame_index: return "DuplicateFrameIndex";
        case Errc::empty_row: return "EmptyRow";
        case Errc::dwell_too_small: return "DwellTooSmall";
        case Errc::infeasible_sequence: return "InfeasibleSequence";
        case Errc::non_positive_loss: return "NonPositiveLoss";
        case Errc::mode_state_mismatch: return "ModeStateMismatch";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::index_out_of_range: return "IndexOutOfRange";
        case Errc::empty_counts: return "EmptyCounts";
        case Errc::parse_error: return "ParseError";
        case Errc::invariant_violation: return "InvariantViolation";
        case Errc::shape_error: return "ShapeError";
        case Errc::negative_count: return "NegativeCount";
        case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

namespace {
std::string compose(Errc code, const std::string& message, std::int64_t line) {
    std::string out = errc_name(code);
    if (line >= 0) {
        out += " (line ";
        out += std::to_string(line);
        out += ")";
    }
    out += ": ";
    out += message;
    return out;
}
}  // namespace

Error::Error(Errc code, const std::string& message, std::int64_t line)
    : std::runtime_error(compose(code, message, line)), code_(code), message_(message),
      line_(line) {}

void fail(Errc code, const std::string& message, std::int64_t line) {
    throw Error(code, message, line);
}

}  // namespace vce

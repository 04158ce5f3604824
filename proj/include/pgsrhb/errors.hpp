#pragma once

#include <stdexcept>

namespace pgsrhb {

// Bit patterns or values that cannot be encoded/decoded.
struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Guidance fitting failed (e.g. restriction too large to enumerate).
struct GuidanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An objective evaluation could not produce a loss.
struct ObjectiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trial log is unreadable, inconsistent, or was misused.
struct LogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration is malformed or self-contradictory.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough logged observations to fit guidance.
struct InsufficientHistoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pgsrhb

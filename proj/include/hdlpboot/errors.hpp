#pragma once

#include <stdexcept>
#include <string>

namespace hdlpboot {

// Base class for every error thrown by this library. The CLI maps
// ConfigError and AlphaGridError to exit code 2 and every other Error
// (and any std::exception escaping the numeric kernels) to exit code 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input shape or size problems.
struct DimensionError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct SampleSizeError : Error { using Error::Error; };

// Argument outside its mathematical domain.
struct DomainError : Error { using Error::Error; };

// Structurally degenerate inputs (zero matrix, zero-variance column).
struct DegenerateError : Error { using Error::Error; };
struct DegenerateColumnError : Error { using Error::Error; };

// Matrix fails a positive semidefiniteness requirement.
struct NotPsdError : Error { using Error::Error; };

// Iterative kernel failed to converge or produced non-finite values.
struct NumericalError : Error { using Error::Error; };

// Requested operator norm pair has no supported algorithm.
struct UnsupportedNorm : Error { using Error::Error; };

// Quantile index floor((1-alpha)*B) fell outside [1, B].
struct AlphaGridError : Error { using Error::Error; };

// Simulation configuration rejected before any work started.
struct ConfigError : Error { using Error::Error; };

}  // namespace hdlpboot

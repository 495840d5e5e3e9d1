#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regime {

/// Failure classes raised by the library. The CLI maps each class onto a
/// distinct process exit code.
enum class ErrorKind {
    Validation,        // bad parameters or configuration
    InsufficientData,  // too few observations for a regression window
    DegeneratePrices,  // regressor has no variance
    NonPositiveValue,  // price or spread <= 0
    EmptyResult,       // nothing could be produced
    UniverseTooSmall,  // fewer than 10 names to rank
    NoOverlap,         // signal and price dates never align
    TooFewNames,       // rank correlation needs at least 3 names
    Io,                // file could not be read or written
    Parse,             // malformed CSV/JSON content
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::Validation, what);
}

}  // namespace regime

#include "regime/errors.hpp"

namespace regime {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Validation: return "Validation";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DegeneratePrices: return "DegeneratePrices";
        case ErrorKind::NonPositiveValue: return "NonPositiveValue";
        case ErrorKind::EmptyResult: return "EmptyResult";
        case ErrorKind::UniverseTooSmall: return "UniverseTooSmall";
        case ErrorKind::NoOverlap: return "NoOverlap";
        case ErrorKind::TooFewNames: return "TooFewNames";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace regime

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace skewfatou {

enum class ErrorKind {
    Usage,
    SingularSystem,
    NotNormalized,
    NotSplit,
    PreconditionFailed,
    NotCriticallyFinite,
    Escaped,
    NoConvergence,
    PrecisionExhausted,
    OutOfDomain,
    NotResonant,
    DegenerateSamples,
    NoDegenerateForm,
    NotFound,
    InconsistentOrbit,
    Parse,
    Io,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Usage: return "Usage";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::NotSplit: return "NotSplit";
        case ErrorKind::PreconditionFailed: return "PreconditionFailed";
        case ErrorKind::NotCriticallyFinite: return "NotCriticallyFinite";
        case ErrorKind::Escaped: return "Escaped";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::NotResonant: return "NotResonant";
        case ErrorKind::DegenerateSamples: return "DegenerateSamples";
        case ErrorKind::NoDegenerateForm: return "NoDegenerateForm";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::InconsistentOrbit: return "InconsistentOrbit";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// An orbit left the bailout disk at step `index`.
class EscapedError : public Error {
public:
    EscapedError(std::size_t index, const std::string& message)
        : Error(ErrorKind::Escaped, message), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// A limit did not settle; `differences` holds the measured |phi_{n} - phi_{n-1}| sequence.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(std::vector<double> differences, const std::string& message)
        : Error(ErrorKind::NoConvergence, message), differences_(std::move(differences)) {}

    const std::vector<double>& differences() const noexcept { return differences_; }

private:
    std::vector<double> differences_;
};

}  // namespace skewfatou

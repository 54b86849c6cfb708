#pragma once

#include <stdexcept>
#include <string>

namespace brmdd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Eigensolver did not converge within its iteration cap.
struct EigensolverError : Error {
    using Error::Error;
};

/// A fit could not be carried out (too few bins, degenerate input, ...).
struct FitError : Error {
    using Error::Error;
};

/// A sweep cell violates the finite-size guard.
struct GuardError : Error {
    using Error::Error;
};

/// File or directory problem while persisting results.
struct IoError : Error {
    using Error::Error;
};

}  // namespace brmdd

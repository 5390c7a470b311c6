#pragma once

#include <stdexcept>

namespace padr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input or configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A mathematical precondition (H1-H4, C5-C7, Cond_1, Q-matrix) does not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// A run stopped: blow-up, non-convergence, escape from an invariant set.
class AbortError : public Error {
public:
    using Error::Error;
};

}  // namespace padr

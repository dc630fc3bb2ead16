#pragma once

#include <stdexcept>
#include <string>

namespace isokern {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or a call that violates a static precondition
// (bad core id, wrong partition, malformed scenario file, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Attempt to schedule or run backwards in virtual time.
struct CausalityError : Error {
    using Error::Error;
};

// Address-space id demand exceeded capacity even after a rollover.
struct ExhaustionError : Error {
    using Error::Error;
};

}  // namespace isokern

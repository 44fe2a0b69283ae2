#pragma once

#include <stdexcept>
#include <string>

namespace coexsim {

/// Base for all simulator errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was invoked outside its stated precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Event scheduled before the current clock.
class PastTimeError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Wi-Fi channel outside 0..11.
class BadChannelError : public Error {
public:
    using Error::Error;
};

/// Serial payload longer than the 8-byte register width.
class OversizeError : public Error {
public:
    using Error::Error;
};

/// Shared-RAM access while the window is not mapped.
class UnmappedError : public Error {
public:
    using Error::Error;
};

/// Shared-RAM access outside the window extent.
class OutOfWindowError : public Error {
public:
    using Error::Error;
};

/// A device started a transmission while one was already active.
class DuplicateSourceError : public Error {
public:
    using Error::Error;
};

/// Classifier input below the minimum sample count.
class TooFewSamplesError : public Error {
public:
    using Error::Error;
};

/// The attacking Bluetooth core crashed mid-scenario.
class AbortedByBtCrash : public Error {
public:
    using Error::Error;
};

/// Scenario configuration problem; carries the offending field path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace coexsim

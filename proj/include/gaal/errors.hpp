#pragma once

#include <stdexcept>
#include <string>

namespace gaal {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or vector extents that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition (empty batch, non-scalar loss, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration. `field()` names the offending key when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : Error(message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed on-disk data (IDX files, checkpoints, config files).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace gaal

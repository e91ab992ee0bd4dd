#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace barrier_mbrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a barrier map (at or past the
/// margin of a limit, or beyond the overflow guard in transformed space).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : Error(what), index_(index) {}

    /// Offending vector component, when the error came from a vector op.
    [[nodiscard]] std::optional<std::size_t> index() const noexcept { return index_; }

private:
    std::optional<std::size_t> index_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A plant, cost, gain or config invariant does not hold.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NotHurwitz : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class NotSymmetric : public Error {
public:
    using Error::Error;
};

/// Raised while parsing a scenario file. `key` names the section/key at fault.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("[" + key + "] " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace barrier_mbrl

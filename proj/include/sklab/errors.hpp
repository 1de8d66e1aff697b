#ifndef SKLAB_ERRORS_HPP
#define SKLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sklab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad n, site index out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The instance is too large for exhaustive enumeration.
class CapacityError : public Error {
public:
    CapacityError(int n, int cap)
        : Error("instance size n=" + std::to_string(n) + " exceeds the enumeration cap of " +
                std::to_string(cap) + "; use a heuristic solver or raise the cap"),
          n_(n), cap_(cap) {}

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int cap() const noexcept { return cap_; }

private:
    int n_;
    int cap_;
};

/// A numerical result failed an internal consistency check (non-finite energy, ...).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration, manifest or parameter grid.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Persisted data does not match what its seed or checksum says it should be.
class IntegrityError : public Error {
public:
    using Error::Error;
};

}  // namespace sklab

#endif  // SKLAB_ERRORS_HPP

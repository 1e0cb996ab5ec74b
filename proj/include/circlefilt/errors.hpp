#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace circlefilt {

/// Invalid or out-of-bounds configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// API misuse: wrong scenario for a filter, path/hypothesis mismatch. CLI exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite or malformed input data. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown (non-finite state, lost positive-definiteness).
/// Carries the step index and, when known, the seed needed to replay the failure.
/// CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what,
                            std::size_t step = kNoStep,
                            std::uint64_t seed = 0, bool has_seed = false)
        : std::runtime_error(what), step_(step), seed_(seed), has_seed_(has_seed) {}

    static constexpr std::size_t kNoStep = static_cast<std::size_t>(-1);

    bool has_step() const noexcept { return step_ != kNoStep; }
    std::size_t step() const noexcept { return step_; }
    bool has_seed() const noexcept { return has_seed_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::size_t step_;
    std::uint64_t seed_;
    bool has_seed_;
};

/// Particle-oracle breakdown (vanished or non-finite weights). CLI exit code 3.
class OracleError : public NumericalError {
public:
    explicit OracleError(const std::string& what, std::size_t step = kNoStep)
        : NumericalError(what, step) {}
};

/// File or stream I/O failure. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace circlefilt

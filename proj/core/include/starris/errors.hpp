#pragma once

#include <stdexcept>
#include <string>

namespace starris {

// Raised for any parameter outside its valid domain (odd pulse count,
// direction in the wrong half-space, empty grid, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Per-atom |t|^2 + |r|^2 = 1 violated by externally supplied codes/profiles.
class EnergyConservationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A resolution cell whose steering vector has zero norm.
class DegenerateCellError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The cached H0 sample cannot resolve the requested false-alarm rate.
class InsufficientTrialsError : public std::runtime_error {
public:
    InsufficientTrialsError(const std::string& what, double lowest_rate, double highest_rate)
        : std::runtime_error(what), lowest_rate_(lowest_rate), highest_rate_(highest_rate) {}

    double lowest_rate() const noexcept { return lowest_rate_; }
    double highest_rate() const noexcept { return highest_rate_; }

private:
    double lowest_rate_;
    double highest_rate_;
};

}  // namespace starris

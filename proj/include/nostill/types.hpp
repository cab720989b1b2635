#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nostill {

/// One input location: two spatial coordinates and a time coordinate.
struct SpaceTimePoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;

    [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(t); }

    friend bool operator==(const SpaceTimePoint &, const SpaceTimePoint &) = default;
    friend auto operator<=>(const SpaceTimePoint &, const SpaceTimePoint &) = default;
};

// Error families map onto CLI exit codes (config 2, numerical 3, I/O and data 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace nostill

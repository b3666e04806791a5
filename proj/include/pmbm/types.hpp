#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmbm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed arguments: dimension mismatches, out-of-range probabilities,
/// infeasible association choices.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Ill-conditioned linear algebra or a distribution with no positive mass.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration file problems. The message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An enumeration or hypothesis bound would be exceeded.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The operation's structural precondition does not hold for this input.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Identifies a measurement by (scan index, 1-based index within the scan).
struct MeasurementId {
    int scan = 0;
    int index = 0;

    auto operator<=>(const MeasurementId&) const = default;
};

/// Tracks are labelled by the measurement that first detected them.
using TrackLabel = MeasurementId;

inline std::string to_string(const MeasurementId& id) {
    return "(" + std::to_string(id.scan) + "," + std::to_string(id.index) + ")";
}

} // namespace pmbm

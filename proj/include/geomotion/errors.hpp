#pragma once

#include <stdexcept>
#include <string>

namespace geomotion {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched dimensions or otherwise invalid arguments.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// The metric lost positive-definiteness (singular or negative eigenvalue).
class MetricDegeneracyError : public Error {
public:
    using Error::Error;
};

/// A point lies inside (or on the boundary of) a strictly avoided region.
/// Consumers typically translate this into a capped, effectively infinite
/// energy contribution.
class InsideRegionError : public Error {
public:
    explicit InsideRegionError(const std::string& what, std::string region = "")
        : Error(what), region_(std::move(region)) {}
    const std::string& region() const { return region_; }

private:
    std::string region_;
};

/// A direction vector too short to normalize.
class DegenerateDirectionError : public Error {
public:
    using Error::Error;
};

/// Pseudo-inverse of a rank-deficient Jacobian requested without damping.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

/// No feasible spline initialization found within the restart budget.
class InfeasibleInitError : public Error {
public:
    using Error::Error;
};

/// The optimizer could not make progress from its starting point.
class OptimizationStalledError : public Error {
public:
    using Error::Error;
};

/// Inverse kinematics failed to reach the requested goal.
class UnreachableGoalError : public Error {
public:
    UnreachableGoalError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

/// Scenario file could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Scenario parsed but violates one or more invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace geomotion

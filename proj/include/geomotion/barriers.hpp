#pragma once

#include <string>

namespace geomotion {

/// Scalar barrier families. Strict barriers diverge as the distance goes to
/// zero and therefore make the bordering region impassable for geodesics;
/// the exponential barrier stays finite and only discourages entry.
enum class BarrierKind {
    Exponential,   // sigma * exp(-s^2 / lambda^2)
    Logarithmic,   // -sigma * log(s)
    InversePower,  // sigma / s^n
};

struct Barrier {
    BarrierKind kind = BarrierKind::InversePower;
    double sigma = 1.0;   // scale
    double lambda = 1.0;  // width, exponential only
    int power = 1;        // exponent n, inverse-power only

    /// Distances below this are clamped before evaluating strict barriers so
    /// evaluations stay finite in floating point.
    static constexpr double kMinDistance = 1e-9;
    /// Values above this threshold are treated as "inside the region" by
    /// consumers (energy caps, violation checks).
    static constexpr double kDivergenceThreshold = 1e6;

    static Barrier exponential(double sigma, double lambda);
    static Barrier logarithmic(double sigma);
    static Barrier inverse_power(double sigma, int power = 1);
};

/// b(s) for distance s. Strict barriers require s > 0; s is clamped at
/// Barrier::kMinDistance. The exponential barrier accepts any s and is
/// evaluated on max(s, 0).
double barrier_value(const Barrier& b, double s);

/// db/ds, analytic.
double barrier_gradient(const Barrier& b, double s);

/// True iff b(s) -> infinity as s -> 0, i.e. the barrier enforces a hard
/// constraint.
bool is_strict(const Barrier& b);

std::string to_string(BarrierKind kind);

}  // namespace geomotion

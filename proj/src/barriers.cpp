#include "geomotion/barriers.hpp"

#include <cmath>

#include "geomotion/errors.hpp"

namespace geomotion {

Barrier Barrier::exponential(double sigma, double lambda) {
    Barrier b;
    b.kind = BarrierKind::Exponential;
    b.sigma = sigma;
    b.lambda = lambda;
    return b;
}

Barrier Barrier::logarithmic(double sigma) {
    Barrier b;
    b.kind = BarrierKind::Logarithmic;
    b.sigma = sigma;
    return b;
}

Barrier Barrier::inverse_power(double sigma, int power) {
    Barrier b;
    b.kind = BarrierKind::InversePower;
    b.sigma = sigma;
    b.power = power;
    return b;
}

namespace {

void check_parameters(const Barrier& b) {
    if (b.sigma <= 0.0) throw DimensionError("barrier sigma must be > 0");
    if (b.kind == BarrierKind::Exponential && b.lambda <= 0.0)
        throw DimensionError("exponential barrier lambda must be > 0");
    if (b.kind == BarrierKind::InversePower && b.power < 1)
        throw DimensionError("inverse barrier power must be >= 1");
}

double clamp_strict_distance(double s) {
    if (s <= 0.0)
        throw InsideRegionError("strict barrier evaluated at non-positive distance");
    return std::max(s, Barrier::kMinDistance);
}

}  // namespace

double barrier_value(const Barrier& b, double s) {
    check_parameters(b);
    switch (b.kind) {
        case BarrierKind::Exponential: {
            const double d = std::max(s, 0.0);
            return b.sigma * std::exp(-(d * d) / (b.lambda * b.lambda));
        }
        case BarrierKind::Logarithmic:
            return -b.sigma * std::log(clamp_strict_distance(s));
        case BarrierKind::InversePower:
            return b.sigma / std::pow(clamp_strict_distance(s), b.power);
    }
    throw Error("unknown barrier kind");
}

double barrier_gradient(const Barrier& b, double s) {
    check_parameters(b);
    switch (b.kind) {
        case BarrierKind::Exponential: {
            const double d = std::max(s, 0.0);
            const double l2 = b.lambda * b.lambda;
            return -2.0 * b.sigma * d / l2 * std::exp(-(d * d) / l2);
        }
        case BarrierKind::Logarithmic:
            return -b.sigma / clamp_strict_distance(s);
        case BarrierKind::InversePower: {
            const double d = clamp_strict_distance(s);
            return -b.power * b.sigma / std::pow(d, b.power + 1);
        }
    }
    throw Error("unknown barrier kind");
}

bool is_strict(const Barrier& b) {
    return b.kind != BarrierKind::Exponential;
}

std::string to_string(BarrierKind kind) {
    switch (kind) {
        case BarrierKind::Exponential: return "exponential";
        case BarrierKind::Logarithmic: return "logarithmic";
        case BarrierKind::InversePower: return "inverse_power";
    }
    return "unknown";
}

}  // namespace geomotion

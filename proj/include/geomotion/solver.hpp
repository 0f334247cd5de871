#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "geomotion/manifold.hpp"
#include "geomotion/spline.hpp"

namespace geomotion {

struct SolverOptions {
    int control_points = 8;       // K
    int quadrature_samples = 100; // N
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    double fd_step = 1e-6;
    double energy_cap = 1e6;
    int max_init_restarts = 100;
    double init_jitter_scale = 0.25;  // relative to segment length

    /// Objective gradients: central finite differences of the discretized
    /// energy per control-point coordinate, or the same metric-level finite
    /// differences routed through the spline's (exact, linear) dependence on
    /// the control points. The two agree to finite-difference accuracy; the
    /// chain-rule route costs O(N d) instead of O(N K d) metric evaluations.
    enum class GradientMode { ObjectiveFd, SplineChainFd };
    GradientMode gradient_mode = GradientMode::SplineChainFd;

    void validate() const;
};

/// Predicate: true when a configuration lies strictly outside all hard
/// no-go regions.
using FeasibilityCheck = std::function<bool(const Configuration&)>;

/// Control points at uniform fractions along the straight segment.
GeodesicSpline init_spline(const Configuration& start, const Configuration& end, int control_points);

/// Straight-segment initialization, jittered with Gaussian perturbations
/// until every quadrature sample passes `feasible` (or the restart budget is
/// exhausted -> InfeasibleInitError). `restarts_out` reports the number of
/// jittered attempts.
GeodesicSpline init_spline(const Configuration& start, const Configuration& end,
                           const SolverOptions& options, const FeasibilityCheck& feasible,
                           std::mt19937_64& rng, int* restarts_out = nullptr);

/// Trapezoidal discretization of the Riemannian curve energy at `samples`
/// uniform parameter values; integrand values inside strict regions (or
/// above the cap) contribute `energy_cap`.
double discretized_energy(const GeodesicSpline& spline, const MetricField& metric, int samples,
                          double energy_cap = 1e6);

struct SolveResult {
    GeodesicSpline spline;
    double energy = 0.0;
    std::vector<double> energy_history;  // accepted iterations, non-increasing
    int iterations = 0;
    double gradient_norm = 0.0;  // infinity norm at termination
    std::string termination;     // "gradient_tolerance" | "max_iterations" | "line_search"
    int init_restarts = 0;
};

/// Quasi-Newton (BFGS) minimization of the discretized energy over the
/// control points, with a backtracking (halving) line search. The returned
/// energy never exceeds the initial energy. A line-search failure on the
/// very first iteration raises OptimizationStalledError.
SolveResult optimize(GeodesicSpline spline, const MetricField& metric,
                     const SolverOptions& options);

/// One optimized spline per consecutive keypoint pair. Segment g is
/// initialized with rng seed `seed + g`. A solver error in segment g is
/// rethrown with the segment index prefixed.
std::vector<SolveResult> solve_sequence(const std::vector<Configuration>& keypoints,
                                        const MetricField& metric, const SolverOptions& options,
                                        const FeasibilityCheck& feasible = nullptr,
                                        std::uint64_t seed = 0);

/// Per-joint velocity discontinuities at the interior keypoints of a
/// sequence (end velocity of segment g minus start velocity of g+1, in
/// normalized parameter time).
std::vector<Eigen::VectorXd> junction_velocity_jumps(const std::vector<SolveResult>& segments);

}  // namespace geomotion

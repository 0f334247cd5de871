#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "geomotion/errors.hpp"

namespace geomotion {

/// Joint configuration q (radians for revolute joints).
using Configuration = Eigen::VectorXd;
/// Joint velocity attached at some configuration (radians/s).
using TangentVector = Eigen::VectorXd;

/// d x d x d tensor of metric partial derivatives.
/// Entry [k](l, j) = d g_lj / d q_k.
using MetricDerivative = std::vector<Eigen::MatrixXd>;

/// d x d x d Christoffel symbols of the second kind, [i](j, k) = Gamma^i_jk.
using ChristoffelTensor = std::vector<Eigen::MatrixXd>;

/// A smoothly varying symmetric positive-definite matrix over configuration
/// space. Evaluation is a pure function of q; fields are freely shareable
/// across threads. An analytic derivative may be attached; when absent,
/// derivatives fall back to central finite differences with step
/// `derivative_step`.
struct MetricField {
    using EvalFn = std::function<void(const Configuration&, Eigen::MatrixXd&)>;
    using DerivFn = std::function<void(const Configuration&, MetricDerivative&)>;

    int dim = 0;
    EvalFn eval_fn;
    DerivFn analytic_derivative;  // optional
    double derivative_step = 1e-6;

    void eval(const Configuration& q, Eigen::MatrixXd& out) const;
    Eigen::MatrixXd operator()(const Configuration& q) const;
    bool has_analytic_derivative() const { return static_cast<bool>(analytic_derivative); }

    static MetricField constant(const Eigen::MatrixXd& g);
    static MetricField identity(int dim);
    /// Pointwise sum of two fields of equal dimension.
    static MetricField sum(MetricField a, MetricField b);
};

/// Sampled curve through configuration space: strictly increasing times with
/// one configuration and velocity per sample; accelerations optional.
struct Trajectory {
    std::vector<double> times;
    std::vector<Configuration> positions;
    std::vector<TangentVector> velocities;
    std::vector<TangentVector> accelerations;  // empty or one per sample

    int size() const { return static_cast<int>(times.size()); }
    int dimension() const { return positions.empty() ? 0 : static_cast<int>(positions.front().size()); }
    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
    void validate() const;
};

/// Result of initial-value geodesic integration. `completed` is false when
/// the metric degenerated mid-integration; the trajectory then holds the
/// samples accumulated up to the failure.
struct IvpResult {
    Trajectory trajectory;
    bool completed = true;
    std::string error;
};

/// u^T G(q) v.
double inner_product(const MetricField& metric, const Configuration& q,
                     const TangentVector& u, const TangentVector& v);

/// sqrt(v^T G(q) v). Throws MetricDegeneracyError on a negative radicand.
double riemannian_norm(const MetricField& metric, const Configuration& q,
                       const TangentVector& v);

/// Metric partial derivatives: analytic when the field provides them,
/// otherwise central finite differences with the field's step.
MetricDerivative metric_derivative(const MetricField& metric, const Configuration& q);

/// Christoffel symbols of the second kind,
/// Gamma^i_jk = 1/2 sum_l (G^-1)_il (dg_lj/dq_k + dg_lk/dq_j - dg_jk/dq_l).
ChristoffelTensor christoffel(const MetricField& metric, const Configuration& q);

/// Geodesic acceleration qdd_i = -sum_jk Gamma^i_jk qd_j qd_k.
TangentVector geodesic_acceleration(const MetricField& metric, const Configuration& q,
                                    const TangentVector& qdot);

/// Fixed-step RK4 integration of the geodesic equation from (q0, qdot0).
/// Samples at every step, endpoints included.
IvpResult integrate_geodesic_ivp(const MetricField& metric, const Configuration& q0,
                                 const TangentVector& qdot0, double horizon, double dt);

/// Trapezoidal quadrature of 1/2 |qdot|_G^2 dt over the trajectory samples.
/// Samples inside strictly avoided regions contribute `energy_cap` to the
/// integrand instead of diverging.
double curve_energy(const MetricField& metric, const Trajectory& traj,
                    double energy_cap = 1e6);

/// Trapezoidal quadrature of |qdot|_G dt. Inside-region samples contribute
/// sqrt(2 * energy_cap).
double curve_length(const MetricField& metric, const Trajectory& traj,
                    double energy_cap = 1e6);

}  // namespace geomotion

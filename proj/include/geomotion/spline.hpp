#pragma once

#include <Eigen/Dense>

#include "geomotion/manifold.hpp"

namespace geomotion {

/// Natural cubic spline through fixed endpoints and K free control points at
/// uniform knots on [0, 1]. The curve interpolates all knot values, so the
/// endpoints are met exactly for any control points, and position, velocity
/// and acceleration are continuous.
class GeodesicSpline {
public:
    /// `control_points` is K x d, one row per interior knot.
    GeodesicSpline(Configuration start, Configuration end, Eigen::MatrixXd control_points);

    int dimension() const { return static_cast<int>(start_.size()); }
    int control_count() const { return static_cast<int>(points_.rows()) - 2; }
    const Configuration& start() const { return start_; }
    const Configuration& end() const { return end_; }
    /// K x d matrix of control points.
    Eigen::MatrixXd control_points() const;
    void set_control_points(const Eigen::MatrixXd& control_points);

    /// Curve value / derivatives at parameter t in [0, 1].
    Eigen::VectorXd position(double t) const;
    Eigen::VectorXd velocity(double t) const;
    Eigen::VectorXd acceleration(double t) const;
    void sample(double t, Eigen::VectorXd* pos, Eigen::VectorXd* vel,
                Eigen::VectorXd* acc) const;

private:
    void recompute();

    Configuration start_, end_;
    Eigen::MatrixXd points_;  // (K+2) x d knot values
    Eigen::MatrixXd second_;  // (K+2) x d knot second derivatives
    double h_ = 0.0;          // uniform knot spacing
};

/// Uniform sampling of the spline mapped onto [0, duration], with positions,
/// velocities and accelerations rescaled accordingly. N = 2 yields just the
/// endpoints.
Trajectory sample_trajectory(const GeodesicSpline& spline, int samples, double duration);

}  // namespace geomotion

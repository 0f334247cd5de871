#include "geomotion/spline.hpp"

#include <cmath>

namespace geomotion {

GeodesicSpline::GeodesicSpline(Configuration start, Configuration end,
                               Eigen::MatrixXd control_points)
    : start_(std::move(start)), end_(std::move(end)) {
    const int d = static_cast<int>(start_.size());
    const int k = static_cast<int>(control_points.rows());
    if (end_.size() != d) throw DimensionError("spline endpoints dimension mismatch");
    if (k < 1) throw DimensionError("spline needs at least one control point");
    if (control_points.cols() != d)
        throw DimensionError("control points must have one column per joint");
    points_.resize(k + 2, d);
    points_.row(0) = start_.transpose();
    points_.bottomRows(1) = end_.transpose();
    points_.middleRows(1, k) = control_points;
    h_ = 1.0 / (k + 1);
    recompute();
}

Eigen::MatrixXd GeodesicSpline::control_points() const {
    return points_.middleRows(1, control_count());
}

void GeodesicSpline::set_control_points(const Eigen::MatrixXd& control_points) {
    if (control_points.rows() != control_count() || control_points.cols() != dimension())
        throw DimensionError("control point matrix has wrong shape");
    points_.middleRows(1, control_count()) = control_points;
    recompute();
}

void GeodesicSpline::recompute() {
    // Natural spline: zero second derivative at both ends; interior values
    // from the standard tridiagonal system, solved per joint at once.
    const int n = static_cast<int>(points_.rows());
    const int d = static_cast<int>(points_.cols());
    const int interior = n - 2;
    second_ = Eigen::MatrixXd::Zero(n, d);
    if (interior == 0) return;

    Eigen::MatrixXd rhs(interior, d);
    for (int j = 0; j < interior; ++j)
        rhs.row(j) = (points_.row(j + 2) - 2.0 * points_.row(j + 1) + points_.row(j)) / h_;

    // Thomas algorithm, diagonal 2h/3, off-diagonals h/6.
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(interior, 2.0 * h_ / 3.0);
    const double off = h_ / 6.0;
    for (int j = 1; j < interior; ++j) {
        const double w = off / diag(j - 1);
        diag(j) -= w * off;
        rhs.row(j) -= w * rhs.row(j - 1);
    }
    second_.row(interior) = rhs.row(interior - 1) / diag(interior - 1);
    for (int j = interior - 2; j >= 0; --j)
        second_.row(j + 1) = (rhs.row(j) - off * second_.row(j + 2)) / diag(j);
}

void GeodesicSpline::sample(double t, Eigen::VectorXd* pos, Eigen::VectorXd* vel,
                            Eigen::VectorXd* acc) const {
    const int n = static_cast<int>(points_.rows());
    t = std::clamp(t, 0.0, 1.0);
    int j = std::min(static_cast<int>(t / h_), n - 2);
    const double t0 = j * h_;
    const double t1 = (j + 1) * h_;
    const double a = t1 - t;
    const double b = t - t0;

    const auto y0 = points_.row(j);
    const auto y1 = points_.row(j + 1);
    const auto m0 = second_.row(j);
    const auto m1 = second_.row(j + 1);

    if (pos)
        *pos = (m0 * (a * a * a) / (6.0 * h_) + m1 * (b * b * b) / (6.0 * h_) +
                (y0 / h_ - m0 * h_ / 6.0) * a + (y1 / h_ - m1 * h_ / 6.0) * b)
                   .transpose();
    if (vel)
        *vel = (-m0 * (a * a) / (2.0 * h_) + m1 * (b * b) / (2.0 * h_) - (y0 / h_ - m0 * h_ / 6.0) +
                (y1 / h_ - m1 * h_ / 6.0))
                   .transpose();
    if (acc) *acc = (m0 * a / h_ + m1 * b / h_).transpose();
}

Eigen::VectorXd GeodesicSpline::position(double t) const {
    Eigen::VectorXd p;
    sample(t, &p, nullptr, nullptr);
    return p;
}

Eigen::VectorXd GeodesicSpline::velocity(double t) const {
    Eigen::VectorXd v;
    sample(t, nullptr, &v, nullptr);
    return v;
}

Eigen::VectorXd GeodesicSpline::acceleration(double t) const {
    Eigen::VectorXd a;
    sample(t, nullptr, nullptr, &a);
    return a;
}

Trajectory sample_trajectory(const GeodesicSpline& spline, int samples, double duration) {
    if (samples < 2) throw DimensionError("need at least 2 samples");
    if (duration <= 0.0) throw DimensionError("duration must be positive");
    Trajectory traj;
    traj.times.resize(samples);
    traj.positions.resize(samples);
    traj.velocities.resize(samples);
    traj.accelerations.resize(samples);
    Eigen::VectorXd p, v, a;
    for (int i = 0; i < samples; ++i) {
        const double u = static_cast<double>(i) / (samples - 1);
        spline.sample(u, &p, &v, &a);
        traj.times[i] = u * duration;
        traj.positions[i] = p;
        traj.velocities[i] = v / duration;
        traj.accelerations[i] = a / (duration * duration);
    }
    // Pin the endpoints exactly.
    traj.positions.front() = spline.start();
    traj.positions.back() = spline.end();
    return traj;
}

}  // namespace geomotion

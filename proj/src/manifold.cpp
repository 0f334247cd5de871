#include "geomotion/manifold.hpp"

#include <cmath>

namespace geomotion {

namespace {

void check_dimension(const MetricField& metric, const Configuration& q) {
    if (q.size() != metric.dim)
        throw DimensionError("configuration dimension " + std::to_string(q.size()) +
                             " does not match metric dimension " + std::to_string(metric.dim));
    if (!q.allFinite()) throw DimensionError("configuration has non-finite entries");
}

}  // namespace

void MetricField::eval(const Configuration& q, Eigen::MatrixXd& out) const {
    check_dimension(*this, q);
    eval_fn(q, out);
    if (out.rows() != dim || out.cols() != dim)
        throw DimensionError("metric evaluation returned wrong shape");
}

Eigen::MatrixXd MetricField::operator()(const Configuration& q) const {
    Eigen::MatrixXd g;
    eval(q, g);
    return g;
}

MetricField MetricField::constant(const Eigen::MatrixXd& g) {
    if (g.rows() != g.cols()) throw DimensionError("constant metric must be square");
    MetricField f;
    f.dim = static_cast<int>(g.rows());
    f.eval_fn = [g](const Configuration&, Eigen::MatrixXd& out) { out = g; };
    const int d = f.dim;
    f.analytic_derivative = [d](const Configuration&, MetricDerivative& der) {
        der.assign(d, Eigen::MatrixXd::Zero(d, d));
    };
    return f;
}

MetricField MetricField::identity(int dim) {
    return constant(Eigen::MatrixXd::Identity(dim, dim));
}

MetricField MetricField::sum(MetricField a, MetricField b) {
    if (a.dim != b.dim) throw DimensionError("cannot sum metrics of different dimension");
    MetricField f;
    f.dim = a.dim;
    f.derivative_step = std::min(a.derivative_step, b.derivative_step);
    f.eval_fn = [a, b](const Configuration& q, Eigen::MatrixXd& out) {
        Eigen::MatrixXd gb;
        a.eval_fn(q, out);
        b.eval_fn(q, gb);
        out += gb;
    };
    if (a.has_analytic_derivative() && b.has_analytic_derivative()) {
        auto da = a.analytic_derivative;
        auto db = b.analytic_derivative;
        f.analytic_derivative = [da, db](const Configuration& q, MetricDerivative& der) {
            MetricDerivative other;
            da(q, der);
            db(q, other);
            for (std::size_t k = 0; k < der.size(); ++k) der[k] += other[k];
        };
    }
    return f;
}

void Trajectory::validate() const {
    const std::size_t n = times.size();
    if (positions.size() != n || velocities.size() != n)
        throw DimensionError("trajectory arrays have mismatched lengths");
    if (!accelerations.empty() && accelerations.size() != n)
        throw DimensionError("trajectory accelerations length mismatch");
    for (std::size_t i = 1; i < n; ++i)
        if (!(times[i] > times[i - 1]))
            throw DimensionError("trajectory times must be strictly increasing");
    const int d = dimension();
    for (std::size_t i = 0; i < n; ++i) {
        if (positions[i].size() != d || velocities[i].size() != d)
            throw DimensionError("trajectory sample dimension mismatch");
    }
}

double inner_product(const MetricField& metric, const Configuration& q,
                     const TangentVector& u, const TangentVector& v) {
    if (u.size() != q.size() || v.size() != q.size())
        throw DimensionError("tangent vector dimension mismatch");
    const Eigen::MatrixXd g = metric(q);
    return u.dot(g * v);
}

double riemannian_norm(const MetricField& metric, const Configuration& q,
                       const TangentVector& v) {
    const double sq = inner_product(metric, q, v, v);
    if (sq < 0.0) {
        if (sq < -1e-12 * std::max(1.0, v.squaredNorm()))
            throw MetricDegeneracyError("negative squared norm: metric is not positive-definite");
        return 0.0;  // tiny negative from roundoff
    }
    return std::sqrt(sq);
}

MetricDerivative metric_derivative(const MetricField& metric, const Configuration& q) {
    if (q.size() != metric.dim) throw DimensionError("configuration dimension mismatch");
    MetricDerivative der;
    if (metric.has_analytic_derivative()) {
        metric.analytic_derivative(q, der);
        return der;
    }
    const int d = metric.dim;
    const double h = metric.derivative_step;
    der.assign(d, Eigen::MatrixXd(d, d));
    Configuration qp = q;
    Eigen::MatrixXd gp(d, d), gm(d, d);
    for (int k = 0; k < d; ++k) {
        qp(k) = q(k) + h;
        metric.eval(qp, gp);
        qp(k) = q(k) - h;
        metric.eval(qp, gm);
        qp(k) = q(k);
        if (!gp.allFinite() || !gm.allFinite())
            throw MetricDegeneracyError("metric evaluation non-finite while differentiating");
        der[k] = (gp - gm) / (2.0 * h);
    }
    return der;
}

ChristoffelTensor christoffel(const MetricField& metric, const Configuration& q) {
    const int d = metric.dim;
    const Eigen::MatrixXd g = metric(q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible())
        throw MetricDegeneracyError("metric is singular; Christoffel symbols undefined");
    const Eigen::MatrixXd g_inv = lu.inverse();
    const MetricDerivative dg = metric_derivative(metric, q);

    // first[l](j,k) = 1/2 (dg_lj/dq_k + dg_lk/dq_j - dg_jk/dq_l)
    ChristoffelTensor gamma(d, Eigen::MatrixXd::Zero(d, d));
    Eigen::MatrixXd first(d, d);
    for (int l = 0; l < d; ++l) {
        for (int j = 0; j < d; ++j)
            for (int k = 0; k <= j; ++k) {
                const double v = 0.5 * (dg[k](l, j) + dg[j](l, k) - dg[l](j, k));
                first(j, k) = v;
                first(k, j) = v;
            }
        for (int i = 0; i < d; ++i) gamma[i] += g_inv(i, l) * first;
    }
    return gamma;
}

TangentVector geodesic_acceleration(const MetricField& metric, const Configuration& q,
                                    const TangentVector& qdot) {
    if (qdot.size() != q.size()) throw DimensionError("velocity dimension mismatch");
    const ChristoffelTensor gamma = christoffel(metric, q);
    const int d = metric.dim;
    TangentVector acc(d);
    for (int i = 0; i < d; ++i) acc(i) = -qdot.dot(gamma[i] * qdot);
    return acc;
}

IvpResult integrate_geodesic_ivp(const MetricField& metric, const Configuration& q0,
                                 const TangentVector& qdot0, double horizon, double dt) {
    if (dt <= 0.0) throw DimensionError("dt must be positive");
    if (horizon < dt) throw DimensionError("horizon must be at least dt");

    IvpResult result;
    Trajectory& traj = result.trajectory;
    const int steps = static_cast<int>(std::round(horizon / dt));

    Configuration q = q0;
    TangentVector v = qdot0;
    traj.times.push_back(0.0);
    traj.positions.push_back(q);
    traj.velocities.push_back(v);

    Configuration k1q(q.size()), k2q(q.size()), k3q(q.size()), k4q(q.size());
    TangentVector k1v, k2v, k3v, k4v;
    try {
        traj.accelerations.push_back(geodesic_acceleration(metric, q, v));
        for (int s = 0; s < steps; ++s) {
            k1q = v;
            k1v = geodesic_acceleration(metric, q, v);
            k2q = v + 0.5 * dt * k1v;
            k2v = geodesic_acceleration(metric, q + 0.5 * dt * k1q, k2q);
            k3q = v + 0.5 * dt * k2v;
            k3v = geodesic_acceleration(metric, q + 0.5 * dt * k2q, k3q);
            k4q = v + dt * k3v;
            k4v = geodesic_acceleration(metric, q + dt * k3q, k4q);

            q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if (!q.allFinite() || !v.allFinite())
                throw MetricDegeneracyError("state became non-finite during integration");

            traj.times.push_back((s + 1) * dt);
            traj.positions.push_back(q);
            traj.velocities.push_back(v);
            traj.accelerations.push_back(geodesic_acceleration(metric, q, v));
        }
    } catch (const Error& e) {
        result.completed = false;
        result.error = e.what();
    }
    return result;
}

namespace {

double quadrature(const MetricField& metric, const Trajectory& traj, double energy_cap,
                  bool energy) {
    traj.validate();
    if (traj.size() < 2) throw DimensionError("quadrature needs at least 2 samples");
    const int n = traj.size();
    Eigen::MatrixXd g;
    std::vector<double> integrand(n);
    for (int i = 0; i < n; ++i) {
        double value;
        try {
            metric.eval(traj.positions[i], g);
            value = 0.5 * traj.velocities[i].dot(g * traj.velocities[i]);
        } catch (const InsideRegionError&) {
            value = energy_cap;
        }
        value = std::min(value, energy_cap);
        integrand[i] = energy ? value : std::sqrt(2.0 * std::max(value, 0.0));
    }
    double total = 0.0;
    for (int i = 1; i < n; ++i)
        total += 0.5 * (integrand[i] + integrand[i - 1]) * (traj.times[i] - traj.times[i - 1]);
    return total;
}

}  // namespace

double curve_energy(const MetricField& metric, const Trajectory& traj, double energy_cap) {
    return quadrature(metric, traj, energy_cap, true);
}

double curve_length(const MetricField& metric, const Trajectory& traj, double energy_cap) {
    return quadrature(metric, traj, energy_cap, false);
}

}  // namespace geomotion

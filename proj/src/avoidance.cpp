#include "geomotion/avoidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geomotion {

AvoidRegion AvoidRegion::joint_point(Eigen::VectorXd point, Barrier barrier, MetricKind kind) {
    AvoidRegion r;
    r.space = Space::Joint;
    r.joint_geometry = JointGeometry::Point;
    r.center = std::move(point);
    r.barrier = barrier;
    r.metric_kind = kind;
    return r;
}

AvoidRegion AvoidRegion::joint_ball(Eigen::VectorXd center, double radius, Barrier barrier,
                                    MetricKind kind) {
    if (radius <= 0.0) throw DimensionError("ball radius must be > 0");
    AvoidRegion r;
    r.space = Space::Joint;
    r.joint_geometry = JointGeometry::Ball;
    r.center = std::move(center);
    r.ball_radius = radius;
    r.barrier = barrier;
    r.metric_kind = kind;
    return r;
}

AvoidRegion AvoidRegion::joint_box(Eigen::VectorXd center, Eigen::VectorXd half_extents,
                                   Barrier barrier, MetricKind kind) {
    if ((half_extents.array() <= 0.0).any())
        throw DimensionError("box half-extents must be > 0");
    AvoidRegion r;
    r.space = Space::Joint;
    r.joint_geometry = JointGeometry::Box;
    r.center = std::move(center);
    r.box_half_extents = std::move(half_extents);
    r.barrier = barrier;
    r.metric_kind = kind;
    return r;
}

AvoidRegion AvoidRegion::task_shape(Shape shape, Barrier barrier, MetricKind kind) {
    AvoidRegion r;
    r.space = Space::Task;
    r.shape = std::move(shape);
    r.barrier = barrier;
    r.metric_kind = kind;
    return r;
}

AvoidRegion AvoidRegion::joint_limits(Barrier barrier) {
    AvoidRegion r;
    r.space = Space::JointLimits;
    r.barrier = barrier;
    return r;
}

AvoidRegion AvoidRegion::self_collision(Barrier barrier, double activation_distance) {
    AvoidRegion r;
    r.space = Space::SelfCollision;
    r.barrier = barrier;
    r.activation_distance = activation_distance;
    return r;
}

JointRegionQuery joint_region_query(const AvoidRegion& region, const Configuration& q) {
    if (region.space != AvoidRegion::Space::Joint)
        throw DimensionError("joint_region_query requires a joint-space region");
    if (region.center.size() != q.size())
        throw DimensionError("region dimension does not match configuration");
    JointRegionQuery out;
    switch (region.joint_geometry) {
        case AvoidRegion::JointGeometry::Point: {
            out.direction = region.center - q;
            out.distance = out.direction.norm();
            return out;
        }
        case AvoidRegion::JointGeometry::Ball: {
            const Eigen::VectorXd to_center = region.center - q;
            const double center_dist = to_center.norm();
            out.distance = center_dist - region.ball_radius;
            if (center_dist > 1e-15)
                out.direction = to_center * (out.distance / center_dist);
            else
                out.direction = Eigen::VectorXd::Zero(q.size());
            return out;
        }
        case AvoidRegion::JointGeometry::Box: {
            const Eigen::VectorXd lo = region.center - region.box_half_extents;
            const Eigen::VectorXd hi = region.center + region.box_half_extents;
            const Eigen::VectorXd clamped = q.cwiseMax(lo).cwiseMin(hi);
            out.direction = clamped - q;
            const double outside = out.direction.norm();
            if (outside > 0.0) {
                out.distance = outside;
                return out;
            }
            // Inside: distance to the nearest face, negative.
            int best = 0;
            double best_gap = std::numeric_limits<double>::infinity();
            for (int k = 0; k < q.size(); ++k) {
                const double gap = region.box_half_extents(k) - std::abs(q(k) - region.center(k));
                if (gap < best_gap) {
                    best_gap = gap;
                    best = k;
                }
            }
            out.distance = -best_gap;
            out.direction = Eigen::VectorXd::Zero(q.size());
            out.direction(best) = (q(best) >= region.center(best)) ? best_gap : -best_gap;
            return out;
        }
    }
    throw Error("unknown joint geometry");
}

Eigen::MatrixXd isotropic_metric(const Eigen::VectorXd& v, const Barrier& barrier) {
    const double s = v.norm();
    if (is_strict(barrier) && s <= 0.0)
        throw InsideRegionError("isotropic metric evaluated at zero distance");
    const double b = barrier_value(barrier, s);
    return b * Eigen::MatrixXd::Identity(v.size(), v.size());
}

Eigen::MatrixXd gram_schmidt_basis(const Eigen::VectorXd& v) {
    const int d = static_cast<int>(v.size());
    const double n = v.norm();
    if (n <= 1e-12) throw DegenerateDirectionError("direction too short to normalize");

    Eigen::MatrixXd basis(d, d);
    basis.col(0) = v / n;

    // Complete from canonical axes, dropping the one most parallel to v
    // (ties to the lowest index).
    int drop = 0;
    double best = -1.0;
    for (int k = 0; k < d; ++k) {
        const double a = std::abs(basis.col(0)(k));
        if (a > best) {
            best = a;
            drop = k;
        }
    }
    int col = 1;
    for (int k = 0; k < d && col < d; ++k) {
        if (k == drop) continue;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
        w(k) = 1.0;
        for (int j = 0; j < col; ++j) w -= basis.col(j).dot(w) * basis.col(j);
        for (int j = 0; j < col; ++j) w -= basis.col(j).dot(w) * basis.col(j);  // re-orthogonalize
        const double wn = w.norm();
        if (wn <= 1e-12) throw DegenerateDirectionError("Gram-Schmidt seed collapsed");
        basis.col(col++) = w / wn;
    }
    if (col != d) throw DegenerateDirectionError("Gram-Schmidt basis incomplete");
    return basis;
}

Eigen::MatrixXd basis_change_metric(const Eigen::VectorXd& v, const Barrier& barrier) {
    const int d = static_cast<int>(v.size());
    const double s = v.norm();
    if (is_strict(barrier) && s <= 0.0)
        throw InsideRegionError("basis-change metric evaluated at zero distance");
    const Eigen::MatrixXd basis = gram_schmidt_basis(v);
    Eigen::MatrixXd in_basis = Eigen::MatrixXd::Zero(d, d);
    in_basis(0, 0) = barrier_value(barrier, s);
    return basis * in_basis * basis.transpose();
}

Eigen::MatrixXd joint_limit_metric(const Configuration& q, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper, const Barrier& barrier) {
    const int d = static_cast<int>(q.size());
    if (lower.size() != d || upper.size() != d)
        throw DimensionError("limit vectors must match configuration dimension");
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double s_lower = q(i) - lower(i);
        const double s_upper = upper(i) - q(i);
        if (is_strict(barrier) && (s_lower <= 0.0 || s_upper <= 0.0))
            throw InsideRegionError("configuration at or beyond joint limit " + std::to_string(i));
        g(i, i) = barrier_value(barrier, s_lower) + barrier_value(barrier, s_upper);
    }
    return g;
}

Eigen::MatrixXd pullback_metric(const Eigen::MatrixXd& jacobian, const Eigen::Matrix3d& g_task) {
    if (jacobian.rows() != 3) throw DimensionError("pullback expects a 3 x d Jacobian");
    return jacobian.transpose() * g_task * jacobian;
}

Eigen::VectorXd pullback_direction(const Eigen::MatrixXd& jacobian_pinv,
                                   const Eigen::Vector3d& v_x) {
    if (jacobian_pinv.cols() != 3) throw DimensionError("pullback expects a d x 3 pseudo-inverse");
    return jacobian_pinv * v_x;
}

namespace {

constexpr double kDirectionTolerance = 1e-9;

void add_task_term(const KinematicChain& chain, const ChainState& state,
                   const AvoidRegion& region, const ClosestPair& pair, Eigen::MatrixXd& out) {
    const double s = pair.distance;
    if (is_strict(region.barrier) && s <= 0.0)
        throw InsideRegionError("inside task region '" + region.name + "'", region.name);

    const Eigen::Vector3d v_x = pair.direction;
    const double vx_norm = v_x.norm();

    if (region.metric_kind == AvoidRegion::MetricKind::Isotropic) {
        out.diagonal().array() += barrier_value(region.barrier, s);
        return;
    }

    Eigen::MatrixXd jac = point_jacobian(chain, state, pair.robot_point);
    if (pair.region_link >= 0)
        jac -= point_jacobian(chain, state, pair.region_point);  // relative motion of the two links

    if (region.metric_kind == AvoidRegion::MetricKind::PullbackMetric) {
        Eigen::Matrix3d g_task;
        if (vx_norm > kDirectionTolerance) {
            const Eigen::Vector3d u = v_x / vx_norm;
            g_task = barrier_value(region.barrier, s) * u * u.transpose();
        } else {
            g_task = barrier_value(region.barrier, s) * Eigen::Matrix3d::Identity();
        }
        out += jac.transpose() * g_task * jac;
        return;
    }

    // BasisChange: pull the direction back and build the rank-1 term in Q.
    if (vx_norm <= kDirectionTolerance) {
        out.diagonal().array() += barrier_value(region.barrier, s);  // direction lost, stay isotropic
        return;
    }
    const Eigen::MatrixXd jac_pinv = damped_pseudo_inverse(jac, region.pullback_damping);
    const Eigen::VectorXd v = pullback_direction(jac_pinv, v_x);
    if (v.norm() < kDirectionTolerance) {
        // Repulsion information exists but no direction survives the pullback.
        out.diagonal().array() += barrier_value(region.barrier, s);
        return;
    }
    const Eigen::VectorXd u = v / v.norm();
    out += barrier_value(region.barrier, s) * u * u.transpose();
}

void add_joint_term(const AvoidRegion& region, const Configuration& q, Eigen::MatrixXd& out) {
    const JointRegionQuery query = joint_region_query(region, q);
    if (is_strict(region.barrier) && query.distance <= 0.0)
        throw InsideRegionError("inside joint region '" + region.name + "'", region.name);
    const double b = barrier_value(region.barrier, query.distance);
    if (region.metric_kind == AvoidRegion::MetricKind::Isotropic ||
        query.direction.norm() <= kDirectionTolerance) {
        out.diagonal().array() += b;
        return;
    }
    const Eigen::VectorXd u = query.direction.normalized();
    out += b * u * u.transpose();
}

/// Analytic derivative of b(s) u u^T (or b(s) I) for point/ball joint
/// regions, where s = |c - q| - R and u = (c - q)/|c - q|.
void joint_region_derivative(const AvoidRegion& region, const Configuration& q,
                             MetricDerivative& der) {
    const int d = static_cast<int>(q.size());
    const Eigen::VectorXd w = region.center - q;
    const double wn = w.norm();
    const double s = wn - (region.joint_geometry == AvoidRegion::JointGeometry::Ball
                               ? region.ball_radius
                               : 0.0);
    if (is_strict(region.barrier) && s <= 0.0)
        throw InsideRegionError("inside joint region '" + region.name + "'", region.name);
    if (wn <= 1e-12) return;  // symmetric center, locally flat
    const double b = barrier_value(region.barrier, s);
    const double db = barrier_gradient(region.barrier, s);
    const Eigen::VectorXd u = w / wn;

    if (region.metric_kind == AvoidRegion::MetricKind::Isotropic) {
        for (int k = 0; k < d; ++k)
            der[k].diagonal().array() += db * (-u(k));  // ds/dq_k = -u_k
        return;
    }
    const Eigen::MatrixXd uut = u * u.transpose();
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd du = Eigen::VectorXd::Zero(d);
        du(k) = -1.0 / wn;
        du += u * (u(k) / wn);  // d u / d q_k = (-e_k + u u_k) / |w|
        der[k] += db * (-u(k)) * uut + b * (du * u.transpose() + u * du.transpose());
    }
}

bool analytic_derivative_available(const std::vector<AvoidRegion>& regions,
                                   CombinedMetricOptions::Ambient ambient) {
    if (ambient != CombinedMetricOptions::Ambient::Identity) return false;
    for (const AvoidRegion& r : regions) {
        if (r.space != AvoidRegion::Space::Joint) return false;
        if (r.joint_geometry == AvoidRegion::JointGeometry::Box) return false;
        if (r.metric_kind == AvoidRegion::MetricKind::PullbackMetric) return false;
    }
    return true;
}

}  // namespace

MetricField combined_metric(std::shared_ptr<const KinematicChain> chain,
                            std::vector<AvoidRegion> regions, CombinedMetricOptions options) {
    if (!chain) throw DimensionError("combined_metric requires a chain");
    const int d = chain->dof();
    for (const AvoidRegion& r : regions) {
        if (r.space == AvoidRegion::Space::Joint && r.center.size() != d)
            throw DimensionError("region '" + r.name + "' dimension mismatch");
    }

    const bool needs_state = options.ambient == CombinedMetricOptions::Ambient::MassMatrix ||
                             std::any_of(regions.begin(), regions.end(), [](const AvoidRegion& r) {
                                 return r.space == AvoidRegion::Space::Task ||
                                        r.space == AvoidRegion::Space::SelfCollision;
                             });

    MetricField field;
    field.dim = d;
    field.eval_fn = [chain, regions, options, needs_state, d](const Configuration& q,
                                                              Eigen::MatrixXd& out) {
        thread_local ChainState state;
        if (needs_state) forward_kinematics(*chain, q, state);

        if (options.ambient == CombinedMetricOptions::Ambient::MassMatrix)
            out = mass_matrix(*chain, state);
        else
            out = Eigen::MatrixXd::Identity(d, d);

        for (const AvoidRegion& region : regions) {
            switch (region.space) {
                case AvoidRegion::Space::Joint:
                    add_joint_term(region, q, out);
                    break;
                case AvoidRegion::Space::Task: {
                    const ClosestPair pair =
                        chain_region_query(*chain, state, region.shape, region.candidate_links);
                    if (pair.valid) add_task_term(*chain, state, region, pair, out);
                    break;
                }
                case AvoidRegion::Space::JointLimits:
                    out += joint_limit_metric(q, chain->lower_limits(), chain->upper_limits(),
                                              region.barrier);
                    break;
                case AvoidRegion::Space::SelfCollision: {
                    const auto pairs =
                        self_collision_query(*chain, state, region.activation_distance);
                    for (const ClosestPair& pair : pairs)
                        add_task_term(*chain, state, region, pair, out);
                    break;
                }
            }
        }
        out = ((out + out.transpose()) * 0.5).eval();
    };

    if (analytic_derivative_available(regions, options.ambient)) {
        field.analytic_derivative = [regions, d](const Configuration& q, MetricDerivative& der) {
            der.assign(d, Eigen::MatrixXd::Zero(d, d));
            for (const AvoidRegion& region : regions) joint_region_derivative(region, q, der);
        };
    }
    return field;
}

double region_clearance(const KinematicChain& chain, const AvoidRegion& region,
                        const ChainState& state, const Configuration& q) {
    switch (region.space) {
        case AvoidRegion::Space::Joint:
            return joint_region_query(region, q).distance;
        case AvoidRegion::Space::Task: {
            const ClosestPair pair = chain_region_query(chain, state, region.shape,
                                                        region.candidate_links);
            return pair.valid ? pair.distance : std::numeric_limits<double>::infinity();
        }
        case AvoidRegion::Space::JointLimits: {
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < chain.dof(); ++i) {
                worst = std::min(worst, q(i) - chain.lower_limits()(i));
                worst = std::min(worst, chain.upper_limits()(i) - q(i));
            }
            return worst;
        }
        case AvoidRegion::Space::SelfCollision: {
            double worst = std::numeric_limits<double>::infinity();
            const auto pairs = self_collision_query(chain, state,
                                                    std::numeric_limits<double>::infinity());
            for (const ClosestPair& pair : pairs) worst = std::min(worst, pair.distance);
            return worst;
        }
    }
    throw Error("unknown region space");
}

bool strictly_feasible(const KinematicChain& chain, const std::vector<AvoidRegion>& regions,
                       const Configuration& q) {
    ChainState state;
    forward_kinematics(chain, q, state);
    for (const AvoidRegion& region : regions) {
        if (!is_strict(region.barrier)) continue;
        if (region_clearance(chain, region, state, q) <= 0.0) return false;
    }
    return true;
}

}  // namespace geomotion

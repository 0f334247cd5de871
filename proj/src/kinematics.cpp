#include "geomotion/kinematics.hpp"

#include <cmath>

namespace geomotion {

KinematicChain::KinematicChain(std::vector<Joint> joints, std::vector<Link> links,
                               Eigen::VectorXd lower_limits, Eigen::VectorXd upper_limits,
                               bool planar)
    : joints_(std::move(joints)), links_(std::move(links)),
      lower_(std::move(lower_limits)), upper_(std::move(upper_limits)), planar_(planar) {
    const int d = dof();
    if (d < 1) throw DimensionError("chain needs at least one joint");
    if (static_cast<int>(links_.size()) != d)
        throw DimensionError("chain needs exactly one link per joint");
    if (lower_.size() != d || upper_.size() != d)
        throw DimensionError("joint limit vectors must have one entry per joint");
    for (int i = 0; i < d; ++i) {
        if (!(lower_(i) < upper_(i)))
            throw DimensionError("joint " + std::to_string(i) + ": lower limit must be < upper");
        const double n = joints_[i].axis.norm();
        if (n < 1e-12) throw DimensionError("joint axis must be nonzero");
        joints_[i].axis /= n;
        if (links_[i].mass <= 0.0)
            throw DimensionError("link " + std::to_string(i) + ": mass must be > 0");
        const Eigen::Matrix3d& in = links_[i].inertia;
        if ((in - in.transpose()).cwiseAbs().maxCoeff() > 1e-9)
            throw DimensionError("link inertia must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(in);
        if (es.eigenvalues().minCoeff() < -1e-12)
            throw DimensionError("link inertia must be positive-semidefinite");
    }
}

void KinematicChain::set_end_effector(LinkPoint p) {
    if (p.link < 0 || p.link >= static_cast<int>(links_.size()))
        throw DimensionError("end-effector link index out of range");
    end_effector_ = p;
}

bool KinematicChain::within_limits(const Configuration& q) const {
    if (q.size() != dof()) throw DimensionError("configuration dimension mismatch");
    return (q.array() >= lower_.array()).all() && (q.array() <= upper_.array()).all();
}

Configuration KinematicChain::clamp_to_limits(const Configuration& q) const {
    return q.cwiseMax(lower_).cwiseMin(upper_);
}

void forward_kinematics(const KinematicChain& chain, const Configuration& q, ChainState& out) {
    const int d = chain.dof();
    if (q.size() != d) throw DimensionError("configuration dimension mismatch");
    out.link_pose.resize(d);
    out.joint_origin.resize(d);
    out.joint_axis.resize(d);
    Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
    for (int i = 0; i < d; ++i) {
        const Joint& joint = chain.joints()[i];
        const Eigen::Vector3d origin = pose * joint.offset;
        const Eigen::Vector3d axis = pose.linear() * joint.axis;
        pose = Eigen::Translation3d(origin) * Eigen::AngleAxisd(q(i), axis) * pose.linear();
        out.joint_origin[i] = origin;
        out.joint_axis[i] = axis;
        out.link_pose[i] = pose;
    }
}

std::vector<Eigen::Isometry3d> forward_kinematics(const KinematicChain& chain,
                                                  const Configuration& q) {
    ChainState state;
    forward_kinematics(chain, q, state);
    return state.link_pose;
}

Eigen::Vector3d world_point(const ChainState& state, const LinkPoint& p) {
    if (p.link < 0 || p.link >= state.dof())
        throw DimensionError("link point index out of range");
    return state.link_pose[p.link] * p.local;
}

Eigen::MatrixXd point_jacobian(const KinematicChain& chain, const ChainState& state,
                               const LinkPoint& p) {
    const int d = chain.dof();
    if (p.link < 0 || p.link >= d) throw DimensionError("link point index out of range");
    const Eigen::Vector3d x = world_point(state, p);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, d);
    for (int i = 0; i <= p.link; ++i)
        jac.col(i) = state.joint_axis[i].cross(x - state.joint_origin[i]);
    return jac;
}

Eigen::MatrixXd point_jacobian(const KinematicChain& chain, const Configuration& q,
                               const LinkPoint& p) {
    ChainState state;
    forward_kinematics(chain, q, state);
    return point_jacobian(chain, state, p);
}

namespace {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

using SpatialInertia = Eigen::Matrix<double, 6, 6>;  // ordering (angular; linear) at world origin
using SpatialAxis = Eigen::Matrix<double, 6, 1>;

}  // namespace

Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const ChainState& state) {
    const int d = chain.dof();

    // Per-link spatial inertia expressed at the world origin.
    std::vector<SpatialInertia> inertia(d);
    for (int i = 0; i < d; ++i) {
        const Link& link = chain.links()[i];
        const Eigen::Matrix3d r = state.link_pose[i].linear();
        const Eigen::Vector3d c = state.link_pose[i] * link.com;
        const Eigen::Matrix3d i_world = r * link.inertia * r.transpose();
        const Eigen::Matrix3d cx = skew(c);
        SpatialInertia si;
        si.topLeftCorner<3, 3>() = i_world + link.mass * cx * cx.transpose();
        si.topRightCorner<3, 3>() = link.mass * cx;
        si.bottomLeftCorner<3, 3>() = -link.mass * cx;
        si.bottomRightCorner<3, 3>() = link.mass * Eigen::Matrix3d::Identity();
        inertia[i] = si;
    }
    // Composite inertias over the subtree of each joint (serial: suffix sums).
    for (int i = d - 2; i >= 0; --i) inertia[i] += inertia[i + 1];

    // Motion subspace of joint i at the world origin.
    std::vector<SpatialAxis> phi(d);
    for (int i = 0; i < d; ++i) {
        phi[i].head<3>() = state.joint_axis[i];
        phi[i].tail<3>() = state.joint_origin[i].cross(state.joint_axis[i]);
    }

    Eigen::MatrixXd m = Eigen::MatrixXd(d, d);
    for (int j = 0; j < d; ++j) {
        const SpatialAxis f = inertia[j] * phi[j];
        for (int i = 0; i <= j; ++i) {
            m(i, j) = phi[i].dot(f);
            m(j, i) = m(i, j);
        }
    }
    return m;
}

Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const Configuration& q) {
    ChainState state;
    forward_kinematics(chain, q, state);
    return mass_matrix(chain, state);
}

MetricField kinetic_energy_metric(std::shared_ptr<const KinematicChain> chain) {
    MetricField f;
    f.dim = chain->dof();
    f.eval_fn = [chain](const Configuration& q, Eigen::MatrixXd& out) {
        thread_local ChainState state;
        forward_kinematics(*chain, q, state);
        out = mass_matrix(*chain, state);
    };
    return f;
}

Eigen::MatrixXd damped_pseudo_inverse(const Eigen::MatrixXd& J, double damping) {
    if (damping < 0.0) throw DimensionError("damping must be >= 0");
    Eigen::MatrixXd jjt = J * J.transpose();
    jjt.diagonal().array() += damping * damping;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jjt);
    if (damping == 0.0 && !lu.isInvertible())
        throw RankDeficiencyError("J J^T is singular; use nonzero damping");
    return J.transpose() * lu.inverse();
}

}  // namespace geomotion

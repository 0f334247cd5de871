#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geomotion/errors.hpp"
#include "geomotion/manifold.hpp"

namespace geomotion {

/// Capsule in a link's local frame (degenerate a == b gives a sphere,
/// radius 0 gives a segment/point).
struct LocalCapsule {
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

struct Joint {
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit, in parent frame
    Eigen::Vector3d offset = Eigen::Vector3d::Zero(); // from parent frame, meters
};

struct Link {
    double mass = 0.0;                                  // kg
    Eigen::Vector3d com = Eigen::Vector3d::Zero();      // link frame, meters
    Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();  // about com, link frame, kg m^2
    std::vector<LocalCapsule> capsules;                 // collision geometry
};

/// Point fixed to a link, in that link's frame.
struct LinkPoint {
    int link = 0;
    Eigen::Vector3d local = Eigen::Vector3d::Zero();
};

/// Serial chain of revolute joints. Link i is the body driven by joint i;
/// its frame sits at joint i after the joint rotation.
class KinematicChain {
public:
    KinematicChain(std::vector<Joint> joints, std::vector<Link> links,
                   Eigen::VectorXd lower_limits, Eigen::VectorXd upper_limits,
                   bool planar = false);

    int dof() const { return static_cast<int>(joints_.size()); }
    const std::vector<Joint>& joints() const { return joints_; }
    const std::vector<Link>& links() const { return links_; }
    const Eigen::VectorXd& lower_limits() const { return lower_; }
    const Eigen::VectorXd& upper_limits() const { return upper_; }
    bool planar() const { return planar_; }

    const std::optional<LinkPoint>& end_effector() const { return end_effector_; }
    void set_end_effector(LinkPoint p);

    bool within_limits(const Configuration& q) const;
    Configuration clamp_to_limits(const Configuration& q) const;

private:
    std::vector<Joint> joints_;
    std::vector<Link> links_;
    Eigen::VectorXd lower_, upper_;
    bool planar_ = false;
    std::optional<LinkPoint> end_effector_;
};

/// Forward-kinematics cache: world link poses plus world joint origins/axes,
/// reusable for Jacobians, the mass matrix and collision queries.
struct ChainState {
    std::vector<Eigen::Isometry3d> link_pose;
    std::vector<Eigen::Vector3d> joint_origin;
    std::vector<Eigen::Vector3d> joint_axis;
    int dof() const { return static_cast<int>(link_pose.size()); }
};

void forward_kinematics(const KinematicChain& chain, const Configuration& q, ChainState& out);
std::vector<Eigen::Isometry3d> forward_kinematics(const KinematicChain& chain, const Configuration& q);

Eigen::Vector3d world_point(const ChainState& state, const LinkPoint& p);

/// 3 x d linear-velocity Jacobian of the world position of `p`. Columns for
/// joints distal to p's link are zero.
Eigen::MatrixXd point_jacobian(const KinematicChain& chain, const ChainState& state,
                               const LinkPoint& p);
Eigen::MatrixXd point_jacobian(const KinematicChain& chain, const Configuration& q,
                               const LinkPoint& p);

/// Joint-space mass-inertia matrix M(q), assembled with the composite
/// rigid-body algorithm in world coordinates. Symmetric positive-definite
/// for chains with positive link masses.
Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const ChainState& state);
Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const Configuration& q);

/// The kinetic-energy metric field G(q) = M(q).
MetricField kinetic_energy_metric(std::shared_ptr<const KinematicChain> chain);

/// J^T (J J^T + damping^2 I)^-1 for a 3 x d Jacobian. With damping 0 this is
/// the Moore-Penrose pseudo-inverse and requires full row rank.
Eigen::MatrixXd damped_pseudo_inverse(const Eigen::MatrixXd& J, double damping = 1e-3);

}  // namespace geomotion

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "geomotion/barriers.hpp"
#include "geomotion/kinematics.hpp"
#include "geomotion/manifold.hpp"
#include "geomotion/shapes.hpp"

namespace geomotion {

/// A no-go region paired with a barrier. Task regions are resolved against
/// the chain's collision capsules; joint regions live directly in
/// configuration space; JointLimits and SelfCollision are chain-derived.
struct AvoidRegion {
    enum class Space { Joint, Task, JointLimits, SelfCollision };
    /// How the barrier value turns into a metric term:
    ///  - Isotropic: b(s) * I_d (joint space)
    ///  - BasisChange: rank-1 b(s) * u u^T along the (pulled-back) direction
    ///    to the region, so motion orthogonal to u is uninfluenced
    ///  - PullbackMetric: J^T (b(s) u u^T) J with the basis change done in
    ///    task space (the weaker alternative kept for comparisons)
    enum class MetricKind { Isotropic, BasisChange, PullbackMetric };
    enum class JointGeometry { Point, Ball, Box };

    std::string name;
    Space space = Space::Joint;
    MetricKind metric_kind = MetricKind::BasisChange;
    Barrier barrier;

    // Joint-space geometry.
    JointGeometry joint_geometry = JointGeometry::Point;
    Eigen::VectorXd center;            // point / ball / box center
    double ball_radius = 0.0;
    Eigen::VectorXd box_half_extents;  // box only

    // Task-space geometry.
    Shape shape;
    std::vector<int> candidate_links;  // empty = all links

    // Self-collision.
    double activation_distance = 0.5;

    // Damping for the pullback pseudo-inverse.
    double pullback_damping = 1e-3;

    static AvoidRegion joint_point(Eigen::VectorXd point, Barrier barrier,
                                   MetricKind kind = MetricKind::BasisChange);
    static AvoidRegion joint_ball(Eigen::VectorXd center, double radius, Barrier barrier,
                                  MetricKind kind = MetricKind::BasisChange);
    static AvoidRegion joint_box(Eigen::VectorXd center, Eigen::VectorXd half_extents,
                                 Barrier barrier, MetricKind kind = MetricKind::BasisChange);
    static AvoidRegion task_shape(Shape shape, Barrier barrier,
                                  MetricKind kind = MetricKind::BasisChange);
    static AvoidRegion joint_limits(Barrier barrier);
    static AvoidRegion self_collision(Barrier barrier, double activation_distance = 0.5);
};

/// Distance and direction from q to a joint-space region. `direction` points
/// from q toward the closest region point and has norm `distance` outside
/// the region; `distance` is negative inside balls/boxes.
struct JointRegionQuery {
    double distance = 0.0;
    Eigen::VectorXd direction;
};
JointRegionQuery joint_region_query(const AvoidRegion& region, const Configuration& q);

/// b(|v|) * I_d for a direction v pointing from the evaluation point toward
/// the region.
Eigen::MatrixXd isotropic_metric(const Eigen::VectorXd& v, const Barrier& barrier);

/// Orthonormal basis whose first column is v/|v|; remaining columns complete
/// the basis from canonical axes (the axis most parallel to v is dropped,
/// ties to the lowest index).
Eigen::MatrixXd gram_schmidt_basis(const Eigen::VectorXd& v);

/// B diag(b(|v|), 0, ..., 0) B^T: rank-1 term penalizing only motion along v.
Eigen::MatrixXd basis_change_metric(const Eigen::VectorXd& v, const Barrier& barrier);

/// Diagonal metric with g_ii = b(q_i - lower_i) + b(upper_i - q_i).
Eigen::MatrixXd joint_limit_metric(const Configuration& q, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper, const Barrier& barrier);

/// J^T G_task J.
Eigen::MatrixXd pullback_metric(const Eigen::MatrixXd& jacobian, const Eigen::Matrix3d& g_task);

/// v = J^dagger v_x: joint-space direction toward a task-space region.
Eigen::VectorXd pullback_direction(const Eigen::MatrixXd& jacobian_pinv,
                                   const Eigen::Vector3d& v_x);

struct CombinedMetricOptions {
    /// Ambient term of the sum: the chain's mass matrix (the usual case) or
    /// the identity (flat ambient, used for field studies).
    enum class Ambient { MassMatrix, Identity };
    Ambient ambient = Ambient::MassMatrix;
};

/// The collision-free metric: ambient + joint-limit + self-collision +
/// region terms, evaluated per configuration. Throws InsideRegionError from
/// eval when q penetrates a strict region (consumers cap the energy).
MetricField combined_metric(std::shared_ptr<const KinematicChain> chain,
                            std::vector<AvoidRegion> regions,
                            CombinedMetricOptions options = {});

/// Signed clearance of configuration q from one region (minimum over pairs;
/// +inf when the region has nothing to check). Positive = outside.
double region_clearance(const KinematicChain& chain, const AvoidRegion& region,
                        const ChainState& state, const Configuration& q);

/// True when q is strictly outside every strict-barrier region (soft regions
/// are ignored).
bool strictly_feasible(const KinematicChain& chain, const std::vector<AvoidRegion>& regions,
                       const Configuration& q);

}  // namespace geomotion

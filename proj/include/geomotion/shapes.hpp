#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <string>
#include <vector>

#include "geomotion/kinematics.hpp"

namespace geomotion {

/// SDF-backed collision primitive with a world pose. Capsule endpoints are
/// given in the shape frame.
struct Shape {
    enum class Kind { Sphere, Capsule, Box };

    Kind kind = Kind::Sphere;
    double radius = 0.0;                                   // sphere, capsule
    Eigen::Vector3d a = Eigen::Vector3d::Zero();           // capsule endpoints
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();  // box
    Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
    std::string name;

    static Shape sphere(double radius, const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
    static Shape capsule(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double radius);
    static Shape box(const Eigen::Vector3d& half_extents,
                     const Eigen::Isometry3d& pose = Eigen::Isometry3d::Identity());
};

/// Signed distance from x to the shape surface: negative inside, zero on the
/// surface, positive outside.
double sdf(const Shape& shape, const Eigen::Vector3d& x);

/// Nearest point on the shape surface to x (also defined for penetrating x).
/// The sphere-center degeneracy resolves deterministically along the shape's
/// local +x axis.
Eigen::Vector3d closest_point(const Shape& shape, const Eigen::Vector3d& x);

/// Closest pair between the chain's collision geometry and a region shape,
/// or between two links (self-collision). `direction` points from the robot
/// toward the region and equals `point_on_region - point_on_robot`;
/// `distance` is negative when the surfaces penetrate.
struct ClosestPair {
    bool valid = false;
    Eigen::Vector3d point_on_robot = Eigen::Vector3d::Zero();
    Eigen::Vector3d point_on_region = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = Eigen::Vector3d::Zero();
    double distance = 0.0;
    LinkPoint robot_point;       // anchor for the avoidance Jacobian
    int region_link = -1;        // self-collision partner link, -1 otherwise
    LinkPoint region_point;      // valid when region_link >= 0
};

/// Minimum-distance pair between the posed capsules of `candidate_links`
/// (empty = all links with capsules) and the region shape.
ClosestPair chain_region_query(const KinematicChain& chain, const ChainState& state,
                               const Shape& region,
                               const std::vector<int>& candidate_links = {});

/// All capsule pairs between non-adjacent links closer than
/// `activation_distance`. Adjacent links are exempt.
std::vector<ClosestPair> self_collision_query(const KinematicChain& chain,
                                              const ChainState& state,
                                              double activation_distance = 0.5);

/// Closest points between two segments; returns the squared distance.
double segment_segment_closest(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                               const Eigen::Vector3d& p2, const Eigen::Vector3d& q2,
                               Eigen::Vector3d& c1, Eigen::Vector3d& c2);

}  // namespace geomotion

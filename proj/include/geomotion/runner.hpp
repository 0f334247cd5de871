#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "geomotion/scenario.hpp"

namespace geomotion {

/// Per-trajectory outcome: solver diagnostics plus violation checks sampled
/// at 10x the solver's quadrature density.
struct TrajectoryReport {
    int index = 0;
    bool solved = false;
    std::string error;

    bool out_of_limits = false;
    bool self_collision = false;
    bool obstacle_collision = false;
    // Fraction of checked samples violating each class.
    double out_of_limits_fraction = 0.0;
    double self_collision_fraction = 0.0;
    double obstacle_collision_fraction = 0.0;

    std::map<std::string, double> min_region_distance;
    double min_limit_margin = 0.0;

    double length_kinetic = 0.0;  // Riemannian length under the mass-matrix metric
    double energy = 0.0;          // final solver objective
    int iterations = 0;
    int init_restarts = 0;
    std::string termination;
    std::vector<double> junction_jump;  // per-joint velocity jump to the next segment

    double solve_seconds = 0.0;
};

struct RunReport {
    std::vector<TrajectoryReport> trajectories;
    int solved_count = 0;
    // Per-trajectory percentages (a trajectory with any violating sample counts).
    double pct_out_of_limits = 0.0;
    double pct_self_collision = 0.0;
    double pct_obstacle_collision = 0.0;
    // Mean per-sample violation percentages across solved trajectories.
    double sample_pct_out_of_limits = 0.0;
    double sample_pct_self_collision = 0.0;
    double sample_pct_obstacle_collision = 0.0;
    double total_seconds = 0.0;

    bool all_solved() const { return solved_count == static_cast<int>(trajectories.size()); }
    std::string to_json() const;
};

/// Damped-least-squares IK for the chain's end effector: iterates
/// q <- clamp(q + J^dagger (x_goal - f(q))) until the residual is below
/// `tolerance` (meters). Throws UnreachableGoalError on non-convergence.
Configuration resolve_goal_ik(const KinematicChain& chain, const Eigen::Vector3d& x_goal,
                              const Configuration& q_seed, double tolerance = 1e-4,
                              int max_iterations = 200, double damping = 1e-3);

/// Solve every trajectory of the scenario (segments run concurrently across
/// worker threads; identical seeds give identical results), check violations,
/// and write the requested outputs into `out_dir` (empty = no files).
RunReport run_scenario(const Scenario& scenario, const std::string& out_dir = "");

/// Plain-text trajectory table: one row per sample with time, positions,
/// velocities, accelerations and per-region distances, full double precision.
void write_trajectory(std::ostream& out, const Trajectory& trajectory,
                      const KinematicChain& chain, const std::vector<AvoidRegion>& regions);

struct FieldGrid {
    double x0 = 0.0, x1 = 1.0;
    int nx = 10;
    double y0 = 0.0, y1 = 1.0;
    int ny = 10;
};

/// Geodesic accelerations of a 2-D metric over a grid of configurations and
/// a set of velocities, as a flat table (one row per grid point x velocity).
/// When `chain` is non-null its end-effector image J * qddot is appended.
void sample_acceleration_field(const MetricField& metric, const KinematicChain* chain,
                               const FieldGrid& grid,
                               const std::vector<TangentVector>& velocities, std::ostream& out);

}  // namespace geomotion

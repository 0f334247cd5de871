#include "geomotion/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <thread>

namespace geomotion {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parallel_for(int count, const std::function<void(int)>& body) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace

Configuration resolve_goal_ik(const KinematicChain& chain, const Eigen::Vector3d& x_goal,
                              const Configuration& q_seed, double tolerance, int max_iterations,
                              double damping) {
    if (!chain.end_effector())
        throw DimensionError("resolve_goal_ik requires the chain's end effector");
    const LinkPoint ee = *chain.end_effector();
    Configuration q = chain.clamp_to_limits(q_seed);
    ChainState state;
    forward_kinematics(chain, q, state);
    Eigen::Vector3d residual = x_goal - world_point(state, ee);
    if (residual.norm() < tolerance) return q;

    for (int iter = 0; iter < max_iterations; ++iter) {
        const Eigen::MatrixXd jac = point_jacobian(chain, state, ee);
        const Eigen::MatrixXd jac_pinv = damped_pseudo_inverse(jac, damping);
        q = chain.clamp_to_limits(q + jac_pinv * residual);
        forward_kinematics(chain, q, state);
        residual = x_goal - world_point(state, ee);
        if (residual.norm() < tolerance) return q;
    }
    throw UnreachableGoalError("IK did not converge; final residual " +
                                   format_double(residual.norm()) + " m",
                               residual.norm());
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory,
                      const KinematicChain& chain, const std::vector<AvoidRegion>& regions) {
    const int d = trajectory.dimension();
    out << "t";
    for (int i = 1; i <= d; ++i) out << " q" << i;
    for (int i = 1; i <= d; ++i) out << " qd" << i;
    for (int i = 1; i <= d; ++i) out << " qdd" << i;
    for (const AvoidRegion& region : regions) out << " dist_" << region.name;
    out << "\n";

    ChainState state;
    const bool has_acc = !trajectory.accelerations.empty();
    for (int s = 0; s < trajectory.size(); ++s) {
        out << format_double(trajectory.times[s]);
        for (int i = 0; i < d; ++i) out << " " << format_double(trajectory.positions[s](i));
        for (int i = 0; i < d; ++i) out << " " << format_double(trajectory.velocities[s](i));
        for (int i = 0; i < d; ++i)
            out << " " << format_double(has_acc ? trajectory.accelerations[s](i) : 0.0);
        if (!regions.empty()) {
            forward_kinematics(chain, trajectory.positions[s], state);
            for (const AvoidRegion& region : regions)
                out << " "
                    << format_double(
                           region_clearance(chain, region, state, trajectory.positions[s]));
        }
        out << "\n";
    }
}

namespace {

/// Violation checks at 10x the solver's sample density.
void check_trajectory(const Scenario& scenario, const Trajectory& trajectory,
                      TrajectoryReport& report) {
    const KinematicChain& chain = *scenario.chain;
    const int n = trajectory.size();
    int limit_violations = 0, self_violations = 0, obstacle_violations = 0;
    double min_limit_margin = std::numeric_limits<double>::infinity();
    for (const AvoidRegion& region : scenario.regions)
        report.min_region_distance[region.name] = std::numeric_limits<double>::infinity();

    // Self-collision is always checked against the chain geometry, whether or
    // not a self-collision region participates in the metric.
    ChainState state;
    for (int s = 0; s < n; ++s) {
        const Configuration& q = trajectory.positions[s];
        bool limits_bad = false;
        for (int i = 0; i < chain.dof(); ++i) {
            const double margin =
                std::min(q(i) - chain.lower_limits()(i), chain.upper_limits()(i) - q(i));
            min_limit_margin = std::min(min_limit_margin, margin);
            limits_bad = limits_bad || margin < 0.0;
        }
        if (limits_bad) ++limit_violations;

        forward_kinematics(chain, q, state);
        bool self_bad = false;
        for (const ClosestPair& pair : self_collision_query(chain, state, 0.0))
            self_bad = self_bad || pair.distance <= 0.0;
        if (self_bad) ++self_violations;

        bool obstacle_bad = false;
        for (const AvoidRegion& region : scenario.regions) {
            if (region.space == AvoidRegion::Space::JointLimits ||
                region.space == AvoidRegion::Space::SelfCollision)
                continue;
            const double dist = region_clearance(chain, region, state, q);
            auto& best = report.min_region_distance[region.name];
            best = std::min(best, dist);
            obstacle_bad = obstacle_bad || dist <= 0.0;
        }
        if (obstacle_bad) ++obstacle_violations;
    }
    report.out_of_limits = limit_violations > 0;
    report.self_collision = self_violations > 0;
    report.obstacle_collision = obstacle_violations > 0;
    report.out_of_limits_fraction = static_cast<double>(limit_violations) / n;
    report.self_collision_fraction = static_cast<double>(self_violations) / n;
    report.obstacle_collision_fraction = static_cast<double>(obstacle_violations) / n;
    report.min_limit_margin = min_limit_margin;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();

    // Resolve the boundary into independent (start, goal) segments.
    std::vector<std::pair<Configuration, Configuration>> segments;
    switch (scenario.boundary.kind) {
        case Scenario::Boundary::Kind::Pair:
        case Scenario::Boundary::Kind::Keypoints:
            for (std::size_t g = 0; g + 1 < scenario.boundary.keypoints.size(); ++g)
                segments.emplace_back(scenario.boundary.keypoints[g],
                                      scenario.boundary.keypoints[g + 1]);
            break;
        case Scenario::Boundary::Kind::PairBatch:
            segments = scenario.boundary.batch;
            break;
        case Scenario::Boundary::Kind::TaskGoal: {
            const Configuration goal =
                resolve_goal_ik(*scenario.chain, scenario.boundary.task_goal,
                                scenario.boundary.start);
            if (!strictly_feasible(*scenario.chain, scenario.regions, goal))
                throw ValidationError("IK goal configuration lies inside a strict region");
            segments.emplace_back(scenario.boundary.start, goal);
            break;
        }
    }

    const MetricField metric = scenario.build_metric();
    const MetricField kinetic = kinetic_energy_metric(scenario.chain);
    const FeasibilityCheck feasible = scenario.feasibility();
    const int count = static_cast<int>(segments.size());
    const int check_samples = 10 * scenario.solver.quadrature_samples;

    RunReport report;
    report.trajectories.resize(count);
    std::vector<Trajectory> solved_trajectories(count);
    std::vector<SolveResult> results;
    results.reserve(count);
    for (int i = 0; i < count; ++i) results.emplace_back(SolveResult{
        GeodesicSpline(segments[i].first, segments[i].second,
                       Eigen::MatrixXd::Zero(1, segments[i].first.size())),
        0.0, {}, 0, 0.0, "", 0});

    parallel_for(count, [&](int i) {
        TrajectoryReport& tr = report.trajectories[i];
        tr.index = i;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::mt19937_64 rng(scenario.seed + static_cast<std::uint64_t>(i));
            int restarts = 0;
            GeodesicSpline init = init_spline(segments[i].first, segments[i].second,
                                              scenario.solver, feasible, rng, &restarts);
            SolveResult result = optimize(std::move(init), metric, scenario.solver);
            result.init_restarts = restarts;

            const Trajectory trajectory =
                sample_trajectory(result.spline, check_samples, scenario.duration);
            tr.solved = true;
            tr.energy = result.energy;
            tr.iterations = result.iterations;
            tr.init_restarts = result.init_restarts;
            tr.termination = result.termination;
            tr.length_kinetic = curve_length(kinetic, trajectory, scenario.solver.energy_cap);
            check_trajectory(scenario, trajectory, tr);
            solved_trajectories[i] = trajectory;
            results[i] = std::move(result);
        } catch (const Error& e) {
            tr.solved = false;
            tr.error = e.what();
        }
        tr.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    // Junction metadata for consecutive keypoint segments.
    if (scenario.boundary.kind == Scenario::Boundary::Kind::Keypoints ||
        scenario.boundary.kind == Scenario::Boundary::Kind::Pair) {
        for (int i = 0; i + 1 < count; ++i) {
            if (!report.trajectories[i].solved || !report.trajectories[i + 1].solved) continue;
            const Eigen::VectorXd jump =
                results[i].spline.velocity(1.0) - results[i + 1].spline.velocity(0.0);
            report.trajectories[i].junction_jump.assign(jump.data(), jump.data() + jump.size());
        }
    }

    int solved = 0, limits = 0, self = 0, obstacle = 0;
    double f_limits = 0, f_self = 0, f_obstacle = 0;
    for (const TrajectoryReport& tr : report.trajectories) {
        if (!tr.solved) continue;
        ++solved;
        limits += tr.out_of_limits ? 1 : 0;
        self += tr.self_collision ? 1 : 0;
        obstacle += tr.obstacle_collision ? 1 : 0;
        f_limits += tr.out_of_limits_fraction;
        f_self += tr.self_collision_fraction;
        f_obstacle += tr.obstacle_collision_fraction;
    }
    report.solved_count = solved;
    if (solved > 0) {
        report.pct_out_of_limits = 100.0 * limits / solved;
        report.pct_self_collision = 100.0 * self / solved;
        report.pct_obstacle_collision = 100.0 * obstacle / solved;
        report.sample_pct_out_of_limits = 100.0 * f_limits / solved;
        report.sample_pct_self_collision = 100.0 * f_self / solved;
        report.sample_pct_obstacle_collision = 100.0 * f_obstacle / solved;
    }
    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const bool want_trajectory =
            scenario.outputs.empty() ||
            std::find(scenario.outputs.begin(), scenario.outputs.end(), "trajectory") !=
                scenario.outputs.end();
        const bool want_report =
            scenario.outputs.empty() ||
            std::find(scenario.outputs.begin(), scenario.outputs.end(), "report") !=
                scenario.outputs.end();
        if (want_trajectory) {
            for (int i = 0; i < count; ++i) {
                if (!report.trajectories[i].solved) continue;
                char name[64];
                std::snprintf(name, sizeof(name), "trajectory_%03d.txt", i);
                std::ofstream out(std::filesystem::path(out_dir) / name);
                write_trajectory(out, solved_trajectories[i], *scenario.chain, scenario.regions);
            }
        }
        if (want_report) {
            std::ofstream out(std::filesystem::path(out_dir) / "report.json");
            out << report.to_json() << "\n";
        }
    }
    return report;
}

std::string RunReport::to_json() const {
    json root;
    root["solved_count"] = solved_count;
    root["trajectory_count"] = trajectories.size();
    root["violations"] = {{"pct_out_of_limits", pct_out_of_limits},
                          {"pct_self_collision", pct_self_collision},
                          {"pct_obstacle_collision", pct_obstacle_collision},
                          {"sample_pct_out_of_limits", sample_pct_out_of_limits},
                          {"sample_pct_self_collision", sample_pct_self_collision},
                          {"sample_pct_obstacle_collision", sample_pct_obstacle_collision}};
    root["timing"] = {{"total_seconds", total_seconds}};
    root["trajectories"] = json::array();
    for (const TrajectoryReport& tr : trajectories) {
        json t;
        t["index"] = tr.index;
        t["solved"] = tr.solved;
        if (!tr.error.empty()) t["error"] = tr.error;
        if (tr.solved) {
            t["out_of_limits"] = tr.out_of_limits;
            t["self_collision"] = tr.self_collision;
            t["obstacle_collision"] = tr.obstacle_collision;
            t["out_of_limits_fraction"] = tr.out_of_limits_fraction;
            t["self_collision_fraction"] = tr.self_collision_fraction;
            t["obstacle_collision_fraction"] = tr.obstacle_collision_fraction;
            t["min_limit_margin"] = tr.min_limit_margin;
            t["min_region_distance"] = tr.min_region_distance;
            t["length_kinetic"] = tr.length_kinetic;
            t["energy"] = tr.energy;
            t["iterations"] = tr.iterations;
            t["init_restarts"] = tr.init_restarts;
            t["termination"] = tr.termination;
            if (!tr.junction_jump.empty()) t["junction_jump"] = tr.junction_jump;
        }
        t["timing"] = {{"solve_seconds", tr.solve_seconds}};
        root["trajectories"].push_back(t);
    }
    return root.dump(2);
}

void sample_acceleration_field(const MetricField& metric, const KinematicChain* chain,
                               const FieldGrid& grid,
                               const std::vector<TangentVector>& velocities, std::ostream& out) {
    if (metric.dim != 2)
        throw DimensionError("acceleration field sampling requires a 2-D configuration space");
    if (grid.nx < 1 || grid.ny < 1) throw DimensionError("grid must have at least one sample");
    for (const TangentVector& v : velocities)
        if (v.size() != 2) throw DimensionError("field velocities must be 2-D");

    const bool task = chain != nullptr && chain->end_effector().has_value();
    out << "q1 q2 qd1 qd2 qdd1 qdd2";
    if (task) out << " xdd1 xdd2 xdd3";
    out << "\n";

    Configuration q(2);
    for (int ix = 0; ix < grid.nx; ++ix) {
        q(0) = grid.nx == 1 ? grid.x0 : grid.x0 + (grid.x1 - grid.x0) * ix / (grid.nx - 1);
        for (int iy = 0; iy < grid.ny; ++iy) {
            q(1) = grid.ny == 1 ? grid.y0 : grid.y0 + (grid.y1 - grid.y0) * iy / (grid.ny - 1);
            for (const TangentVector& qdot : velocities) {
                TangentVector acc(2);
                bool ok = true;
                try {
                    acc = geodesic_acceleration(metric, q, qdot);
                } catch (const Error&) {
                    ok = false;  // inside a region or degenerate: skip the row
                }
                if (!ok) continue;
                out << format_double(q(0)) << " " << format_double(q(1)) << " "
                    << format_double(qdot(0)) << " " << format_double(qdot(1)) << " "
                    << format_double(acc(0)) << " " << format_double(acc(1));
                if (task) {
                    const Eigen::MatrixXd jac =
                        point_jacobian(*chain, q, *chain->end_effector());
                    const Eigen::Vector3d xdd = jac * acc;
                    out << " " << format_double(xdd(0)) << " " << format_double(xdd(1)) << " "
                        << format_double(xdd(2));
                }
                out << "\n";
            }
        }
    }
}

}  // namespace geomotion

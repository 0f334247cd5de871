#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geomotion/avoidance.hpp"
#include "geomotion/kinematics.hpp"
#include "geomotion/solver.hpp"

namespace geomotion {

/// Parsed and validated experiment description. See the README for the
/// on-disk JSON schema (`schema_version` 1).
struct Scenario {
    enum class MetricMode { KineticOnly, CollisionFree };

    struct Boundary {
        enum class Kind { Pair, Keypoints, TaskGoal, PairBatch };
        Kind kind = Kind::Pair;
        std::vector<Configuration> keypoints;  // Pair: exactly two entries
        std::vector<std::pair<Configuration, Configuration>> batch;
        Configuration start;           // TaskGoal
        Eigen::Vector3d task_goal = Eigen::Vector3d::Zero();
    };

    std::string name;
    int schema_version = 1;
    std::uint64_t seed = 0;
    MetricMode metric_mode = MetricMode::CollisionFree;
    CombinedMetricOptions::Ambient ambient = CombinedMetricOptions::Ambient::MassMatrix;

    std::shared_ptr<KinematicChain> chain;
    std::map<std::string, Shape> shapes;
    std::map<std::string, Barrier> barriers;
    std::vector<AvoidRegion> regions;

    Boundary boundary;
    SolverOptions solver;
    double duration = 1.0;
    std::vector<std::string> outputs;  // "trajectory", "report"

    /// The metric the solver runs on, per metric_mode.
    MetricField build_metric() const;
    /// Feasibility predicate over the strict regions (null when there are none).
    FeasibilityCheck feasibility() const;
};

/// Parse and validate a scenario file. Throws ParseError with location
/// information on malformed input and ValidationError listing every violated
/// invariant otherwise.
Scenario load_scenario(const std::string& path);

/// Parse a scenario from a JSON string (same contract as load_scenario).
Scenario parse_scenario(const std::string& text, const std::string& name = "scenario");

/// Replace every region's barrier with the named palette entry
/// (ValidationError if the palette has no such entry).
void apply_barrier_override(Scenario& scenario, const std::string& palette_key);

}  // namespace geomotion

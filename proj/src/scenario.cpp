#include "geomotion/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace geomotion {

using nlohmann::json;

namespace {

Eigen::Vector3d parse_vec3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError("field '" + field + "' must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::VectorXd parse_vec(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty())
        throw ParseError("field '" + field + "' must be a non-empty array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

Eigen::Matrix3d parse_inertia(const json& j) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    if (j.is_array() && j.size() == 3 && j[0].is_number()) {
        m.diagonal() << j[0].get<double>(), j[1].get<double>(), j[2].get<double>();
        return m;
    }
    if (j.is_array() && j.size() == 3 && j[0].is_array()) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
        return m;
    }
    throw ParseError("field 'inertia' must be a diagonal [3] or full [3][3] array");
}

Eigen::Isometry3d parse_pose(const json& j) {
    Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
    if (j.contains("translation")) pose.translation() = parse_vec3(j["translation"], "translation");
    if (j.contains("rotation_rpy")) {
        const Eigen::Vector3d rpy = parse_vec3(j["rotation_rpy"], "rotation_rpy");
        pose.linear() = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                         Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                         Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                            .toRotationMatrix();
    }
    return pose;
}

Barrier parse_barrier(const json& j, const std::string& context) {
    if (!j.contains("kind")) throw ParseError(context + ": barrier needs a 'kind' field");
    const std::string kind = j["kind"].get<std::string>();
    const double sigma = j.value("sigma", 1.0);
    if (kind == "inverse" || kind == "inverse_power" || kind == "inv")
        return Barrier::inverse_power(sigma, j.value("power", 1));
    if (kind == "logarithmic" || kind == "log") return Barrier::logarithmic(sigma);
    if (kind == "exponential" || kind == "exp") {
        if (!j.contains("lambda"))
            throw ParseError(context + ": exponential barrier requires explicit 'lambda'");
        if (!j.contains("sigma"))
            throw ParseError(context + ": exponential barrier requires explicit 'sigma'");
        return Barrier::exponential(sigma, j["lambda"].get<double>());
    }
    throw ParseError(context + ": unknown barrier kind '" + kind + "'");
}

Shape parse_shape(const json& j, const std::string& context) {
    if (!j.contains("kind")) throw ParseError(context + ": shape needs a 'kind' field");
    const std::string kind = j["kind"].get<std::string>();
    Shape shape;
    if (kind == "sphere") {
        if (!j.contains("radius")) throw ParseError(context + ": sphere needs 'radius'");
        shape = Shape::sphere(j["radius"].get<double>());
    } else if (kind == "capsule") {
        if (!j.contains("a") || !j.contains("b") || !j.contains("radius"))
            throw ParseError(context + ": capsule needs 'a', 'b' and 'radius'");
        shape = Shape::capsule(parse_vec3(j["a"], "a"), parse_vec3(j["b"], "b"),
                               j["radius"].get<double>());
    } else if (kind == "box") {
        if (!j.contains("half_extents")) throw ParseError(context + ": box needs 'half_extents'");
        shape = Shape::box(parse_vec3(j["half_extents"], "half_extents"));
    } else {
        throw ParseError(context + ": unknown shape kind '" + kind + "'");
    }
    shape.pose = parse_pose(j) * shape.pose;
    return shape;
}

std::shared_ptr<KinematicChain> parse_chain(const json& j) {
    if (!j.contains("joints") || !j.contains("links"))
        throw ParseError("chain needs 'joints' and 'links' arrays");
    std::vector<Joint> joints;
    Eigen::VectorXd lower(j["joints"].size()), upper(j["joints"].size());
    int i = 0;
    for (const json& joint_json : j["joints"]) {
        Joint joint;
        if (joint_json.value("type", "revolute") != std::string("revolute"))
            throw ParseError("joint " + std::to_string(i) + ": only revolute joints are supported");
        if (joint_json.contains("axis")) joint.axis = parse_vec3(joint_json["axis"], "axis");
        if (joint_json.contains("offset")) joint.offset = parse_vec3(joint_json["offset"], "offset");
        if (!joint_json.contains("limits"))
            throw ParseError("joint " + std::to_string(i) + ": missing 'limits'");
        lower(i) = joint_json["limits"][0].get<double>();
        upper(i) = joint_json["limits"][1].get<double>();
        joints.push_back(joint);
        ++i;
    }
    std::vector<Link> links;
    for (const json& link_json : j["links"]) {
        Link link;
        link.mass = link_json.value("mass", 1.0);
        if (link_json.contains("com")) link.com = parse_vec3(link_json["com"], "com");
        if (link_json.contains("inertia")) link.inertia = parse_inertia(link_json["inertia"]);
        if (link_json.contains("capsules")) {
            for (const json& cap : link_json["capsules"]) {
                LocalCapsule capsule;
                capsule.a = parse_vec3(cap.at("a"), "capsule a");
                capsule.b = parse_vec3(cap.at("b"), "capsule b");
                capsule.radius = cap.value("radius", 0.0);
                link.capsules.push_back(capsule);
            }
        }
        links.push_back(link);
    }
    auto chain = std::make_shared<KinematicChain>(std::move(joints), std::move(links),
                                                  std::move(lower), std::move(upper),
                                                  j.value("planar", false));
    if (j.contains("end_effector")) {
        const json& ee = j["end_effector"];
        chain->set_end_effector(
            LinkPoint{ee.value("link", chain->dof() - 1), parse_vec3(ee.at("local"), "local")});
    }
    return chain;
}

AvoidRegion::MetricKind parse_metric_kind(const json& j, const std::string& context) {
    const std::string kind = j.value("metric", "basis_change");
    if (kind == "basis_change") return AvoidRegion::MetricKind::BasisChange;
    if (kind == "isotropic") return AvoidRegion::MetricKind::Isotropic;
    if (kind == "pullback_metric") return AvoidRegion::MetricKind::PullbackMetric;
    throw ParseError(context + ": unknown metric kind '" + kind + "'");
}

}  // namespace

MetricField Scenario::build_metric() const {
    CombinedMetricOptions options;
    options.ambient = ambient;
    if (metric_mode == MetricMode::KineticOnly)
        return combined_metric(chain, {}, options);
    return combined_metric(chain, regions, options);
}

FeasibilityCheck Scenario::feasibility() const {
    if (metric_mode == MetricMode::KineticOnly) return nullptr;
    bool any_strict = false;
    for (const AvoidRegion& r : regions) any_strict = any_strict || is_strict(r.barrier);
    if (!any_strict) return nullptr;
    auto chain_ptr = chain;
    auto region_list = regions;
    return [chain_ptr, region_list](const Configuration& q) {
        return strictly_feasible(*chain_ptr, region_list, q);
    };
}

Scenario parse_scenario(const std::string& text, const std::string& name) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(name + ": " + e.what());
    }

    Scenario scenario;
    scenario.name = name;
    try {
        if (!root.contains("schema_version"))
            throw ParseError("missing 'schema_version'");
        scenario.schema_version = root["schema_version"].get<int>();
        if (scenario.schema_version != 1)
            throw ParseError("unsupported schema_version " +
                             std::to_string(scenario.schema_version));
        scenario.seed = root.value("seed", 0ULL);
        scenario.duration = root.value("duration", 1.0);

        const std::string mode = root.value("metric_mode", "collision_free");
        if (mode == "kinetic_only")
            scenario.metric_mode = Scenario::MetricMode::KineticOnly;
        else if (mode == "collision_free")
            scenario.metric_mode = Scenario::MetricMode::CollisionFree;
        else
            throw ParseError("unknown metric_mode '" + mode + "'");

        const std::string ambient = root.value("ambient", "mass_matrix");
        if (ambient == "identity")
            scenario.ambient = CombinedMetricOptions::Ambient::Identity;
        else if (ambient == "mass_matrix")
            scenario.ambient = CombinedMetricOptions::Ambient::MassMatrix;
        else
            throw ParseError("unknown ambient '" + ambient + "'");

        if (!root.contains("chain")) throw ParseError("missing 'chain'");
        scenario.chain = parse_chain(root["chain"]);
        const int d = scenario.chain->dof();

        if (root.contains("shapes")) {
            for (const json& shape_json : root["shapes"]) {
                const std::string shape_name = shape_json.value("name", "");
                if (shape_name.empty()) throw ParseError("every shape needs a 'name'");
                Shape shape = parse_shape(shape_json, "shape '" + shape_name + "'");
                shape.name = shape_name;
                scenario.shapes[shape_name] = shape;
            }
        }
        if (root.contains("barriers")) {
            for (const auto& [key, value] : root["barriers"].items())
                scenario.barriers[key] = parse_barrier(value, "barrier '" + key + "'");
        }

        if (root.contains("regions")) {
            for (const json& region_json : root["regions"]) {
                const std::string context = "region '" + region_json.value("name", "?") + "'";
                AvoidRegion region;
                region.name = region_json.value("name", "");
                if (region.name.empty()) throw ParseError("every region needs a 'name'");

                if (!region_json.contains("barrier")) throw ParseError(context + ": missing 'barrier'");
                const json& barrier_ref = region_json["barrier"];
                if (barrier_ref.is_string()) {
                    const std::string key = barrier_ref.get<std::string>();
                    if (!scenario.barriers.count(key))
                        throw ParseError(context + ": unknown barrier '" + key + "'");
                    region.barrier = scenario.barriers.at(key);
                } else {
                    region.barrier = parse_barrier(barrier_ref, context);
                }
                region.metric_kind = parse_metric_kind(region_json, context);

                const std::string space = region_json.value("space", "");
                if (space == "task") {
                    region.space = AvoidRegion::Space::Task;
                    const std::string shape_key = region_json.value("shape", "");
                    if (!scenario.shapes.count(shape_key))
                        throw ParseError(context + ": unknown shape '" + shape_key + "'");
                    region.shape = scenario.shapes.at(shape_key);
                    if (region_json.contains("links"))
                        for (const json& l : region_json["links"])
                            region.candidate_links.push_back(l.get<int>());
                } else if (space == "joint") {
                    region.space = AvoidRegion::Space::Joint;
                    if (!region_json.contains("geometry"))
                        throw ParseError(context + ": joint region needs 'geometry'");
                    const json& geom = region_json["geometry"];
                    const std::string type = geom.value("type", "point");
                    if (!geom.contains("center"))
                        throw ParseError(context + ": geometry needs 'center'");
                    region.center = parse_vec(geom["center"], "center");
                    if (type == "point") {
                        region.joint_geometry = AvoidRegion::JointGeometry::Point;
                    } else if (type == "ball") {
                        region.joint_geometry = AvoidRegion::JointGeometry::Ball;
                        if (!geom.contains("radius"))
                            throw ParseError(context + ": ball geometry needs 'radius'");
                        region.ball_radius = geom["radius"].get<double>();
                    } else if (type == "box") {
                        region.joint_geometry = AvoidRegion::JointGeometry::Box;
                        if (!geom.contains("half_extents"))
                            throw ParseError(context + ": box geometry needs 'half_extents'");
                        region.box_half_extents = parse_vec(geom["half_extents"], "half_extents");
                    } else {
                        throw ParseError(context + ": unknown geometry type '" + type + "'");
                    }
                } else if (space == "joint_limits") {
                    region.space = AvoidRegion::Space::JointLimits;
                } else if (space == "self_collision") {
                    region.space = AvoidRegion::Space::SelfCollision;
                    region.activation_distance = region_json.value("activation_distance", 0.5);
                } else {
                    throw ParseError(context + ": unknown space '" + space + "'");
                }
                region.pullback_damping = region_json.value("pullback_damping", 1e-3);
                scenario.regions.push_back(std::move(region));
            }
        }

        if (!root.contains("boundary")) throw ParseError("missing 'boundary'");
        const json& boundary = root["boundary"];
        if (boundary.contains("keypoints")) {
            scenario.boundary.kind = Scenario::Boundary::Kind::Keypoints;
            for (const json& kp : boundary["keypoints"])
                scenario.boundary.keypoints.push_back(parse_vec(kp, "keypoint"));
            if (scenario.boundary.keypoints.size() < 2)
                throw ParseError("boundary.keypoints needs at least two entries");
        } else if (boundary.contains("pairs")) {
            scenario.boundary.kind = Scenario::Boundary::Kind::PairBatch;
            for (const json& pair : boundary["pairs"])
                scenario.boundary.batch.emplace_back(parse_vec(pair.at("start"), "start"),
                                                     parse_vec(pair.at("goal"), "goal"));
            if (scenario.boundary.batch.empty())
                throw ParseError("boundary.pairs must not be empty");
        } else if (boundary.contains("task_goal")) {
            scenario.boundary.kind = Scenario::Boundary::Kind::TaskGoal;
            scenario.boundary.start = parse_vec(boundary.at("start"), "start");
            scenario.boundary.task_goal = parse_vec3(boundary["task_goal"], "task_goal");
        } else if (boundary.contains("start") && boundary.contains("goal")) {
            scenario.boundary.kind = Scenario::Boundary::Kind::Pair;
            scenario.boundary.keypoints = {parse_vec(boundary["start"], "start"),
                                           parse_vec(boundary["goal"], "goal")};
        } else {
            throw ParseError("boundary needs start/goal, keypoints, pairs, or start/task_goal");
        }

        if (root.contains("solver")) {
            const json& solver = root["solver"];
            scenario.solver.control_points = solver.value("control_points", 8);
            scenario.solver.quadrature_samples = solver.value("quadrature_samples", 100);
            scenario.solver.max_iterations = solver.value("max_iterations", 500);
            scenario.solver.gradient_tolerance = solver.value("gradient_tolerance", 1e-6);
            scenario.solver.fd_step = solver.value("fd_step", 1e-6);
            scenario.solver.energy_cap = solver.value("energy_cap", 1e6);
            scenario.solver.max_init_restarts = solver.value("max_init_restarts", 100);
            const std::string grad = solver.value("gradient_mode", "spline_chain_fd");
            if (grad == "objective_fd")
                scenario.solver.gradient_mode = SolverOptions::GradientMode::ObjectiveFd;
            else if (grad == "spline_chain_fd")
                scenario.solver.gradient_mode = SolverOptions::GradientMode::SplineChainFd;
            else
                throw ParseError("unknown gradient_mode '" + grad + "'");
        }

        if (root.contains("outputs"))
            for (const json& o : root["outputs"]) scenario.outputs.push_back(o.get<std::string>());

        // Cross-cutting validation; collect every violation.
        std::vector<std::string> violations;
        scenario.solver.validate();
        for (const AvoidRegion& region : scenario.regions) {
            if (region.space == AvoidRegion::Space::Joint && region.center.size() != d)
                violations.push_back("region '" + region.name + "': dimension " +
                                     std::to_string(region.center.size()) + " != chain dof " +
                                     std::to_string(d));
            for (int link : region.candidate_links)
                if (link < 0 || link >= d)
                    violations.push_back("region '" + region.name + "': link index out of range");
        }
        auto check_config = [&](const Configuration& q, const std::string& label) {
            if (q.size() != d) {
                violations.push_back(label + ": dimension mismatch");
                return;
            }
            if (!scenario.chain->within_limits(q))
                violations.push_back(label + ": outside joint limits");
            ChainState state;
            forward_kinematics(*scenario.chain, q, state);
            for (const AvoidRegion& region : scenario.regions) {
                if (!is_strict(region.barrier)) continue;
                if (region_clearance(*scenario.chain, region, state, q) <= 0.0)
                    violations.push_back(label + ": inside region '" + region.name + "'");
            }
        };
        switch (scenario.boundary.kind) {
            case Scenario::Boundary::Kind::Pair:
            case Scenario::Boundary::Kind::Keypoints:
                for (std::size_t i = 0; i < scenario.boundary.keypoints.size(); ++i)
                    check_config(scenario.boundary.keypoints[i], "keypoint " + std::to_string(i));
                break;
            case Scenario::Boundary::Kind::PairBatch:
                for (std::size_t i = 0; i < scenario.boundary.batch.size(); ++i) {
                    check_config(scenario.boundary.batch[i].first,
                                 "pair " + std::to_string(i) + " start");
                    check_config(scenario.boundary.batch[i].second,
                                 "pair " + std::to_string(i) + " goal");
                }
                break;
            case Scenario::Boundary::Kind::TaskGoal:
                check_config(scenario.boundary.start, "start");
                if (!scenario.chain->end_effector())
                    violations.push_back("task_goal requires chain.end_effector");
                break;
        }
        if (!violations.empty()) {
            std::ostringstream msg;
            msg << name << ": " << violations.size() << " validation error(s):";
            for (const std::string& v : violations) msg << "\n  - " << v;
            throw ValidationError(msg.str());
        }
    } catch (const json::exception& e) {
        throw ParseError(name + ": " + e.what());
    }
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path);
}

void apply_barrier_override(Scenario& scenario, const std::string& palette_key) {
    if (!scenario.barriers.count(palette_key))
        throw ValidationError("barrier override '" + palette_key +
                              "' is not in the scenario's barrier palette");
    for (AvoidRegion& region : scenario.regions)
        region.barrier = scenario.barriers.at(palette_key);
}

}  // namespace geomotion

// geomotion CLI: solve scenarios, sample acceleration fields, validate inputs.
//
// Exit codes: 0 success, 1 validation/parse error, 2 solver failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "geomotion/runner.hpp"

namespace {

int exit_validation = 1;
int exit_solver = 2;

geomotion::Scenario load_with_overrides(const std::string& path, long long seed_override,
                                        const std::string& metric_override,
                                        const std::string& barrier_override) {
    geomotion::Scenario scenario = geomotion::load_scenario(path);
    if (seed_override >= 0) scenario.seed = static_cast<std::uint64_t>(seed_override);
    if (!metric_override.empty()) {
        if (metric_override == "kinetic")
            scenario.metric_mode = geomotion::Scenario::MetricMode::KineticOnly;
        else if (metric_override == "collision-free")
            scenario.metric_mode = geomotion::Scenario::MetricMode::CollisionFree;
        else
            throw geomotion::ValidationError("--metric must be 'kinetic' or 'collision-free'");
    }
    if (!barrier_override.empty()) geomotion::apply_barrier_override(scenario, barrier_override);
    return scenario;
}

std::vector<geomotion::TangentVector> load_velocities(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw geomotion::ParseError("cannot open velocities file '" + path + "'");
    std::vector<geomotion::TangentVector> velocities;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::vector<double> values;
        double v;
        while (row >> v) values.push_back(v);
        if (values.empty()) continue;
        velocities.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), values.size()));
    }
    if (velocities.empty()) throw geomotion::ParseError("velocities file '" + path + "' is empty");
    return velocities;
}

geomotion::FieldGrid parse_grid(const std::string& spec) {
    // X0:X1:NX,Y0:Y1:NY
    geomotion::FieldGrid grid;
    const auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw geomotion::ParseError("--grid expects X0:X1:NX,Y0:Y1:NY");
    auto parse_axis = [](const std::string& axis, double& lo, double& hi, int& n) {
        double a, b;
        int count;
        char c1, c2;
        std::istringstream in(axis);
        if (!(in >> a >> c1 >> b >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1)
            throw geomotion::ParseError("bad grid axis '" + axis + "'");
        lo = a;
        hi = b;
        n = count;
    };
    parse_axis(spec.substr(0, comma), grid.x0, grid.x1, grid.nx);
    parse_axis(spec.substr(comma + 1), grid.y0, grid.y1, grid.ny);
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient, collision-free robot motions as geodesics "
                 "of barrier-reshaped configuration-space metrics"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, metric_override, barrier_override;
    long long seed_override = -1;
    std::string grid_spec, velocities_path;

    CLI::App* run = app.add_subcommand("run", "Solve a scenario and export results");
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory for trajectories and the report");
    run->add_option("--seed", seed_override, "Override the scenario seed");
    run->add_option("--metric", metric_override, "Metric mode: kinetic | collision-free");
    run->add_option("--barrier", barrier_override,
                    "Replace all region barriers with this palette entry (e.g. exp|log|inv)");

    CLI::App* field = app.add_subcommand("field", "Sample a geodesic acceleration field");
    field->add_option("scenario", scenario_path, "Scenario file")->required();
    field->add_option("--grid", grid_spec, "Grid spec X0:X1:NX,Y0:Y1:NY")->required();
    field->add_option("--velocities", velocities_path, "File of velocity rows")->required();
    field->add_option("--out", out_dir, "Output directory (default: stdout)");
    field->add_option("--metric", metric_override, "Metric mode: kinetic | collision-free");
    field->add_option("--barrier", barrier_override, "Barrier palette override");

    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a scenario");
    validate->add_option("scenario", scenario_path, "Scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            geomotion::load_scenario(scenario_path);
            std::cout << "ok: " << scenario_path << "\n";
            return 0;
        }
        if (run->parsed()) {
            const geomotion::Scenario scenario =
                load_with_overrides(scenario_path, seed_override, metric_override, barrier_override);
            const geomotion::RunReport report = geomotion::run_scenario(scenario, out_dir);
            std::cout << report.to_json() << "\n";
            return report.all_solved() ? 0 : exit_solver;
        }
        if (field->parsed()) {
            const geomotion::Scenario scenario =
                load_with_overrides(scenario_path, seed_override, metric_override, barrier_override);
            const geomotion::FieldGrid grid = parse_grid(grid_spec);
            const auto velocities = load_velocities(velocities_path);
            const geomotion::MetricField metric = scenario.build_metric();
            const geomotion::KinematicChain* chain =
                scenario.chain->end_effector() ? scenario.chain.get() : nullptr;
            if (out_dir.empty()) {
                geomotion::sample_acceleration_field(metric, chain, grid, velocities, std::cout);
            } else {
                std::filesystem::create_directories(out_dir);
                std::ofstream out(std::filesystem::path(out_dir) / "field.txt");
                geomotion::sample_acceleration_field(metric, chain, grid, velocities, out);
            }
            return 0;
        }
    } catch (const geomotion::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const geomotion::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const geomotion::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const geomotion::Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return exit_solver;
    }
    return 0;
}

#include "geomotion/solver.hpp"

#include <cmath>

namespace geomotion {

void SolverOptions::validate() const {
    if (control_points < 1) throw DimensionError("control_points must be >= 1");
    if (quadrature_samples < 10) throw DimensionError("quadrature_samples must be >= 10");
    if (max_iterations < 1) throw DimensionError("max_iterations must be >= 1");
    if (gradient_tolerance <= 0.0 || fd_step <= 0.0 || energy_cap <= 0.0)
        throw DimensionError("tolerances and the energy cap must be positive");
}

GeodesicSpline init_spline(const Configuration& start, const Configuration& end,
                           int control_points) {
    if (start.size() != end.size()) throw DimensionError("endpoint dimension mismatch");
    if (control_points < 1) throw DimensionError("control_points must be >= 1");
    const int d = static_cast<int>(start.size());
    Eigen::MatrixXd points(control_points, d);
    for (int k = 0; k < control_points; ++k) {
        const double f = static_cast<double>(k + 1) / (control_points + 1);
        points.row(k) = ((1.0 - f) * start + f * end).transpose();
    }
    return GeodesicSpline(start, end, points);
}

namespace {

bool spline_feasible(const GeodesicSpline& spline, const FeasibilityCheck& feasible,
                     int samples) {
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        if (!feasible(spline.position(t))) return false;
    }
    return true;
}

}  // namespace

GeodesicSpline init_spline(const Configuration& start, const Configuration& end,
                           const SolverOptions& options, const FeasibilityCheck& feasible,
                           std::mt19937_64& rng, int* restarts_out) {
    GeodesicSpline spline = init_spline(start, end, options.control_points);
    if (restarts_out) *restarts_out = 0;
    if (!feasible) return spline;
    if (spline_feasible(spline, feasible, options.quadrature_samples)) return spline;

    const Eigen::MatrixXd straight = spline.control_points();
    const double scale = options.init_jitter_scale * std::max((end - start).norm(), 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 1; attempt <= options.max_init_restarts; ++attempt) {
        const double sigma = scale * (1.0 + attempt / 20.0);
        Eigen::MatrixXd jittered = straight;
        for (int r = 0; r < jittered.rows(); ++r)
            for (int c = 0; c < jittered.cols(); ++c) jittered(r, c) += sigma * gauss(rng);
        spline.set_control_points(jittered);
        if (spline_feasible(spline, feasible, options.quadrature_samples)) {
            if (restarts_out) *restarts_out = attempt;
            return spline;
        }
    }
    throw InfeasibleInitError("no feasible spline initialization after " +
                              std::to_string(options.max_init_restarts) + " restarts");
}

double discretized_energy(const GeodesicSpline& spline, const MetricField& metric, int samples,
                          double energy_cap) {
    if (samples < 2) throw DimensionError("need at least 2 quadrature samples");
    if (spline.dimension() != metric.dim) throw DimensionError("spline/metric dimension mismatch");
    const double dt = 1.0 / (samples - 1);
    Eigen::VectorXd q, v;
    Eigen::MatrixXd g;
    double total = 0.0;
    double prev = 0.0;
    for (int i = 0; i < samples; ++i) {
        spline.sample(i * dt, &q, &v, nullptr);
        double value;
        try {
            metric.eval(q, g);
            value = 0.5 * v.dot(g * v);
        } catch (const InsideRegionError&) {
            value = energy_cap;
        }
        value = std::min(value, energy_cap);
        if (i > 0) total += 0.5 * (value + prev) * dt;
        prev = value;
    }
    return total;
}

namespace {

class EnergyProblem {
public:
    EnergyProblem(const GeodesicSpline& spline, const MetricField& metric,
                  const SolverOptions& options)
        : spline_(spline), metric_(metric), options_(options),
          dim_(spline.dimension()), k_(spline.control_count()) {
        if (options_.gradient_mode == SolverOptions::GradientMode::SplineChainFd)
            precompute_weights();
    }

    int variables() const { return k_ * dim_; }

    Eigen::MatrixXd unflatten(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd points(k_, dim_);
        for (int r = 0; r < k_; ++r) points.row(r) = x.segment(r * dim_, dim_).transpose();
        return points;
    }

    Eigen::VectorXd flatten(const Eigen::MatrixXd& points) const {
        Eigen::VectorXd x(variables());
        for (int r = 0; r < k_; ++r) x.segment(r * dim_, dim_) = points.row(r).transpose();
        return x;
    }

    double energy(const Eigen::VectorXd& x) {
        spline_.set_control_points(unflatten(x));
        return discretized_energy(spline_, metric_, options_.quadrature_samples,
                                  options_.energy_cap);
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) {
        return options_.gradient_mode == SolverOptions::GradientMode::ObjectiveFd
                   ? gradient_objective_fd(x)
                   : gradient_chain_fd(x);
    }

    const GeodesicSpline& spline_at(const Eigen::VectorXd& x) {
        spline_.set_control_points(unflatten(x));
        return spline_;
    }

private:
    Eigen::VectorXd gradient_objective_fd(const Eigen::VectorXd& x) {
        Eigen::VectorXd grad(variables());
        Eigen::VectorXd probe = x;
        const double h = options_.fd_step;
        for (int i = 0; i < variables(); ++i) {
            probe(i) = x(i) + h;
            const double up = energy(probe);
            probe(i) = x(i) - h;
            const double down = energy(probe);
            probe(i) = x(i);
            grad(i) = (up - down) / (2.0 * h);
        }
        return grad;
    }

    // d E / d P through the spline's linear dependence on the control points:
    // the metric's directional derivatives are still finite differences.
    Eigen::VectorXd gradient_chain_fd(const Eigen::VectorXd& x) {
        spline_.set_control_points(unflatten(x));
        const int n = options_.quadrature_samples;
        const double dt = 1.0 / (n - 1);
        const double h = options_.fd_step;

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(variables());
        Eigen::VectorXd q, v, qp;
        Eigen::MatrixXd g, gp, gm;
        Eigen::VectorXd dvalue_dq(dim_);
        for (int i = 0; i < n; ++i) {
            const double w = (i == 0 || i == n - 1) ? 0.5 * dt : dt;  // trapezoid weight
            spline_.sample(i * dt, &q, &v, nullptr);
            double value;
            try {
                metric_.eval(q, g);
                value = 0.5 * v.dot(g * v);
            } catch (const InsideRegionError&) {
                continue;  // capped sample: flat integrand, no gradient
            }
            if (value >= options_.energy_cap) continue;

            // d(value)/dq_l = 1/2 v^T (dG/dq_l) v, central differences.
            qp = q;
            for (int l = 0; l < dim_; ++l) {
                double up, down;
                try {
                    qp(l) = q(l) + h;
                    metric_.eval(qp, gp);
                    qp(l) = q(l) - h;
                    metric_.eval(qp, gm);
                    qp(l) = q(l);
                    up = 0.5 * v.dot(gp * v);
                    down = 0.5 * v.dot(gm * v);
                } catch (const InsideRegionError&) {
                    qp(l) = q(l);
                    up = down = 0.0;  // abutting the cap plateau
                }
                dvalue_dq(l) = (up - down) / (2.0 * h);
            }
            const Eigen::VectorXd dvalue_dv = g * v;
            for (int k = 0; k < k_; ++k) {
                const double wp = pos_weight_(i, k);
                const double wv = vel_weight_(i, k);
                grad.segment(k * dim_, dim_) += w * (wp * dvalue_dq + wv * dvalue_dv);
            }
        }
        return grad;
    }

    void precompute_weights() {
        const int n = options_.quadrature_samples;
        pos_weight_.resize(n, k_);
        vel_weight_.resize(n, k_);
        const Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
        Eigen::VectorXd p(1), v(1);
        for (int k = 0; k < k_; ++k) {
            Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(k_, 1);
            unit(k, 0) = 1.0;
            GeodesicSpline basis(zero1, zero1, unit);
            for (int i = 0; i < n; ++i) {
                basis.sample(static_cast<double>(i) / (n - 1), &p, &v, nullptr);
                pos_weight_(i, k) = p(0);
                vel_weight_(i, k) = v(0);
            }
        }
    }

    GeodesicSpline spline_;
    const MetricField& metric_;
    const SolverOptions& options_;
    int dim_, k_;
    Eigen::MatrixXd pos_weight_, vel_weight_;
};

}  // namespace

SolveResult optimize(GeodesicSpline spline, const MetricField& metric,
                     const SolverOptions& options) {
    options.validate();
    EnergyProblem problem(spline, metric, options);
    const int n = problem.variables();

    Eigen::VectorXd x = problem.flatten(spline.control_points());
    double energy = problem.energy(x);
    Eigen::VectorXd grad = problem.gradient(x);

    SolveResult result{spline, energy, {energy}, 0, grad.lpNorm<Eigen::Infinity>(), "", 0};

    Eigen::MatrixXd hessian_inv = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    constexpr double kArmijo = 1e-4;
    constexpr double kMinStep = 1e-14;

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            result.termination = "gradient_tolerance";
            break;
        }
        Eigen::VectorXd direction = -(hessian_inv * grad);
        double slope = direction.dot(grad);
        if (slope >= 0.0) {  // stale curvature, fall back to steepest descent
            hessian_inv.setIdentity();
            direction = -grad;
            slope = direction.dot(grad);
        }

        double step = 1.0;
        double new_energy = 0.0;
        Eigen::VectorXd x_new;
        bool accepted = false;
        while (step >= kMinStep) {
            x_new = x + step * direction;
            new_energy = problem.energy(x_new);
            if (new_energy <= energy + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (iter == 0)
                throw OptimizationStalledError(
                    "line search failed at the initial point (gradient " +
                    std::to_string(grad.lpNorm<Eigen::Infinity>()) + ", energy " +
                    std::to_string(energy) + ")");
            result.termination = "line_search";
            break;
        }

        const Eigen::VectorXd grad_new = problem.gradient(x_new);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                hessian_inv *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = hessian_inv * y;
            hessian_inv += (sy + y.dot(hy)) * rho * rho * (s * s.transpose()) -
                           rho * (hy * s.transpose() + s * hy.transpose());
        }

        x = x_new;
        energy = new_energy;
        grad = grad_new;
        result.energy_history.push_back(energy);
    }
    if (result.termination.empty())
        result.termination = iter >= options.max_iterations ? "max_iterations" : result.termination;

    result.spline = problem.spline_at(x);
    result.energy = energy;
    result.iterations = iter;
    result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    return result;
}

std::vector<SolveResult> solve_sequence(const std::vector<Configuration>& keypoints,
                                        const MetricField& metric, const SolverOptions& options,
                                        const FeasibilityCheck& feasible, std::uint64_t seed) {
    if (keypoints.size() < 2) throw DimensionError("sequence needs at least 2 keypoints");
    std::vector<SolveResult> results;
    results.reserve(keypoints.size() - 1);
    for (std::size_t g = 0; g + 1 < keypoints.size(); ++g) {
        try {
            std::mt19937_64 rng(seed + g);
            int restarts = 0;
            GeodesicSpline init =
                init_spline(keypoints[g], keypoints[g + 1], options, feasible, rng, &restarts);
            SolveResult result = optimize(std::move(init), metric, options);
            result.init_restarts = restarts;
            results.push_back(std::move(result));
        } catch (const Error& e) {
            throw Error("segment " + std::to_string(g) + ": " + e.what());
        }
    }
    return results;
}

std::vector<Eigen::VectorXd> junction_velocity_jumps(const std::vector<SolveResult>& segments) {
    std::vector<Eigen::VectorXd> jumps;
    for (std::size_t g = 0; g + 1 < segments.size(); ++g)
        jumps.push_back(segments[g].spline.velocity(1.0) - segments[g + 1].spline.velocity(0.0));
    return jumps;
}

}  // namespace geomotion

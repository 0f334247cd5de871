#include <doctest.h>

#include <cmath>
#include <random>

#include "geomotion/avoidance.hpp"
#include "geomotion/manifold.hpp"

using namespace geomotion;

namespace {

/// 1-D metric g(q) = ambient + b(q - q_a), region below q_a = 0.
MetricField one_dim_barrier_metric(const Barrier& barrier, double ambient) {
    MetricField f;
    f.dim = 1;
    f.eval_fn = [barrier, ambient](const Configuration& q, Eigen::MatrixXd& out) {
        out.resize(1, 1);
        out(0, 0) = ambient + barrier_value(barrier, q(0));
    };
    return f;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(values.size());
    int i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("inner product and norm") {
    const MetricField id2 = MetricField::identity(2);
    CHECK(inner_product(id2, vec({0, 0}), vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
    CHECK(inner_product(id2, vec({0, 0}), vec({3, 4}), vec({3, 4})) == doctest::Approx(25.0));

    Eigen::MatrixXd diag21 = Eigen::Vector2d(2, 1).asDiagonal();
    const MetricField g = MetricField::constant(diag21);
    CHECK(inner_product(g, vec({0, 0}), vec({1, 1}), vec({1, 1})) == doctest::Approx(3.0));

    const MetricField id3 = MetricField::identity(3);
    CHECK(riemannian_norm(id3, vec({0, 0, 0}), vec({1, 2, 2})) == doctest::Approx(3.0));
    CHECK(riemannian_norm(id3, vec({0, 0, 0}), vec({0, 0, 0})) == doctest::Approx(0.0));
    Eigen::MatrixXd diag49 = Eigen::Vector2d(4, 9).asDiagonal();
    CHECK(riemannian_norm(MetricField::constant(diag49), vec({0, 0}), vec({1, 1})) ==
          doctest::Approx(std::sqrt(13.0)));

    CHECK_THROWS_AS(inner_product(id2, vec({0, 0}), vec({1, 0, 0}), vec({0, 1})), DimensionError);

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1, 0, 0, -1;
    CHECK_THROWS_AS(riemannian_norm(MetricField::constant(indefinite), vec({0, 0}), vec({0, 1})),
                    MetricDegeneracyError);
}

TEST_CASE("metric derivative: constant, polynomial, barrier") {
    const MetricField constant = MetricField::constant(Eigen::Matrix2d::Identity());
    MetricField constant_fd = constant;
    constant_fd.analytic_derivative = nullptr;  // force finite differences
    const MetricDerivative dg = metric_derivative(constant_fd, vec({0.3, -0.7}));
    for (const auto& slice : dg) CHECK(slice.cwiseAbs().maxCoeff() < 1e-9);

    // g(q) = diag(1 + q1^2, 1): dg11/dq1 = 2 q1.
    MetricField poly;
    poly.dim = 2;
    poly.eval_fn = [](const Configuration& q, Eigen::MatrixXd& out) {
        out = Eigen::Matrix2d::Identity();
        out(0, 0) = 1.0 + q(0) * q(0);
    };
    const MetricDerivative dpoly = metric_derivative(poly, vec({1.0, 0.0}));
    CHECK(dpoly[0](0, 0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(dpoly[1](0, 0)) < 1e-6);

    // 1-D inverse barrier at distance 2: dg/dq = b'(2) = -1/4.
    const MetricField inv1d = one_dim_barrier_metric(Barrier::inverse_power(1.0), 1.0);
    const MetricDerivative dinv = metric_derivative(inv1d, vec({2.0}));
    CHECK(dinv[0](0, 0) == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("christoffel: constants vanish, 1-D formula") {
    Eigen::MatrixXd g(2, 2);
    g << 3, 1, 1, 2;
    MetricField constant = MetricField::constant(g);
    constant.analytic_derivative = nullptr;
    const ChristoffelTensor gamma = christoffel(constant, vec({0.2, 0.4}));
    for (const auto& slice : gamma) CHECK(slice.cwiseAbs().maxCoeff() < 1e-9);

    // 1-D: Gamma = b'(q) / (2 (1 + b(q))).
    const Barrier inv = Barrier::inverse_power(1.0);
    const MetricField inv1d = one_dim_barrier_metric(inv, 1.0);
    for (double q : {0.3, 0.8, 2.5}) {
        const double expected =
            0.5 * barrier_gradient(inv, q) / (1.0 + barrier_value(inv, q));
        CHECK(christoffel(inv1d, vec({q}))[0](0, 0) ==
              doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("christoffel symmetry in lower indices") {
    MetricField wavy;
    wavy.dim = 3;
    wavy.eval_fn = [](const Configuration& q, Eigen::MatrixXd& out) {
        out = Eigen::Matrix3d::Identity();
        out(0, 0) += 0.3 * std::sin(q(1));
        out(1, 1) += 0.2 * q(2) * q(2);
        out(0, 1) = out(1, 0) = 0.1 * std::cos(q(2));
    };
    const ChristoffelTensor gamma = christoffel(wavy, vec({0.4, -0.2, 0.9}));
    for (const auto& slice : gamma)
        CHECK((slice - slice.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("geodesic acceleration: 1-D barrier cases") {
    // Barrier-only metric g = sigma/q reproduces qdd = qd^2 / (2 q).
    const MetricField bare = one_dim_barrier_metric(Barrier::inverse_power(1.0), 0.0);
    CHECK(geodesic_acceleration(bare, vec({0.5}), vec({1.0}))(0) ==
          doctest::Approx(1.0).epsilon(1e-5));

    // With the ambient term, g = 1 + 1/q: qdd = qd^2 / (2 q (q + 1)).
    const MetricField with_ambient = one_dim_barrier_metric(Barrier::inverse_power(1.0), 1.0);
    CHECK(geodesic_acceleration(with_ambient, vec({0.5}), vec({1.0}))(0) ==
          doctest::Approx(1.0 / 1.5).epsilon(1e-5));

    // Exponential barrier generates no acceleration at the region center.
    const MetricField expm = one_dim_barrier_metric(Barrier::exponential(1.0, 1.0), 1.0);
    CHECK(std::abs(geodesic_acceleration(expm, vec({0.0}), vec({1.0}))(0)) < 1e-6);

    // Constant metric: zero.
    MetricField constant = MetricField::constant(Eigen::Matrix2d::Identity() * 2.0);
    constant.analytic_derivative = nullptr;
    CHECK(geodesic_acceleration(constant, vec({1, 2}), vec({3, -1})).norm() < 1e-9);
}

TEST_CASE("geodesic IVP: straight lines under the identity metric") {
    const MetricField id2 = MetricField::identity(2);
    const IvpResult result = integrate_geodesic_ivp(id2, vec({0, 0}), vec({1, 0}), 1.0, 1e-3);
    REQUIRE(result.completed);
    CHECK((result.trajectory.positions.back() - vec({1, 0})).norm() < 1e-9);
    // Max deviation from the chord stays tiny.
    for (int i = 0; i < result.trajectory.size(); ++i) {
        const double t = result.trajectory.times[i];
        CHECK((result.trajectory.positions[i] - t * vec({1, 0})).norm() < 1e-8);
    }
}

TEST_CASE("geodesic IVP: velocity norm conservation") {
    // A genuinely curved metric: basis-change barrier around a joint point.
    auto region = AvoidRegion::joint_point(vec({2.0, 0.0}), Barrier::inverse_power(1.0));
    MetricField metric;
    metric.dim = 2;
    metric.eval_fn = [region](const Configuration& q, Eigen::MatrixXd& out) {
        const JointRegionQuery query = joint_region_query(region, q);
        out = Eigen::Matrix2d::Identity() + basis_change_metric(query.direction, region.barrier);
    };
    const Configuration q0 = vec({0.0, 0.0});
    const TangentVector v0 = vec({0.8, 0.4});
    const IvpResult result = integrate_geodesic_ivp(metric, q0, v0, 1.0, 1e-3);
    REQUIRE(result.completed);
    const double c0 = riemannian_norm(metric, q0, v0);
    double worst = 0.0;
    for (int i = 0; i < result.trajectory.size(); ++i) {
        const double c = riemannian_norm(metric, result.trajectory.positions[i],
                                         result.trajectory.velocities[i]);
        worst = std::max(worst, std::abs(c - c0) / c0);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("geodesic IVP: strict barrier repels in 1-D") {
    const MetricField inv1d = one_dim_barrier_metric(Barrier::inverse_power(1.0), 1.0);
    const IvpResult result = integrate_geodesic_ivp(inv1d, vec({1.0}), vec({-1.0}), 1.0, 1e-3);
    REQUIRE(result.completed);
    for (const Configuration& q : result.trajectory.positions) CHECK(q(0) > 0.0);
    // Agreement with a dense-dt reference integration.
    const IvpResult reference =
        integrate_geodesic_ivp(inv1d, vec({1.0}), vec({-1.0}), 1.0, 1e-5);
    REQUIRE(reference.completed);
    CHECK(result.trajectory.positions.back()(0) ==
          doctest::Approx(reference.trajectory.positions.back()(0)).epsilon(1e-4));
}

TEST_CASE("curve energy and length") {
    const MetricField id2 = MetricField::identity(2);
    Trajectory line;
    const int n = 1001;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        line.times.push_back(t);
        line.positions.push_back(vec({t, 0}));
        line.velocities.push_back(vec({1, 0}));
    }
    CHECK(curve_energy(id2, line) == doctest::Approx(0.5));
    CHECK(curve_length(id2, line) == doctest::Approx(1.0));

    const MetricField two = MetricField::constant(Eigen::Matrix2d::Identity() * 2.0);
    CHECK(curve_energy(two, line) == doctest::Approx(1.0));

    Trajectory still = line;
    for (auto& v : still.velocities) v.setZero();
    CHECK(curve_energy(id2, still) == doctest::Approx(0.0));

    // Length is reparameterization-invariant: quadratic time warp of the
    // same segment.
    Trajectory warped;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        warped.times.push_back(t);
        warped.positions.push_back(vec({t * t, 0}));
        warped.velocities.push_back(vec({2 * t, 0}));
    }
    CHECK(curve_length(id2, warped) == doctest::Approx(1.0).epsilon(1e-4));

    // Quarter circle of radius 1.
    Trajectory arc;
    for (int i = 0; i < n; ++i) {
        const double t = 0.5 * M_PI * i / (n - 1);
        arc.times.push_back(t);
        arc.positions.push_back(vec({std::cos(t), std::sin(t)}));
        arc.velocities.push_back(vec({-std::sin(t), std::cos(t)}));
    }
    CHECK(curve_length(id2, arc) == doctest::Approx(M_PI / 2).epsilon(1e-3));

    // Cauchy-Schwarz: length^2 <= 2 * energy * duration.
    CHECK(curve_length(id2, warped) * curve_length(id2, warped) <=
          2.0 * curve_energy(id2, warped) * warped.duration() + 1e-9);
}

TEST_CASE("metric derivative matches analytic derivatives of barrier fields") {
    auto region = AvoidRegion::joint_ball(vec({1.5, -0.5}), 0.4, Barrier::inverse_power(1.0));
    // combined_metric with identity ambient attaches analytic derivatives.
    std::vector<Joint> joints(2);
    std::vector<Link> links(2);
    joints[1].offset = Eigen::Vector3d(1, 0, 0);
    links[0].mass = links[1].mass = 1.0;
    links[0].com = links[1].com = Eigen::Vector3d(1, 0, 0);
    auto chain = std::make_shared<KinematicChain>(joints, links, vec({-6, -6}), vec({6, 6}));
    CombinedMetricOptions options;
    options.ambient = CombinedMetricOptions::Ambient::Identity;
    const MetricField metric = combined_metric(chain, {region}, options);
    REQUIRE(metric.has_analytic_derivative());
    MetricField fd_only = metric;
    fd_only.analytic_derivative = nullptr;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    int tested = 0;
    while (tested < 50) {
        const Configuration q = vec({coord(rng), coord(rng)});
        const JointRegionQuery query = joint_region_query(region, q);
        if (query.distance < 0.1) continue;
        ++tested;
        const MetricDerivative analytic = metric_derivative(metric, q);
        const MetricDerivative numeric = metric_derivative(fd_only, q);
        for (int k = 0; k < 2; ++k) {
            const double scale = std::max(1.0, analytic[k].cwiseAbs().maxCoeff());
            CHECK((analytic[k] - numeric[k]).cwiseAbs().maxCoeff() / scale < 1e-5);
        }
    }
}

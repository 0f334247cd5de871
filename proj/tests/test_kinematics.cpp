#include <doctest.h>

#include <cmath>
#include <random>

#include "geomotion/kinematics.hpp"

using namespace geomotion;

namespace {

/// Planar 2-link arm, unit lengths, point masses at the link tips.
std::shared_ptr<KinematicChain> two_link_arm(double m1 = 1.0, double m2 = 1.0, double l1 = 1.0,
                                             double l2 = 1.0) {
    std::vector<Joint> joints(2);
    joints[0].axis = joints[1].axis = Eigen::Vector3d::UnitZ();
    joints[1].offset = Eigen::Vector3d(l1, 0, 0);
    std::vector<Link> links(2);
    links[0].mass = m1;
    links[0].com = Eigen::Vector3d(l1, 0, 0);
    links[1].mass = m2;
    links[1].com = Eigen::Vector3d(l2, 0, 0);
    links[0].capsules = {{Eigen::Vector3d::Zero(), Eigen::Vector3d(l1, 0, 0), 0.05}};
    links[1].capsules = {{Eigen::Vector3d::Zero(), Eigen::Vector3d(l2, 0, 0), 0.05}};
    auto chain = std::make_shared<KinematicChain>(
        joints, links, Eigen::Vector2d(-M_PI, -M_PI).eval(), Eigen::Vector2d(M_PI, M_PI).eval(),
        true);
    chain->set_end_effector(LinkPoint{1, Eigen::Vector3d(l2, 0, 0)});
    return chain;
}

/// Closed-form mass matrix of the two-link arm with tip point masses.
Eigen::Matrix2d two_link_mass_oracle(double m1, double m2, double l1, double l2, double q2) {
    const double c2 = std::cos(q2);
    Eigen::Matrix2d m;
    m(0, 0) = m1 * l1 * l1 + m2 * (l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * c2);
    m(0, 1) = m(1, 0) = m2 * (l2 * l2 + l1 * l2 * c2);
    m(1, 1) = m2 * l2 * l2;
    return m;
}

Eigen::VectorXd vec2(double a, double b) { return Eigen::Vector2d(a, b); }

/// Spatial 3-joint chain with mixed axes for generic checks.
std::shared_ptr<KinematicChain> spatial_chain() {
    std::vector<Joint> joints(3);
    joints[0].axis = Eigen::Vector3d::UnitZ();
    joints[1].axis = Eigen::Vector3d::UnitY();
    joints[1].offset = Eigen::Vector3d(0.4, 0, 0.2);
    joints[2].axis = Eigen::Vector3d(1, 1, 0).normalized();
    joints[2].offset = Eigen::Vector3d(0.3, 0.1, 0);
    std::vector<Link> links(3);
    for (int i = 0; i < 3; ++i) {
        links[i].mass = 0.5 + 0.3 * i;
        links[i].com = Eigen::Vector3d(0.2, 0.05 * i, 0.1);
        links[i].inertia = Eigen::Vector3d(0.02, 0.03, 0.025).asDiagonal();
        links[i].capsules = {{Eigen::Vector3d::Zero(), Eigen::Vector3d(0.3, 0, 0), 0.04}};
    }
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -3.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 3.0);
    return std::make_shared<KinematicChain>(joints, links, lo, hi);
}

}  // namespace

TEST_CASE("two-link forward kinematics") {
    auto chain = two_link_arm();
    const LinkPoint tip{1, Eigen::Vector3d(1, 0, 0)};

    ChainState state;
    forward_kinematics(*chain, vec2(0, 0), state);
    CHECK((world_point(state, tip) - Eigen::Vector3d(2, 0, 0)).norm() < 1e-12);

    forward_kinematics(*chain, vec2(M_PI / 2, 0), state);
    CHECK((world_point(state, tip) - Eigen::Vector3d(0, 2, 0)).norm() < 1e-12);

    forward_kinematics(*chain, vec2(M_PI / 2, -M_PI / 2), state);
    CHECK((world_point(state, tip) - Eigen::Vector3d(1, 1, 0)).norm() < 1e-12);
}

TEST_CASE("point jacobian: analytic planar values and zero distal columns") {
    auto chain = two_link_arm();
    const LinkPoint tip{1, Eigen::Vector3d(1, 0, 0)};
    const Eigen::MatrixXd jac = point_jacobian(*chain, vec2(0, 0), tip);
    Eigen::MatrixXd expected(3, 2);
    expected << 0, 0, 2, 1, 0, 0;
    CHECK((jac - expected).cwiseAbs().maxCoeff() < 1e-12);

    // A point on link 0 does not move with joint 1.
    const LinkPoint elbow{0, Eigen::Vector3d(0.7, 0, 0)};
    const Eigen::MatrixXd jac0 = point_jacobian(*chain, vec2(0.3, -0.8), elbow);
    CHECK(jac0.col(1).norm() == doctest::Approx(0.0));
}

TEST_CASE("point jacobian matches finite differences of FK") {
    auto chain = spatial_chain();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-2.5, 2.5);
    const LinkPoint probe{2, Eigen::Vector3d(0.25, -0.1, 0.05)};
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd q(3);
        q << angle(rng), angle(rng), angle(rng);
        const Eigen::MatrixXd jac = point_jacobian(*chain, q, probe);
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd qp = q, qm = q;
            qp(i) += h;
            qm(i) -= h;
            ChainState sp, sm;
            forward_kinematics(*chain, qp, sp);
            forward_kinematics(*chain, qm, sm);
            const Eigen::Vector3d fd = (world_point(sp, probe) - world_point(sm, probe)) / (2 * h);
            CHECK((jac.col(i) - fd).norm() < 1e-6);
        }
    }
}

TEST_CASE("planar chains: jacobian z-row vanishes for in-plane points") {
    auto chain = two_link_arm();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd q = vec2(angle(rng), angle(rng));
        const Eigen::MatrixXd jac = point_jacobian(*chain, q, LinkPoint{1, {0.6, 0, 0}});
        CHECK(jac.row(2).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mass matrix matches the two-link Lagrangian closed form") {
    auto chain = two_link_arm();
    Eigen::Matrix2d expected0 = two_link_mass_oracle(1, 1, 1, 1, 0.0);
    CHECK(expected0(0, 0) == doctest::Approx(5.0));
    CHECK(expected0(0, 1) == doctest::Approx(2.0));
    CHECK(expected0(1, 1) == doctest::Approx(1.0));
    CHECK((mass_matrix(*chain, vec2(0.7, 0.0)) - expected0).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd at_right_angle = mass_matrix(*chain, vec2(0.2, M_PI / 2));
    CHECK(at_right_angle(0, 0) == doctest::Approx(3.0).epsilon(1e-10));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd q = vec2(angle(rng), angle(rng));
        const Eigen::Matrix2d oracle = two_link_mass_oracle(1, 1, 1, 1, q(1));
        const Eigen::MatrixXd m = mass_matrix(*chain, q);
        CHECK((m - oracle).cwiseAbs().maxCoeff() / oracle.norm() < 1e-8);
    }
}

TEST_CASE("mass matrix kinetic energy equals summed link kinetic energies") {
    auto chain = spatial_chain();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(-2.0, 2.0);
    std::uniform_real_distribution<double> speed(-1.5, 1.5);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd q(3), qd(3);
        q << angle(rng), angle(rng), angle(rng);
        qd << speed(rng), speed(rng), speed(rng);

        const double ke_metric = 0.5 * qd.dot(mass_matrix(*chain, q) * qd);

        // Independent route: differentiate FK numerically per link.
        ChainState sp, sm;
        forward_kinematics(*chain, q + h * qd, sp);
        forward_kinematics(*chain, q - h * qd, sm);
        double ke_links = 0.0;
        for (int link = 0; link < chain->dof(); ++link) {
            const Link& l = chain->links()[link];
            const Eigen::Vector3d v_com =
                (sp.link_pose[link] * l.com - sm.link_pose[link] * l.com) / (2 * h);
            const Eigen::Matrix3d r = 0.5 * (sp.link_pose[link].linear() +
                                             sm.link_pose[link].linear());
            const Eigen::Matrix3d rdot =
                (sp.link_pose[link].linear() - sm.link_pose[link].linear()) / (2 * h);
            const Eigen::Matrix3d omega_skew = rdot * r.transpose();
            const Eigen::Vector3d omega(omega_skew(2, 1), omega_skew(0, 2), omega_skew(1, 0));
            const Eigen::Matrix3d inertia_world = r * l.inertia * r.transpose();
            ke_links += 0.5 * l.mass * v_com.squaredNorm() + 0.5 * omega.dot(inertia_world * omega);
        }
        CHECK(ke_metric == doctest::Approx(ke_links).epsilon(1e-8));
    }
}

TEST_CASE("mass matrix is symmetric positive-definite") {
    auto chain = spatial_chain();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd q(3);
        q << angle(rng), angle(rng), angle(rng);
        const Eigen::MatrixXd m = mass_matrix(*chain, q);
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12 * m.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("damped pseudo-inverse") {
    Eigen::MatrixXd wide(3, 5);
    wide.setZero();
    wide.leftCols(3).setIdentity();
    const Eigen::MatrixXd pinv = damped_pseudo_inverse(wide, 0.0);
    CHECK((pinv - wide.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd two = 2.0 * Eigen::MatrixXd::Identity(3, 3);
    CHECK((damped_pseudo_inverse(two, 0.0) - 0.5 * Eigen::MatrixXd::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd j(3, 6);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 6; ++c) j(r, c) = gauss(rng);
        const Eigen::MatrixXd jp = damped_pseudo_inverse(j, 0.0);
        CHECK((j * jp * j - j).cwiseAbs().maxCoeff() < 1e-10);
    }

    Eigen::MatrixXd rank_deficient(3, 2);
    rank_deficient << 1, 0, 0, 1, 0, 0;
    // J J^T is 3x3 of rank 2.
    CHECK_THROWS_AS(damped_pseudo_inverse(rank_deficient, 0.0), RankDeficiencyError);
    CHECK_NOTHROW(damped_pseudo_inverse(rank_deficient, 1e-3));
}

TEST_CASE("chain validation") {
    std::vector<Joint> joints(1);
    std::vector<Link> links(1);
    links[0].mass = 0.0;  // invalid
    CHECK_THROWS_AS(KinematicChain(joints, links, Eigen::VectorXd::Constant(1, -1),
                                   Eigen::VectorXd::Constant(1, 1)),
                    DimensionError);
    links[0].mass = 1.0;
    CHECK_THROWS_AS(KinematicChain(joints, links, Eigen::VectorXd::Constant(1, 2),
                                   Eigen::VectorXd::Constant(1, 1)),
                    DimensionError);
}

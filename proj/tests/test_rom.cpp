#include <doctest.h>

#include <cmath>

#include "sbmrom/errors.hpp"
#include "sbmrom/pod.hpp"
#include "sbmrom/rom.hpp"

using namespace sbmrom;

namespace {

FomConfig small_cylinder_config() {
    FomConfig c;
    c.h0 = 0.2;
    c.v0 = {0.1, 0.0};
    c.boundary.inflow = -0.02;
    c.boundary.outflow = 0.02;
    c.fixed_dt = 0.002;
    return c;
}

} // namespace

TEST_CASE("reduced mass against hand cases") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.15);
    const int n_h = 3 * mesh.n_nodes();
    const FomConfig config = small_cylinder_config();

    SUBCASE("identity injection reproduces the lumped mass diagonal") {
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n_h, n_h);
        const RomOperator op = build_rom(eye, mesh, nullptr, config);
        const std::vector<double> mass =
            lumped_mass(mesh, SurrogateDomain::all_active(mesh));
        for (int i = 0; i < n_h; ++i)
            CHECK(op.reduced_mass()(i, i) == doctest::Approx(mass[i]).epsilon(1e-14));
        CHECK((op.reduced_mass() -
               op.reduced_mass().diagonal().asDiagonal().toDenseMatrix())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    SUBCASE("single mode gives the positive scalar phi^T M phi") {
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n_h, 1);
        phi.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n_h)));
        const RomOperator op = build_rom(phi, mesh, nullptr, config);
        const std::vector<double> mass =
            lumped_mass(mesh, SurrogateDomain::all_active(mesh));
        double expect = 0.0;
        for (int i = 0; i < n_h; ++i) expect += mass[i] / n_h;
        CHECK(op.reduced_mass()(0, 0) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(op.reduced_mass()(0, 0) > 0.0);
    }
    SUBCASE("reduced mass is symmetric for a generic basis") {
        Eigen::MatrixXd phi(n_h, 3);
        for (int i = 0; i < n_h; ++i) {
            phi(i, 0) = std::sin(0.01 * i);
            phi(i, 1) = std::cos(0.02 * i);
            phi(i, 2) = std::sin(0.03 * i + 0.5);
        }
        const RomOperator op = build_rom(phi, mesh, nullptr, config);
        CHECK((op.reduced_mass() - op.reduced_mass().transpose()).cwiseAbs().maxCoeff() <
              1e-12);
    }
    SUBCASE("an empty basis is rejected") {
        const Eigen::MatrixXd none(n_h, 0);
        CHECK_THROWS_AS(build_rom(none, mesh, nullptr, config), EmptyBasis);
    }
    SUBCASE("a rank-deficient basis is rejected") {
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n_h, 2);
        phi.col(0).setConstant(1.0);
        phi.col(1) = phi.col(0);
        CHECK_THROWS_AS(build_rom(phi, mesh, nullptr, config), SingularReducedMass);
    }
}

TEST_CASE("initial coefficients are the orthogonal projection") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.15);
    const int n_h = 3 * mesh.n_nodes();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n_h, 2);
    phi(0, 0) = 1.0;
    phi(5, 1) = 1.0;
    const RomOperator op = build_rom(phi, mesh, nullptr, small_cylinder_config());

    StateVector u(n_h, 0.0);
    u[0] = 2.5; // equals 2.5 * phi_1
    Eigen::VectorXd a = op.initial_coeffs(u);
    CHECK(a[0] == doctest::Approx(2.5));
    CHECK(a[1] == 0.0);

    StateVector orth(n_h, 0.0);
    orth[7] = 1.0;
    a = op.initial_coeffs(orth);
    CHECK(a.norm() == 0.0);
}

TEST_CASE("scalar analog of the reduced update matches the hand iteration") {
    // With M_r = 1 and Phi^T R(Phi a) = a the reduced PMC is the scalar PMC.
    Eigen::VectorXd a(1);
    a << 1.0;
    const double dt = 0.1;
    Eigen::VectorXd an = a;
    for (int k = 0; k < 2; ++k) {
        const double mid = 0.5 * (a[0] + an[0]);
        an[0] = a[0] - dt * mid;
    }
    CHECK(an[0] == doctest::Approx(0.905).epsilon(1e-15));
}

TEST_CASE("identity-basis reduced model reproduces the full solver") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
    const CircleGeometry geom{{0.0, 0.0}, 0.15};
    const SurrogateDomain s = classify(mesh, geom);
    FomConfig config = small_cylinder_config();
    config.t_end = 50 * 0.002;
    config.sample_stride = 10;

    const Trajectory fom_traj = run_fom(mesh, s, config);

    const int n_h = 3 * mesh.n_nodes();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n_h, n_h);
    const RomOperator op = build_rom(eye, mesh, &geom, config);
    const RomTrajectory rom_traj = run_rom(op, config.t_end, 0.002, 10);

    REQUIRE(!rom_traj.failed);
    REQUIRE(rom_traj.states.size() == fom_traj.states.size());
    double max_diff = 0.0;
    for (size_t k = 0; k < fom_traj.states.size(); ++k)
        for (size_t i = 0; i < fom_traj.states[k].size(); ++i)
            max_diff = std::max(max_diff,
                                std::abs(fom_traj.states[k][i] - rom_traj.states[k][i]));
    CHECK(max_diff < 1e-10);
}

TEST_CASE("steady flow inside the span stays constant") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
    const FomConfig config = small_cylinder_config();
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);
    const StateVector u0 = initial_state(mesh, s, config);
    const int n_h = 3 * mesh.n_nodes();

    // single-mode basis spanned by the steady state itself
    Eigen::MatrixXd phi(n_h, 1);
    phi.col(0) = Eigen::Map<const Eigen::VectorXd>(u0.data(), n_h);
    phi.col(0).normalize();

    const RomOperator op = build_rom(phi, mesh, nullptr, config);
    const RomTrajectory traj = run_rom(op, 50 * 0.002, 0.002, 10);
    REQUIRE(!traj.failed);
    const Eigen::VectorXd a0 = op.initial_coeffs(u0);
    for (const Eigen::VectorXd& a : traj.coeffs)
        CHECK(std::abs(a[0] - a0[0]) < 1e-9 * std::abs(a0[0]));
}

TEST_CASE("reduced trajectories report blowups instead of throwing") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.15);
    FomConfig config = small_cylinder_config();
    const int n_h = 3 * mesh.n_nodes();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n_h, 1);
    phi.col(0) = Eigen::VectorXd::LinSpaced(n_h, 0.3, 1.0).normalized();
    const RomOperator op = build_rom(phi, mesh, nullptr, config);
    const RomTrajectory traj = run_rom(op, 1e13, 1e12, 1);
    CHECK(traj.failed);
    CHECK(traj.failure_step >= 1);
}

TEST_CASE("reduced energy consistency: orthonormal basis preserves norms") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
    const CircleGeometry geom{{0.0, 0.0}, 0.12};
    const SurrogateDomain s = classify(mesh, geom);
    FomConfig config = small_cylinder_config();
    config.t_end = 20 * 0.002;
    config.sample_stride = 4;
    const Trajectory fom_traj = run_fom(mesh, s, config);

    // orthonormal basis from the run's own snapshots
    Eigen::MatrixXd snaps(3 * mesh.n_nodes(), fom_traj.states.size());
    for (size_t k = 0; k < fom_traj.states.size(); ++k)
        snaps.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(
            fom_traj.states[k].data(), snaps.rows());
    const PodBasis basis = compute_modes(snaps);

    const RomOperator op = build_rom(basis.modes, mesh, &geom, config);
    const RomTrajectory traj = run_rom(op, config.t_end, 0.002, 4);
    REQUIRE(!traj.failed);
    for (size_t k = 0; k < traj.coeffs.size(); ++k) {
        const Eigen::Map<const Eigen::VectorXd> u(traj.states[k].data(),
                                                  static_cast<Eigen::Index>(traj.states[k].size()));
        CHECK(u.norm() == doctest::Approx(traj.coeffs[k].norm()).epsilon(1e-10));
    }
}

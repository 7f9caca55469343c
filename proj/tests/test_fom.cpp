#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "sbmrom/embedded.hpp"
#include "sbmrom/errors.hpp"
#include "sbmrom/fom.hpp"
#include "sbmrom/mesh.hpp"

using namespace sbmrom;

namespace {

FomConfig uniform_flow_config() {
    FomConfig c;
    c.h0 = 0.2;
    c.v0 = {0.1, 0.0};
    c.boundary.inflow = -0.02;
    c.boundary.outflow = 0.02;
    return c;
}

FomConfig rest_config() {
    FomConfig c;
    c.h0 = 0.2;
    c.v0 = {0.0, 0.0};
    c.boundary.inflow = 0.0;
    c.boundary.outflow = 0.0;
    return c;
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Gauss-Legendre nodes/weights on [0,1], 8 points.
struct Gauss1d {
    double x[8];
    double w[8];
    Gauss1d() {
        const double xs[4] = {0.1834346424956498, 0.5255324099163290,
                              0.7966664774136267, 0.9602898564975363};
        const double ws[4] = {0.3626837833783620, 0.3137066458778873,
                              0.2223810344533745, 0.1012285362903763};
        for (int i = 0; i < 4; ++i) {
            x[2 * i] = 0.5 * (1.0 - xs[i]);
            x[2 * i + 1] = 0.5 * (1.0 + xs[i]);
            w[2 * i] = 0.5 * ws[i];
            w[2 * i + 1] = 0.5 * ws[i];
        }
    }
};

// High-order volume quadrature of the Galerkin flux term on one element via a
// Duffy-transformed tensor rule; independent of the assembly code path.
void oracle_volume_flux(const TriMesh& mesh, int e, const StateVector& state, double g,
                        double contrib[3][3]) {
    static const Gauss1d gauss;
    const int nn = mesh.n_nodes();
    const auto& el = mesh.element(e);
    const ElementGeometry& geo = mesh.geometry(e);

    for (int a = 0; a < 3; ++a)
        for (int m = 0; m < 3; ++m) contrib[a][m] = 0.0;

    for (int iu = 0; iu < 8; ++iu) {
        for (int iv = 0; iv < 8; ++iv) {
            const double u = gauss.x[iu];
            const double v = gauss.x[iv] * (1.0 - u);
            const double jac = (1.0 - u); // Duffy factor
            const double wq = gauss.w[iu] * gauss.w[iv] * jac * 2.0 * geo.area;
            const double l0 = 1.0 - u - v, l1 = u, l2 = v;
            ConsState uq{l0 * state[el[0]] + l1 * state[el[1]] + l2 * state[el[2]],
                         l0 * state[nn + el[0]] + l1 * state[nn + el[1]] +
                             l2 * state[nn + el[2]],
                         l0 * state[2 * nn + el[0]] + l1 * state[2 * nn + el[1]] +
                             l2 * state[2 * nn + el[2]]};
            const FluxTensor f = flux(uq, g);
            for (int a = 0; a < 3; ++a)
                for (int m = 0; m < 3; ++m)
                    contrib[a][m] -=
                        wq * (geo.grad[a].x * f.fx[m] + geo.grad[a].y * f.fy[m]);
        }
    }
}

} // namespace

TEST_CASE("lumped mass")
{
    SUBCASE("single active right triangle contributes area/3 per node") {
        std::vector<Vec2> nodes{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
        std::vector<std::array<int, 3>> elems{{0, 1, 2}};
        std::vector<BoundaryEdge> bedges{{0, 1, BoundaryTag::Bottom},
                                         {1, 2, BoundaryTag::Right},
                                         {2, 0, BoundaryTag::Left}};
        const TriMesh mesh(nodes, elems, bedges);
        const SurrogateDomain s = SurrogateDomain::all_active(mesh);
        const std::vector<double> m = lumped_mass(mesh, s);
        for (int a = 0; a < 3; ++a) {
            CHECK(m[a] == doctest::Approx(1.0 / 6.0));
            CHECK(m[3 + a] == doctest::Approx(1.0 / 6.0));
            CHECK(m[6 + a] == doctest::Approx(1.0 / 6.0));
        }
    }
    SUBCASE("interior node of a structured mesh accumulates its element fan") {
        const TriMesh mesh = generate_channel_mesh(0.0, 1.0, 0.0, 1.0, 0.25);
        const SurrogateDomain s = SurrogateDomain::all_active(mesh);
        const std::vector<double> m = lumped_mass(mesh, s);
        // each cell has area 1/32 per triangle; an interior node touches 6 triangles
        double total = 0.0;
        for (int a = 0; a < mesh.n_nodes(); ++a) total += m[a];
        CHECK(total == doctest::Approx(1.0)); // masses partition the area
    }
    SUBCASE("inactive nodes are pinned with unit mass") {
        const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.05);
        const SurrogateDomain s = classify(mesh, {{0.0, 0.0}, 0.15});
        const std::vector<double> m = lumped_mass(mesh, s);
        int n_pinned = 0;
        for (int a = 0; a < mesh.n_nodes(); ++a) {
            if (!s.node_is_active(a)) {
                CHECK(m[a] == 1.0);
                ++n_pinned;
            } else {
                CHECK(m[a] > 0.0);
            }
        }
        CHECK(n_pinned > 0);
    }
}

TEST_CASE("uniform channel flow has an exactly zero residual") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.05);
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);
    const FomConfig config = uniform_flow_config();
    const StateVector u = initial_state(mesh, s, config);
    const StateVector r = assemble_residual(u, mesh, s, config, 0.002);
    double rmax = 0.0;
    for (double v : r) rmax = std::max(rmax, std::abs(v));
    CHECK(rmax < 1e-12);
}

TEST_CASE("lake at rest with an embedded cylinder has a zero residual") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.05);
    const SurrogateDomain s = classify(mesh, {{0.0, 0.0}, 0.15});
    const FomConfig config = rest_config();
    const StateVector u = initial_state(mesh, s, config);
    const StateVector r = assemble_residual(u, mesh, s, config, 0.002);
    double rmax = 0.0;
    for (double v : r) rmax = std::max(rmax, std::abs(v));
    CHECK(rmax < 1e-12);
}

TEST_CASE("volume flux matches a high-order quadrature oracle") {
    // height kept constant so the flux is polynomial and the midpoint rule
    // integrates it exactly
    const TriMesh mesh = generate_channel_mesh(0.0, 1.0, 0.0, 1.0, 0.5);
    const int nn = mesh.n_nodes();
    StateVector state(3 * nn, 0.0);
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> qdist(-0.05, 0.05);
    for (int a = 0; a < nn; ++a) {
        state[a] = 0.2;
        state[nn + a] = qdist(rng);
        state[2 * nn + a] = qdist(rng);
    }
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);

    // assemble with boundary and stabilization switched off by zero tags:
    // compare the pure volume part via a config with c_vms = 0 against the
    // oracle applied to every element plus the boundary-term oracle
    FomConfig config = uniform_flow_config();
    config.c_vms = 0.0;
    const double g = config.physics.g;

    StateVector expected(3 * nn, 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        double contrib[3][3];
        oracle_volume_flux(mesh, e, state, g, contrib);
        const auto& el = mesh.element(e);
        for (int a = 0; a < 3; ++a)
            for (int m = 0; m < 3; ++m) expected[m * nn + el[a]] += contrib[a][m];
    }
    // boundary fluxes, 32-point Gauss per edge via repeated two-point panels
    for (int k = 0; k < mesh.n_boundary_edges(); ++k) {
        const BoundaryEdge& be = mesh.boundary_edge(k);
        const Vec2 pa = mesh.node(be.a);
        const Vec2 pb = mesh.node(be.b);
        const double len = norm(pb - pa);
        Vec2 n = perp(pb - pa) / len;
        const auto& el = mesh.element(mesh.boundary_edge_element(k));
        const Vec2 centroid = (mesh.node(el[0]) + mesh.node(el[1]) + mesh.node(el[2])) / 3.0;
        if (dot(n, centroid - (pa + pb) * 0.5) > 0.0) n = n * -1.0;
        const int panels = 16;
        for (int pnl = 0; pnl < panels; ++pnl) {
            for (int q = 0; q < 2; ++q) {
                const double xi = (pnl + 0.5 + (q == 0 ? -0.5 : 0.5) / std::sqrt(3.0)) /
                                  panels;
                const double wq = len / (2.0 * panels);
                const double wa = 1.0 - xi, wb = xi;
                const ConsState uq{wa * state[be.a] + wb * state[be.b],
                                   wa * state[nn + be.a] + wb * state[nn + be.b],
                                   wa * state[2 * nn + be.a] + wb * state[2 * nn + be.b]};
                const double v1 = uq.q1 / uq.h, v2 = uq.q2 / uq.h;
                const double p = 0.5 * g * uq.h * uq.h;
                Vec3 hb{};
                switch (be.tag) {
                    case BoundaryTag::Top:
                    case BoundaryTag::Bottom:
                        hb = {0.0, p * n.x, p * n.y};
                        break;
                    case BoundaryTag::Left: {
                        const double vn = v1 * n.x + v2 * n.y;
                        hb = {config.boundary.inflow,
                              config.boundary.inflow * vn * n.x + p * n.x,
                              config.boundary.inflow * vn * n.y + p * n.y};
                        break;
                    }
                    case BoundaryTag::Right:
                        hb = {config.boundary.outflow, config.boundary.outflow * v1 + p * n.x,
                              config.boundary.outflow * v2 + p * n.y};
                        break;
                }
                expected[be.a] += wq * wa * hb[0];
                expected[nn + be.a] += wq * wa * hb[1];
                expected[2 * nn + be.a] += wq * wa * hb[2];
                expected[be.b] += wq * wb * hb[0];
                expected[nn + be.b] += wq * wb * hb[1];
                expected[2 * nn + be.b] += wq * wb * hb[2];
            }
        }
    }

    const StateVector r = assemble_residual(state, mesh, s, config, 0.002);
    for (size_t i = 0; i < r.size(); ++i) CHECK(std::abs(r[i] - expected[i]) < 1e-10);
}

TEST_CASE("compute_dt reproduces the hand value on the paper mesh") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.02);
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);
    const FomConfig config = uniform_flow_config();
    const StateVector u = initial_state(mesh, s, config);

    const double dt = compute_dt(u, mesh, s, 0.5, config.physics);
    CHECK(dt == doctest::Approx(1.9517e-3).epsilon(1e-3));
    CHECK(compute_dt(u, mesh, s, 1.0, config.physics) == doctest::Approx(2.0 * dt));

    StateVector fast = u;
    const int nn = mesh.n_nodes();
    for (int a = 0; a < nn; ++a) fast[nn + a] = 0.2 * 0.3; // triple the velocity
    CHECK(compute_dt(fast, mesh, s, 0.5, config.physics) < dt);
}

TEST_CASE("pmc_update equivalences") {
    SUBCASE("n_pmc = 1 is bitwise forward Euler") {
        const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
        const SurrogateDomain s = classify(mesh, {{0.0, 0.0}, 0.15});
        FomConfig config = uniform_flow_config();
        // perturb so the residual is nonzero
        StateVector u = initial_state(mesh, s, config);
        const int nn = mesh.n_nodes();
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> d(-1e-3, 1e-3);
        for (int a = 0; a < nn; ++a)
            if (s.node_is_active(a)) u[a] += d(rng);

        const std::vector<double> mass = lumped_mass(mesh, s);
        const double dt = 0.002;
        const StateVector stepped = pmc_step(u, dt, 1, mesh, s, config, mass);
        const StateVector r = assemble_residual(u, mesh, s, config, dt);
        for (size_t i = 0; i < u.size(); ++i) {
            const double euler = u[i] - dt * r[i] / mass[i];
            CHECK(stepped[i] == euler);
        }
    }
    SUBCASE("scalar linear decay: hand-iterated correctors") {
        const StateVector u0{1.0};
        const std::vector<double> mass{1.0};
        auto residual = [](const StateVector& u) { return StateVector{u[0]}; };
        const StateVector one = pmc_update(u0, 0.1, 1, mass, residual);
        CHECK(one[0] == doctest::Approx(0.9).epsilon(1e-15));
        const StateVector two = pmc_update(u0, 0.1, 2, mass, residual);
        CHECK(two[0] == doctest::Approx(0.905).epsilon(1e-15));
        // classical explicit midpoint on u' = -u
        const double rk2 = 1.0 - 0.1 * (1.0 - 0.05);
        CHECK(std::abs(two[0] - rk2) < 1e-14);
    }
    SUBCASE("zero residual is a fixed point for any corrector count") {
        const StateVector u0{0.3, -0.7};
        const std::vector<double> mass{2.0, 5.0};
        auto residual = [](const StateVector& u) { return StateVector(u.size(), 0.0); };
        for (int n : {1, 2, 4}) {
            const StateVector out = pmc_update(u0, 0.25, n, mass, residual);
            CHECK(out[0] == u0[0]);
            CHECK(out[1] == u0[1]);
        }
    }
}

TEST_CASE("steady states are preserved over 100 steps") {
    SUBCASE("uniform channel flow") {
        const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
        const SurrogateDomain s = SurrogateDomain::all_active(mesh);
        FomConfig config = uniform_flow_config();
        config.fixed_dt = 0.002;
        config.t_end = 100 * 0.002;
        const Trajectory traj = run_fom(mesh, s, config);
        CHECK(traj.n_steps == 100);
        CHECK(max_abs_diff(traj.states.back(), initial_state(mesh, s, config)) < 1e-10);
    }
    SUBCASE("lake at rest with the cylinder") {
        const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
        const SurrogateDomain s = classify(mesh, {{0.0, 0.0}, 0.15});
        FomConfig config = rest_config();
        config.fixed_dt = 0.002;
        config.t_end = 100 * 0.002;
        const Trajectory traj = run_fom(mesh, s, config);
        CHECK(max_abs_diff(traj.states.back(), initial_state(mesh, s, config)) < 1e-10);
    }
    SUBCASE("the VMS time-derivative variant preserves them too") {
        const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
        const SurrogateDomain s = SurrogateDomain::all_active(mesh);
        FomConfig config = uniform_flow_config();
        config.vms_time_term = true;
        config.fixed_dt = 0.002;
        config.t_end = 50 * 0.002;
        const Trajectory traj = run_fom(mesh, s, config);
        CHECK(max_abs_diff(traj.states.back(), initial_state(mesh, s, config)) < 1e-10);
    }
}

TEST_CASE("snapshot sampling picks strides plus the final step once") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.15);
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);
    FomConfig config = uniform_flow_config();
    config.fixed_dt = 0.002;
    config.sample_stride = 2;

    SUBCASE("five steps -> samples at 2, 4, 5") {
        config.t_end = 5 * 0.002;
        const Trajectory traj = run_fom(mesh, s, config);
        REQUIRE(traj.steps.size() == 3);
        CHECK(traj.steps[0] == 2);
        CHECK(traj.steps[1] == 4);
        CHECK(traj.steps[2] == 5);
    }
    SUBCASE("final step on the stride is not duplicated") {
        config.t_end = 4 * 0.002;
        const Trajectory traj = run_fom(mesh, s, config);
        REQUIRE(traj.steps.size() == 2);
        CHECK(traj.steps[0] == 2);
        CHECK(traj.steps[1] == 4);
    }
}

TEST_CASE("discrete mass balance in the body-fitted channel") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);
    FomConfig config = uniform_flow_config();
    config.c_vms = 0.0;
    config.boundary.inflow = -0.03; // deliberately unbalanced
    const double net_rate = (0.03 - 0.02) * 0.6; // (inflow - outflow) * boundary length

    const std::vector<double> mass = lumped_mass(mesh, s);
    StateVector u = initial_state(mesh, s, config);
    const int nn = mesh.n_nodes();
    const double dt = 0.002;
    for (int step = 0; step < 5; ++step) {
        const StateVector next = pmc_step(u, dt, 2, mesh, s, config, mass);
        double dm = 0.0;
        for (int a = 0; a < nn; ++a) dm += mass[a] * (next[a] - u[a]);
        CHECK(std::abs(dm / dt - net_rate) < 1e-8);
        u = next;
    }
}

TEST_CASE("mirror symmetry of the marched solution") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.05);
    const SurrogateDomain s = classify(mesh, {{0.0, 0.0}, 0.13});
    FomConfig config = uniform_flow_config();
    config.fixed_dt = 0.002;
    config.t_end = 20 * 0.002;
    config.sample_stride = 5;
    const Trajectory traj = run_fom(mesh, s, config);

    std::map<std::pair<double, double>, int> lookup;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        lookup[{mesh.node(i).x, mesh.node(i).y}] = i;
    const int nn = mesh.n_nodes();
    for (const StateVector& u : traj.states) {
        for (int a = 0; a < nn; ++a) {
            const int b = lookup.at({mesh.node(a).x, -mesh.node(a).y});
            CHECK(std::abs(u[a] - u[b]) < 1e-9);
            CHECK(std::abs(u[nn + a] - u[nn + b]) < 1e-9);
            CHECK(std::abs(u[2 * nn + a] + u[2 * nn + b]) < 1e-9);
        }
    }
}

TEST_CASE("two runs with identical configuration are bitwise identical") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
    const SurrogateDomain s = classify(mesh, {{0.1, 0.0}, 0.12});
    FomConfig config = uniform_flow_config();
    config.t_end = 0.05;
    const Trajectory t1 = run_fom(mesh, s, config);
    const Trajectory t2 = run_fom(mesh, s, config);
    REQUIRE(t1.states.size() == t2.states.size());
    for (size_t k = 0; k < t1.states.size(); ++k)
        CHECK(max_abs_diff(t1.states[k], t2.states[k]) == 0.0);
}

TEST_CASE("a wildly unstable step raises NumericalBlowup") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.15);
    const SurrogateDomain s = SurrogateDomain::all_active(mesh);
    FomConfig config = uniform_flow_config();
    config.fixed_dt = 1e12;
    config.t_end = 1e13;
    CHECK_THROWS_AS(run_fom(mesh, s, config), NumericalBlowup);
}

TEST_CASE("inactive rows stay exactly zero along the march") {
    const TriMesh mesh = generate_channel_mesh(-1.5, 1.5, -0.3, 0.3, 0.1);
    const SurrogateDomain s = classify(mesh, {{0.0, 0.0}, 0.15});
    FomConfig config = uniform_flow_config();
    config.t_end = 0.05;
    const Trajectory traj = run_fom(mesh, s, config);
    const int nn = mesh.n_nodes();
    for (const StateVector& u : traj.states)
        for (int a = 0; a < nn; ++a)
            if (!s.node_is_active(a)) {
                CHECK(u[a] == 0.0);
                CHECK(u[nn + a] == 0.0);
                CHECK(u[2 * nn + a] == 0.0);
            }
}

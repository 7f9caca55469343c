#include "sbmrom/fom.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sbmrom/errors.hpp"

namespace sbmrom {

namespace {

constexpr double kGauss = 0.5773502691896257645; // 1/sqrt(3)

struct NodalState {
    ConsState u;
    double v1, v2;
};

inline NodalState read_node(const StateVector& s, int n_node, int a, double h_min,
                            ClampStats* stats) {
    ConsState u{s[a], s[n_node + a], s[2 * n_node + a]};
    u = clamp_state(u, h_min, stats);
    return {u, u.q1 / u.h, u.q2 / u.h};
}

// Boundary flux vectors of the body-fitted weak form.
inline Vec3 boundary_flux(BoundaryTag tag, const ConsState& u, double v1, double v2,
                          const Vec2& n, const BoundaryData& bc, double g) {
    const double p = 0.5 * g * u.h * u.h;
    switch (tag) {
        case BoundaryTag::Top:
        case BoundaryTag::Bottom: {
            const double vn = bc.v_n;
            return {vn * u.h, vn * u.q1 + p * n.x, vn * u.q2 + p * n.y};
        }
        case BoundaryTag::Left: {
            const double vdotn = v1 * n.x + v2 * n.y;
            return {bc.inflow, bc.inflow * vdotn * n.x + p * n.x,
                    bc.inflow * vdotn * n.y + p * n.y};
        }
        case BoundaryTag::Right:
            return {bc.outflow, bc.outflow * v1 + p * n.x, bc.outflow * v2 + p * n.y};
    }
    return {0.0, 0.0, 0.0};
}

} // namespace

std::vector<double> lumped_mass(const TriMesh& mesh, const SurrogateDomain& surrogate) {
    const int nn = mesh.n_nodes();
    std::vector<double> mass(3 * nn, 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!surrogate.element_is_active(e)) continue;
        const double third = mesh.geometry(e).area / 3.0;
        for (int v : mesh.element(e)) mass[v] += third;
    }
    for (int a = 0; a < nn; ++a) {
        if (!surrogate.node_is_active(a)) mass[a] = 1.0;
        mass[nn + a] = mass[a];
        mass[2 * nn + a] = mass[a];
    }
    return mass;
}

StateVector initial_state(const TriMesh& mesh, const SurrogateDomain& surrogate,
                          const FomConfig& config) {
    const int nn = mesh.n_nodes();
    StateVector s(3 * nn, 0.0);
    for (int a = 0; a < nn; ++a) {
        if (!surrogate.node_is_active(a)) continue;
        s[a] = config.h0;
        s[nn + a] = config.h0 * config.v0.x;
        s[2 * nn + a] = config.h0 * config.v0.y;
    }
    return s;
}

StateVector assemble_residual(const StateVector& state, const TriMesh& mesh,
                              const SurrogateDomain& surrogate, const FomConfig& config,
                              double dt, AssemblyStats* stats,
                              const StateVector* state_prev) {
    const int nn = mesh.n_nodes();
    if (static_cast<int>(state.size()) != 3 * nn)
        throw ShapeError("state size does not match the mesh");

    const double g = config.physics.g;
    const double h_min = config.physics.h_min;
    const double tau_vms = 0.5 * config.c_vms * dt;
    const bool with_source =
        config.physics.manning > 0.0 || config.physics.grad_z.x != 0.0 ||
        config.physics.grad_z.y != 0.0;

    ClampStats clamp;
    StateVector res(3 * nn, 0.0);
    auto add = [&](int a, const Vec3& v, double w) {
        res[a] += w * v[0];
        res[nn + a] += w * v[1];
        res[2 * nn + a] += w * v[2];
    };

    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!surrogate.element_is_active(e)) continue;
        const auto& el = mesh.element(e);
        const ElementGeometry& geo = mesh.geometry(e);
        const NodalState ns[3] = {read_node(state, nn, el[0], h_min, &clamp),
                                  read_node(state, nn, el[1], h_min, &clamp),
                                  read_node(state, nn, el[2], h_min, &clamp)};

        // Galerkin flux: midpoint-of-edges rule, exact for quadratic integrands.
        Vec3 fx_sum{}, fy_sum{};
        Vec3 z_mid[3];
        for (int q = 0; q < 3; ++q) {
            const NodalState& sa = ns[q];
            const NodalState& sb = ns[(q + 1) % 3];
            ConsState um{0.5 * (sa.u.h + sb.u.h), 0.5 * (sa.u.q1 + sb.u.q1),
                         0.5 * (sa.u.q2 + sb.u.q2)};
            um = clamp_state(um, h_min, &clamp);
            const FluxTensor f = flux(um, g);
            for (int m = 0; m < 3; ++m) {
                fx_sum[m] += f.fx[m];
                fy_sum[m] += f.fy[m];
            }
            if (with_source) z_mid[q] = source(um, config.physics);
        }
        const double third = geo.area / 3.0;
        for (int a = 0; a < 3; ++a) {
            const Vec2 gr = geo.grad[a];
            for (int m = 0; m < 3; ++m)
                res[m * nn + el[a]] -= third * (gr.x * fx_sum[m] + gr.y * fy_sum[m]);
        }
        if (with_source) {
            // N_a is 1/2 at the two midpoints of the edges meeting at node a.
            for (int a = 0; a < 3; ++a) {
                const Vec3& za = z_mid[a];
                const Vec3& zc = z_mid[(a + 2) % 3];
                for (int m = 0; m < 3; ++m)
                    res[m * nn + el[a]] -= third * 0.5 * (za[m] + zc[m]);
            }
        }

        // VMS stabilization with element-constant Jacobians at the mean state.
        ConsState ubar{(ns[0].u.h + ns[1].u.h + ns[2].u.h) / 3.0,
                       (ns[0].u.q1 + ns[1].u.q1 + ns[2].u.q1) / 3.0,
                       (ns[0].u.q2 + ns[1].u.q2 + ns[2].u.q2) / 3.0};
        ubar = clamp_state(ubar, h_min, &clamp);
        Mat3 a1, a2;
        jacobians(ubar, g, a1, a2);
        Vec3 ux{}, uy{};
        for (int a = 0; a < 3; ++a) {
            const Vec2 gr = geo.grad[a];
            ux[0] += ns[a].u.h * gr.x;
            ux[1] += ns[a].u.q1 * gr.x;
            ux[2] += ns[a].u.q2 * gr.x;
            uy[0] += ns[a].u.h * gr.y;
            uy[1] += ns[a].u.q1 * gr.y;
            uy[2] += ns[a].u.q2 * gr.y;
        }
        const Vec3 lu1 = mat_vec(a1, ux);
        const Vec3 lu2 = mat_vec(a2, uy);
        Vec3 strong{lu1[0] + lu2[0], lu1[1] + lu2[1], lu1[2] + lu2[2]};
        if (with_source) {
            const Vec3 zbar = source(ubar, config.physics);
            for (int m = 0; m < 3; ++m) strong[m] -= zbar[m];
        }
        if (config.vms_time_term && state_prev) {
            // state is the PMC midpoint (U^n + U^(k))/2, so the corrector's
            // time derivative estimate is 2 (U_mid - U^n) / dt.
            const double c = 2.0 / dt;
            for (int a = 0; a < 3; ++a) {
                const int v = el[a];
                strong[0] += c * (state[v] - (*state_prev)[v]) / 3.0;
                strong[1] += c * (state[nn + v] - (*state_prev)[nn + v]) / 3.0;
                strong[2] += c * (state[2 * nn + v] - (*state_prev)[2 * nn + v]) / 3.0;
            }
        }
        const Vec3 w = mat_vec(a0_inverse(ubar), strong);
        const Vec3 tw{tau_vms * w[0], tau_vms * w[1], tau_vms * w[2]};
        const Vec3 a1w = mat_vec(a1, tw);
        const Vec3 a2w = mat_vec(a2, tw);
        for (int a = 0; a < 3; ++a) {
            const Vec2 gr = geo.grad[a];
            for (int m = 0; m < 3; ++m)
                res[m * nn + el[a]] += geo.area * (gr.x * a1w[m] + gr.y * a2w[m]);
        }
    }

    // Body-fitted boundary terms, two-point Gauss per edge.
    for (int k = 0; k < mesh.n_boundary_edges(); ++k) {
        const BoundaryEdge& be = mesh.boundary_edge(k);
        const int elem = mesh.boundary_edge_element(k);
        if (!surrogate.element_is_active(elem)) continue;
        const Vec2 pa = mesh.node(be.a);
        const Vec2 pb = mesh.node(be.b);
        const double len = norm(pb - pa);
        Vec2 n = perp(pb - pa) / len;
        const auto& el = mesh.element(elem);
        const Vec2 centroid = (mesh.node(el[0]) + mesh.node(el[1]) + mesh.node(el[2])) / 3.0;
        if (dot(n, centroid - (pa + pb) * 0.5) > 0.0) n = n * -1.0;

        const NodalState sa = read_node(state, nn, be.a, h_min, &clamp);
        const NodalState sb = read_node(state, nn, be.b, h_min, &clamp);
        const double s[2] = {-kGauss, kGauss};
        for (int q = 0; q < 2; ++q) {
            const double wa = 0.5 * (1.0 - s[q]);
            const double wb = 0.5 * (1.0 + s[q]);
            ConsState u{wa * sa.u.h + wb * sb.u.h, wa * sa.u.q1 + wb * sb.u.q1,
                        wa * sa.u.q2 + wb * sb.u.q2};
            u = clamp_state(u, h_min, &clamp);
            const double v1 = u.q1 / u.h;
            const double v2 = u.q2 / u.h;
            const Vec3 hflux = boundary_flux(be.tag, u, v1, v2, n, config.boundary, g);
            const double w = 0.5 * len;
            add(be.a, hflux, w * wa);
            add(be.b, hflux, w * wb);
        }
    }

    // Shifted Neumann flux on the surrogate boundary.
    for (const SurrogateEdge& se : surrogate.surrogate_edges()) {
        const auto& el = mesh.element(se.element);
        const ElementGeometry& geo = mesh.geometry(se.element);
        const NodalState ns[3] = {read_node(state, nn, el[0], h_min, &clamp),
                                  read_node(state, nn, el[1], h_min, &clamp),
                                  read_node(state, nn, el[2], h_min, &clamp)};
        // Element-constant gradient of the nodal primitive velocity.
        double dv[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (int a = 0; a < 3; ++a) {
            const Vec2 gr = geo.grad[a];
            dv[0][0] += ns[a].v1 * gr.x;
            dv[0][1] += ns[a].v1 * gr.y;
            dv[1][0] += ns[a].v2 * gr.x;
            dv[1][1] += ns[a].v2 * gr.y;
        }

        const NodalState sa = read_node(state, nn, se.a, h_min, &clamp);
        const NodalState sb = read_node(state, nn, se.b, h_min, &clamp);
        for (const SurrogatePoint& p : se.pts) {
            ConsState u{p.shape_a * sa.u.h + p.shape_b * sb.u.h,
                        p.shape_a * sa.u.q1 + p.shape_b * sb.u.q1,
                        p.shape_a * sa.u.q2 + p.shape_b * sb.u.q2};
            u = clamp_state(u, h_min, &clamp);
            const double v1 = u.q1 / u.h;
            const double v2 = u.q2 / u.h;
            const double ndvd = p.n.x * (dv[0][0] * p.d.x + dv[0][1] * p.d.y) +
                                p.n.y * (dv[1][0] * p.d.x + dv[1][1] * p.d.y);
            const double vtau = v1 * p.tau.x + v2 * p.tau.y;
            const double coef = (config.boundary.v_n - ndvd) * dot(p.n, se.n_tilde) +
                                vtau * dot(p.tau, se.n_tilde);
            const double pr = 0.5 * g * u.h * u.h;
            const Vec3 hflux{coef * u.h, coef * u.q1 + pr * se.n_tilde.x,
                             coef * u.q2 + pr * se.n_tilde.y};
            add(se.a, hflux, p.weight * p.shape_a);
            add(se.b, hflux, p.weight * p.shape_b);
        }
    }

    for (int a = 0; a < nn; ++a) {
        if (surrogate.node_is_active(a)) continue;
        res[a] = 0.0;
        res[nn + a] = 0.0;
        res[2 * nn + a] = 0.0;
    }

    for (double v : res)
        if (!std::isfinite(v)) throw NumericalBlowup("non-finite residual entry");

    if (stats) stats->clamped += clamp.clamped;
    return res;
}

double compute_dt(const StateVector& state, const TriMesh& mesh,
                  const SurrogateDomain& surrogate, double cfl, const PhysicsParams& physics) {
    const int nn = mesh.n_nodes();
    double dt = std::numeric_limits<double>::infinity();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!surrogate.element_is_active(e)) continue;
        const auto& el = mesh.element(e);
        const Vec2 p0 = mesh.node(el[0]);
        const Vec2 p1 = mesh.node(el[1]);
        const Vec2 p2 = mesh.node(el[2]);
        const double perimeter = norm(p1 - p0) + norm(p2 - p1) + norm(p0 - p2);
        const double inradius = 2.0 * mesh.geometry(e).area / perimeter;
        if (!(inradius > 0.0)) throw InvalidMesh("element with zero inradius");
        double speed = 0.0;
        for (int v : el) {
            const ConsState u = clamp_state(
                {state[v], state[nn + v], state[2 * nn + v]}, physics.h_min, nullptr);
            speed = std::max(speed, wave_speed(u, physics.g));
        }
        dt = std::min(dt, inradius / speed);
    }
    return cfl * dt;
}

StateVector pmc_update(const StateVector& state, double dt, int n_pmc,
                       const std::vector<double>& mass,
                       const std::function<StateVector(const StateVector&)>& residual) {
    const size_t n = state.size();
    StateVector uk = state;
    StateVector mid(n);
    for (int k = 0; k < n_pmc; ++k) {
        for (size_t i = 0; i < n; ++i) mid[i] = 0.5 * (state[i] + uk[i]);
        const StateVector r = residual(mid);
        for (size_t i = 0; i < n; ++i) uk[i] = state[i] - dt * r[i] / mass[i];
    }
    return uk;
}

StateVector pmc_step(const StateVector& state, double dt, int n_pmc, const TriMesh& mesh,
                     const SurrogateDomain& surrogate, const FomConfig& config,
                     const std::vector<double>& mass, AssemblyStats* stats) {
    return pmc_update(state, dt, n_pmc, mass, [&](const StateVector& u) {
        return assemble_residual(u, mesh, surrogate, config, dt, stats,
                                 config.vms_time_term ? &state : nullptr);
    });
}

Trajectory run_fom(const TriMesh& mesh, const SurrogateDomain& surrogate,
                   const FomConfig& config) {
    if (config.n_pmc < 1) throw Error("n_pmc must be at least 1");
    if (config.sample_stride < 1) throw Error("sample stride must be at least 1");

    const auto t0 = std::chrono::steady_clock::now();
    StateVector u = initial_state(mesh, surrogate, config);
    const std::vector<double> mass = lumped_mass(mesh, surrogate);
    Trajectory traj;
    AssemblyStats stats;

    double t = 0.0;
    long long step = 0;
    const double t_end = config.t_end;
    const double eps = 1e-12 * std::max(1.0, t_end);
    while (t < t_end - eps) {
        double dt = config.fixed_dt
                        ? *config.fixed_dt
                        : compute_dt(u, mesh, surrogate, config.cfl, config.physics);
        if (t + dt > t_end) dt = t_end - t;
        StateVector next;
        try {
            next = pmc_step(u, dt, config.n_pmc, mesh, surrogate, config, mass, &stats);
        } catch (NumericalBlowup& e) {
            throw NumericalBlowup(std::string(e.what()) + " at step " +
                                      std::to_string(step + 1) + ", t=" + std::to_string(t),
                                  step + 1, t);
        }
        ++step;
        t += dt;
        if (config.log_progress) {
            double max_du = 0.0;
            for (size_t i = 0; i < u.size(); ++i)
                max_du = std::max(max_du, std::abs(next[i] - u[i]));
            std::printf("step=%lld t=%.6f dt=%.6e max|dU|=%.3e\n", step, t, dt, max_du);
        }
        u = std::move(next);
        if (step % config.sample_stride == 0) {
            traj.steps.push_back(step);
            traj.times.push_back(t);
            traj.states.push_back(u);
        }
    }
    if (traj.steps.empty() || traj.steps.back() != step) {
        traj.steps.push_back(step);
        traj.times.push_back(t);
        traj.states.push_back(u);
    }
    traj.n_steps = step;
    traj.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return traj;
}

} // namespace sbmrom

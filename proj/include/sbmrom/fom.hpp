#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sbmrom/embedded.hpp"
#include "sbmrom/mesh.hpp"
#include "sbmrom/swe.hpp"

namespace sbmrom {

// Flat nodal state of length 3*n_node, blocked as [h | hv1 | hv2].
using StateVector = std::vector<double>;

struct BoundaryData {
    double v_n = 0.0;      // wall normal velocity (Top/Bottom)
    double inflow = -0.02; // prescribed mass flux on Left edges, m_I < 0
    double outflow = 0.02; // prescribed mass flux on Right edges, m_O > 0
};

struct FomConfig {
    double cfl = 0.5;
    std::optional<double> fixed_dt; // when set, overrides CFL stepping
    double c_vms = 2.0;
    int n_pmc = 2;
    int sample_stride = 1; // snapshot sampling frequency n_freq
    double t_end = 0.8;
    BoundaryData boundary;
    double h0 = 0.2;
    Vec2 v0{0.1, 0.0};
    PhysicsParams physics;
    // Include a discrete time-derivative estimate in the stabilization
    // residual during corrector passes. Off by default.
    bool vms_time_term = false;
    bool log_progress = false;
};

struct AssemblyStats {
    long long clamped = 0;
};

// Diagonal lumped mass; inactive-node rows get 1 (their states are pinned).
std::vector<double> lumped_mass(const TriMesh& mesh, const SurrogateDomain& surrogate);

// Uniform initial condition applied at active nodes, zero at inactive ones.
StateVector initial_state(const TriMesh& mesh, const SurrogateDomain& surrogate,
                          const FomConfig& config);

/**
 * Spatial residual R(U) of the semi-discrete system M dU/dt + R(U) = 0:
 * Galerkin volume fluxes and sources, the VMS stabilization term, body-fitted
 * boundary fluxes (walls, subcritical inflow/outflow), and the shifted
 * Neumann flux on the surrogate boundary. Rows of inactive nodes are zero.
 * `dt` enters through tau_vms = c_vms * dt / 2. When the time-derivative
 * estimate is enabled, `state_prev` supplies U^n (the residual argument is
 * then read as the PMC midpoint state).
 */
StateVector assemble_residual(const StateVector& state, const TriMesh& mesh,
                              const SurrogateDomain& surrogate, const FomConfig& config,
                              double dt, AssemblyStats* stats = nullptr,
                              const StateVector* state_prev = nullptr);

double compute_dt(const StateVector& state, const TriMesh& mesh,
                  const SurrogateDomain& surrogate, double cfl, const PhysicsParams& physics);

// One explicit predictor/multi-corrector update with a user-supplied residual;
// the solver and the reduced model share this kernel.
StateVector pmc_update(const StateVector& state, double dt, int n_pmc,
                       const std::vector<double>& mass,
                       const std::function<StateVector(const StateVector&)>& residual);

StateVector pmc_step(const StateVector& state, double dt, int n_pmc, const TriMesh& mesh,
                     const SurrogateDomain& surrogate, const FomConfig& config,
                     const std::vector<double>& mass, AssemblyStats* stats = nullptr);

struct Trajectory {
    std::vector<double> times;
    std::vector<long long> steps;
    std::vector<StateVector> states;
    long long n_steps = 0;
    double wall_seconds = 0.0;
};

// March from the uniform initial state to t_end, recording every
// sample_stride-th step plus the final one (exactly once).
Trajectory run_fom(const TriMesh& mesh, const SurrogateDomain& surrogate,
                   const FomConfig& config);

} // namespace sbmrom

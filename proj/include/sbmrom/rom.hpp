#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbmrom/embedded.hpp"
#include "sbmrom/fom.hpp"
#include "sbmrom/mesh.hpp"

namespace sbmrom {

/**
 * Online POD-Galerkin operator: the reduced mass is assembled and factored
 * once (it does not depend on the geometry parameters), while the full-order
 * residual is reassembled on the online surrogate domain at every corrector
 * and projected onto the basis.
 */
class RomOperator {
public:
    RomOperator(Eigen::MatrixXd modes, const TriMesh& mesh, SurrogateDomain surrogate,
                FomConfig config);

    int n_modes() const { return static_cast<int>(modes_.cols()); }
    const Eigen::MatrixXd& modes() const { return modes_; }
    const TriMesh& mesh() const { return mesh_; }
    const SurrogateDomain& surrogate() const { return surrogate_; }
    const FomConfig& config() const { return config_; }
    const Eigen::MatrixXd& reduced_mass() const { return reduced_mass_; }

    // Least-squares coefficients of a full state, fitted on the online
    // active nodes (ghost entries are never data).
    Eigen::VectorXd initial_coeffs(const StateVector& full_state) const;

    // One PMC update of the reduced coefficients (Galerkin-projected residual).
    Eigen::VectorXd step(const Eigen::VectorXd& coeffs, double dt, int n_pmc) const;

    StateVector reconstruct(const Eigen::VectorXd& coeffs) const;

private:
    Eigen::MatrixXd modes_;
    const TriMesh& mesh_;
    SurrogateDomain surrogate_;
    FomConfig config_;
    std::vector<double> mass_;
    Eigen::MatrixXd reduced_mass_;
    Eigen::LLT<Eigen::MatrixXd> reduced_mass_llt_;
};

// Classifies the online geometry (pass nullptr for a body-fitted channel),
// assembles the lumped mass and factors the reduced mass.
RomOperator build_rom(Eigen::MatrixXd modes, const TriMesh& mesh,
                      const CircleGeometry* geometry, const FomConfig& config);

struct RomTrajectory {
    std::vector<double> times;
    std::vector<long long> steps;
    std::vector<Eigen::VectorXd> coeffs;
    std::vector<StateVector> states; // reconstructed at the sampled steps
    bool failed = false;
    long long failure_step = -1;
    std::string failure_reason;
};

// Marches the reduced coefficients from the projected initial state at a
// fixed step size, sampling like the comparison full-order run. A blowup is
// recorded (with the partial trajectory kept) rather than thrown.
RomTrajectory run_rom(const RomOperator& op, double t_end, double dt, int sample_stride);

} // namespace sbmrom

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbmrom/embedded.hpp"
#include "sbmrom/fom.hpp"
#include "sbmrom/mesh.hpp"
#include "sbmrom/pod.hpp"

namespace sbmrom {

// Field index within a state vector; kStacked selects all three blocks.
enum Field : int { kHeight = 0, kDischargeX = 1, kDischargeY = 2, kStacked = -1 };

// Frobenius norm over the entries at active nodes only; ghost values are
// never scored.
double frobenius_norm_active(const StateVector& state, const SurrogateDomain& surrogate,
                             int field = kStacked);

/**
 * Relative space-time Frobenius error between two sampled trajectories with
 * identical sample times, using trapezoidal weights in time and
 * active-restricted norms in space.
 */
double spacetime_error(const std::vector<double>& times,
                       const std::vector<StateVector>& ref,
                       const std::vector<StateVector>& test,
                       const SurrogateDomain& surrogate, int field);

double spacetime_error(const Trajectory& ref, const Trajectory& test,
                       const SurrogateDomain& surrogate, int field);

/**
 * Least-squares fit of states onto a basis in the active-restricted inner
 * product of the given surrogate domain. Full-space fitting would let the
 * online ghost hole (zero in solver states, smooth in interpolated bases)
 * bleed a systematic offset into the coefficients.
 */
class ActiveLeastSquares {
public:
    ActiveLeastSquares(const Eigen::MatrixXd& modes, const SurrogateDomain& surrogate);
    Eigen::VectorXd coeffs(const StateVector& state) const;

private:
    const Eigen::MatrixXd& modes_;
    std::vector<int> active_rows_;
    Eigen::MatrixXd masked_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Error of the per-sample least-squares reconstruction of the trajectory
// onto the basis, fitted and scored on the active nodes.
double projection_error(const Trajectory& traj, const Eigen::MatrixXd& modes,
                        const SurrogateDomain& surrogate, int field);

// Legacy ASCII VTK unstructured grid with SCALARS h and VECTORS velocity.
void export_vtk(const TriMesh& mesh, const StateVector& state,
                const std::filesystem::path& path, double h_min = 1e-8);

// Binary matrix container: magic "SBMROM1", u64 rows, u64 cols, then
// little-endian f64 values in column-major order. Round-trips bit exactly.
void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

void save_vector_csv(const std::vector<double>& times, const std::vector<long long>& steps,
                     const std::filesystem::path& path);

// Eigenvalue spectrum as "i,lambda,cumulative_energy".
void export_spectrum_csv(const Eigen::VectorXd& eigenvalues,
                         const std::filesystem::path& path);

} // namespace sbmrom

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sbmrom/embedded.hpp"
#include "sbmrom/fom.hpp"
#include "sbmrom/geom.hpp"

namespace sbmrom {

struct RbfOptions {
    double epsilon = 1.0; // kernel shape parameter
    double sigma = 0.0;   // smoothing; zero enforces exact interpolation
    int degree = 2;       // monomial augmentation degree
    // When set, restrict the centers to active nodes within this radius of
    // the circle center instead of using all of them.
    std::optional<double> band_radius;
};

// Second-order polyharmonic spline (eps r)^2 log(eps r), continuous at r = 0.
double rbf_kernel(double r, double epsilon);

int n_monomials(int degree);
void eval_monomials(int degree, const Vec2& x, double* out);

class RbfInterpolant {
public:
    RbfInterpolant(std::vector<Vec2> centers, Eigen::VectorXd weights,
                   Eigen::VectorXd poly_coeffs, double epsilon, int degree);

    double evaluate(const Vec2& x) const;

    const std::vector<Vec2>& centers() const { return centers_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::VectorXd& poly_coeffs() const { return poly_coeffs_; }

private:
    std::vector<Vec2> centers_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd poly_coeffs_;
    double epsilon_;
    int degree_;
};

/**
 * Factored saddle-point system
 *     [ K + sigma^2 I   P ] [w]   [d]
 *     [ P^T             0 ] [b] = [0]
 * over a fixed set of centers. The factorization depends only on the centers,
 * so one instance serves every data vector sampled on them.
 */
class RbfSystem {
public:
    RbfSystem(std::vector<Vec2> centers, const RbfOptions& options);

    RbfInterpolant solve(const Eigen::VectorXd& values) const;
    int n_centers() const { return static_cast<int>(centers_.size()); }
    const std::vector<Vec2>& centers() const { return centers_; }

private:
    std::vector<Vec2> centers_;
    RbfOptions options_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

RbfInterpolant build_interpolant(const std::vector<Vec2>& points,
                                 const std::vector<double>& values,
                                 const RbfOptions& options = {});

/**
 * Fills the inactive ("ghost") node entries of snapshots with RBF
 * interpolants built from the active-node data, one per field. The saddle
 * factorization and the ghost-node kernel rows are computed once per
 * geometry; each fill is then a back-substitution plus a mat-vec.
 */
class GhostFiller {
public:
    GhostFiller(const TriMesh& mesh, const SurrogateDomain& surrogate,
                const RbfOptions& options = {});

    // Active entries are returned unchanged bit-for-bit.
    StateVector fill(const StateVector& snapshot) const;

    int n_ghost_nodes() const { return static_cast<int>(ghost_nodes_.size()); }

private:
    int n_nodes_;
    std::vector<int> center_nodes_;
    std::vector<int> ghost_nodes_;
    std::unique_ptr<RbfSystem> system_;
    Eigen::MatrixXd ghost_kernel_; // kernel values phi(|x_g - x_c|)
    Eigen::MatrixXd ghost_poly_;   // monomials at ghost nodes
};

StateVector fill_ghost(const StateVector& snapshot, const TriMesh& mesh,
                       const SurrogateDomain& surrogate, const RbfOptions& options = {});

} // namespace sbmrom

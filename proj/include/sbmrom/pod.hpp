#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sbmrom {

struct SnapshotInfo {
    double radius = 0.0;
    double xc = 0.0;
    double time = 0.0;
};

// Column-per-snapshot store with per-column metadata.
struct SnapshotMatrix {
    Eigen::MatrixXd data; // N_h x N_s
    std::vector<SnapshotInfo> info;
    bool interpolated = false;
};

struct PodBasis {
    Eigen::MatrixXd modes;       // N_h x N_r, orthonormal columns
    Eigen::VectorXd eigenvalues; // full descending spectrum (length N_s)
    int n_modes() const { return static_cast<int>(modes.cols()); }
};

// Symmetric eigendecomposition by cyclic Jacobi rotations; eigenvalues are
// returned in descending order with the matching eigenvector columns.
void jacobi_eigh(Eigen::MatrixXd a, Eigen::VectorXd& eigenvalues,
                 Eigen::MatrixXd& eigenvectors, int max_sweeps = 64);

// Snapshot correlation matrix S^T S, accumulated symmetrically so that the
// result is bit-exactly symmetric.
Eigen::MatrixXd correlation(const Eigen::MatrixXd& snapshots);

// Method of snapshots: eigendecompose the correlation matrix and scale
// modes by 1/sqrt(lambda). Eigenvalues below 1e-12 of the largest are
// treated as numerically rank deficient and produce no mode. Each mode's
// largest-magnitude entry is made positive.
PodBasis compute_modes(const Eigen::MatrixXd& snapshots);

// Smallest n whose cumulative energy fraction reaches mu_pod, counting only
// the nonzero part of the spectrum.
int select_modes(const Eigen::VectorXd& eigenvalues, double mu_pod);

Eigen::VectorXd project(const Eigen::MatrixXd& modes, const Eigen::VectorXd& u);
Eigen::VectorXd lift(const Eigen::MatrixXd& modes, const Eigen::VectorXd& coeffs);

} // namespace sbmrom

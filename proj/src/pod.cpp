#include "sbmrom/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbmrom/errors.hpp"

namespace sbmrom {

void jacobi_eigh(Eigen::MatrixXd a, Eigen::VectorXd& eigenvalues,
                 Eigen::MatrixXd& eigenvectors, int max_sweeps) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw ShapeError("matrix must be square");
    if (n == 0) {
        eigenvalues.resize(0);
        eigenvectors.resize(0, 0);
        return;
    }
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
        return std::sqrt(2.0 * s);
    };

    const double scale = a.cwiseAbs().maxCoeff();
    const double tol = 2.5e-16 * scale * static_cast<double>(n);

    bool converged = (n < 2) || off_norm() <= tol;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = off_norm() <= tol;
    }
    if (!converged) throw EigenFailure("Jacobi iteration did not converge");

    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    eigenvalues.resize(n);
    eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        eigenvalues[k] = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
        eigenvectors.col(k) = v.col(order[static_cast<size_t>(k)]);
    }
}

Eigen::MatrixXd correlation(const Eigen::MatrixXd& snapshots) {
    const Eigen::Index ns = snapshots.cols();
    Eigen::MatrixXd c(ns, ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        for (Eigen::Index j = i; j < ns; ++j) {
            const double v = snapshots.col(i).dot(snapshots.col(j));
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

PodBasis compute_modes(const Eigen::MatrixXd& snapshots) {
    if (snapshots.cols() < 1) throw ShapeError("need at least one snapshot");
    if (!snapshots.allFinite()) throw Error("snapshot matrix has non-finite entries");

    const Eigen::MatrixXd c = correlation(snapshots);
    Eigen::VectorXd lambda;
    Eigen::MatrixXd psi;
    jacobi_eigh(c, lambda, psi);

    // PSD up to round-off; tiny negatives are noise.
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], 0.0);

    const double cutoff = 1e-12 * (lambda.size() > 0 ? lambda[0] : 0.0);
    Eigen::Index n_keep = 0;
    while (n_keep < lambda.size() && lambda[n_keep] > cutoff) ++n_keep;

    PodBasis basis;
    basis.eigenvalues = lambda;
    basis.modes.resize(snapshots.rows(), n_keep);
    for (Eigen::Index i = 0; i < n_keep; ++i) {
        basis.modes.col(i) = snapshots * (psi.col(i) / std::sqrt(lambda[i]));
        Eigen::Index imax;
        basis.modes.col(i).cwiseAbs().maxCoeff(&imax);
        if (basis.modes(imax, i) < 0.0) basis.modes.col(i) = -basis.modes.col(i);
    }
    return basis;
}

int select_modes(const Eigen::VectorXd& eigenvalues, double mu_pod) {
    if (!(mu_pod > 0.0 && mu_pod <= 1.0)) throw Error("mu_pod must lie in (0, 1]");
    const double lmax = eigenvalues.size() > 0 ? eigenvalues.maxCoeff() : 0.0;
    if (lmax <= 0.0) throw EmptySpectrum("all eigenvalues vanish");
    const double cutoff = 1e-12 * lmax;

    double total = 0.0;
    int n_nonzero = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues[i] > cutoff) {
            total += eigenvalues[i];
            ++n_nonzero;
        }
    }
    double partial = 0.0;
    for (int i = 0; i < n_nonzero; ++i) {
        partial += eigenvalues[i];
        if (partial >= mu_pod * total) return i + 1;
    }
    return n_nonzero;
}

Eigen::VectorXd project(const Eigen::MatrixXd& modes, const Eigen::VectorXd& u) {
    if (modes.rows() != u.size()) throw ShapeError("vector does not match basis rows");
    return modes.transpose() * u;
}

Eigen::VectorXd lift(const Eigen::MatrixXd& modes, const Eigen::VectorXd& coeffs) {
    if (modes.cols() != coeffs.size()) throw ShapeError("coefficients do not match basis columns");
    return modes * coeffs;
}

} // namespace sbmrom

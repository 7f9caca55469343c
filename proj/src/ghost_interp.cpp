#include "sbmrom/ghost_interp.hpp"

#include <cmath>

#include "sbmrom/errors.hpp"

namespace sbmrom {

double rbf_kernel(double r, double epsilon) {
    const double er = epsilon * r;
    if (er <= 0.0) return 0.0;
    return er * er * std::log(er);
}

int n_monomials(int degree) { return (degree + 1) * (degree + 2) / 2; }

void eval_monomials(int degree, const Vec2& x, double* out) {
    int k = 0;
    for (int d = 0; d <= degree; ++d)
        for (int i = d; i >= 0; --i) // x^i y^(d-i)
            out[k++] = std::pow(x.x, i) * std::pow(x.y, d - i);
}

RbfInterpolant::RbfInterpolant(std::vector<Vec2> centers, Eigen::VectorXd weights,
                               Eigen::VectorXd poly_coeffs, double epsilon, int degree)
    : centers_(std::move(centers)),
      weights_(std::move(weights)),
      poly_coeffs_(std::move(poly_coeffs)),
      epsilon_(epsilon),
      degree_(degree) {}

double RbfInterpolant::evaluate(const Vec2& x) const {
    double acc = 0.0;
    for (size_t k = 0; k < centers_.size(); ++k)
        acc += weights_[static_cast<Eigen::Index>(k)] * rbf_kernel(norm(x - centers_[k]), epsilon_);
    const int m = n_monomials(degree_);
    std::vector<double> p(m);
    eval_monomials(degree_, x, p.data());
    for (int j = 0; j < m; ++j) acc += poly_coeffs_[j] * p[j];
    return acc;
}

RbfSystem::RbfSystem(std::vector<Vec2> centers, const RbfOptions& options)
    : centers_(std::move(centers)), options_(options) {
    const int n = static_cast<int>(centers_.size());
    const int m = n_monomials(options_.degree);
    if (n < m)
        throw DegenerateCenters("need at least " + std::to_string(m) + " centers, got " +
                                std::to_string(n));

    Eigen::MatrixXd p(n, m);
    std::vector<double> row(m);
    for (int i = 0; i < n; ++i) {
        eval_monomials(options_.degree, centers_[i], row.data());
        for (int j = 0; j < m; ++j) p(i, j) = row[j];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p);
    qr.setThreshold(1e-10);
    if (qr.rank() < m)
        throw DegenerateCenters("monomial matrix is rank deficient (collinear centers?)");

    Eigen::MatrixXd saddle = Eigen::MatrixXd::Zero(n + m, n + m);
    for (int i = 0; i < n; ++i) {
        saddle(i, i) = options_.sigma * options_.sigma;
        for (int j = i + 1; j < n; ++j) {
            const double v = rbf_kernel(norm(centers_[i] - centers_[j]), options_.epsilon);
            saddle(i, j) = v;
            saddle(j, i) = v;
        }
    }
    saddle.block(0, n, n, m) = p;
    saddle.block(n, 0, m, n) = p.transpose();

    lu_.compute(saddle);
    const Eigen::VectorXd diag = lu_.matrixLU().diagonal().cwiseAbs();
    if (diag.minCoeff() < 1e-13 * diag.maxCoeff())
        throw SingularSystem("saddle-point system is numerically singular");
}

RbfInterpolant RbfSystem::solve(const Eigen::VectorXd& values) const {
    const int n = n_centers();
    const int m = n_monomials(options_.degree);
    if (values.size() != n) throw ShapeError("value count does not match centers");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    rhs.head(n) = values;
    const Eigen::VectorXd sol = lu_.solve(rhs);
    return RbfInterpolant(centers_, sol.head(n), sol.tail(m), options_.epsilon,
                          options_.degree);
}

RbfInterpolant build_interpolant(const std::vector<Vec2>& points,
                                 const std::vector<double>& values,
                                 const RbfOptions& options) {
    if (points.size() != values.size()) throw ShapeError("points/values size mismatch");
    RbfSystem system(points, options);
    return system.solve(Eigen::Map<const Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size())));
}

GhostFiller::GhostFiller(const TriMesh& mesh, const SurrogateDomain& surrogate,
                         const RbfOptions& options)
    : n_nodes_(mesh.n_nodes()) {
    std::vector<int> active_nodes;
    for (int a = 0; a < n_nodes_; ++a)
        (surrogate.node_is_active(a) ? active_nodes : ghost_nodes_).push_back(a);
    if (ghost_nodes_.empty()) return;

    if (options.band_radius && surrogate.has_geometry()) {
        const Vec2 c = surrogate.geometry().center;
        for (int a : active_nodes)
            if (norm(mesh.node(a) - c) <= *options.band_radius) center_nodes_.push_back(a);
    } else {
        center_nodes_ = active_nodes;
    }
    std::vector<Vec2> centers;
    centers.reserve(center_nodes_.size());
    for (int a : center_nodes_) centers.push_back(mesh.node(a));

    system_ = std::make_unique<RbfSystem>(centers, options);

    const int ng = static_cast<int>(ghost_nodes_.size());
    const int nc = system_->n_centers();
    const int m = n_monomials(options.degree);
    ghost_kernel_.resize(ng, nc);
    ghost_poly_.resize(ng, m);
    std::vector<double> row(m);
    for (int gi = 0; gi < ng; ++gi) {
        const Vec2 x = mesh.node(ghost_nodes_[gi]);
        for (int ci = 0; ci < nc; ++ci)
            ghost_kernel_(gi, ci) = rbf_kernel(norm(x - system_->centers()[ci]), options.epsilon);
        eval_monomials(options.degree, x, row.data());
        for (int j = 0; j < m; ++j) ghost_poly_(gi, j) = row[j];
    }
}

StateVector GhostFiller::fill(const StateVector& snapshot) const {
    if (static_cast<int>(snapshot.size()) != 3 * n_nodes_)
        throw ShapeError("snapshot size does not match the mesh");
    StateVector out = snapshot;
    if (ghost_nodes_.empty()) return out;

    const int nc = system_->n_centers();
    Eigen::VectorXd values(nc);
    for (int field = 0; field < 3; ++field) {
        const int offset = field * n_nodes_;
        for (int ci = 0; ci < nc; ++ci) values[ci] = snapshot[offset + center_nodes_[ci]];
        const RbfInterpolant interp = system_->solve(values);
        const Eigen::VectorXd ghost = ghost_kernel_ * interp.weights() +
                                      ghost_poly_ * interp.poly_coeffs();
        for (size_t gi = 0; gi < ghost_nodes_.size(); ++gi)
            out[offset + ghost_nodes_[gi]] = ghost[static_cast<Eigen::Index>(gi)];
    }
    return out;
}

StateVector fill_ghost(const StateVector& snapshot, const TriMesh& mesh,
                       const SurrogateDomain& surrogate, const RbfOptions& options) {
    return GhostFiller(mesh, surrogate, options).fill(snapshot);
}

} // namespace sbmrom

#include "sbmrom/workbench.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "sbmrom/errors.hpp"

namespace sbmrom {

namespace {

double field_sq_sum(const StateVector& state, const SurrogateDomain& surrogate,
                    int n_node, int field) {
    const int offset = field * n_node;
    double s = 0.0;
    for (int a = 0; a < n_node; ++a) {
        if (!surrogate.node_is_active(a)) continue;
        const double v = state[offset + a];
        s += v * v;
    }
    return s;
}

std::vector<double> trapezoid_weights(const std::vector<double>& times) {
    const size_t n = times.size();
    std::vector<double> w(n, 0.0);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (size_t k = 0; k + 1 < n; ++k) {
        const double half = 0.5 * (times[k + 1] - times[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    return w;
}

} // namespace

double frobenius_norm_active(const StateVector& state, const SurrogateDomain& surrogate,
                             int field) {
    const int n_node = static_cast<int>(surrogate.node_active().size());
    if (static_cast<int>(state.size()) != 3 * n_node)
        throw ShapeError("state size does not match the surrogate domain");
    double s = 0.0;
    if (field == kStacked) {
        for (int f = 0; f < 3; ++f) s += field_sq_sum(state, surrogate, n_node, f);
    } else {
        s = field_sq_sum(state, surrogate, n_node, field);
    }
    return std::sqrt(s);
}

double spacetime_error(const std::vector<double>& times,
                       const std::vector<StateVector>& ref,
                       const std::vector<StateVector>& test,
                       const SurrogateDomain& surrogate, int field) {
    if (ref.size() != test.size() || ref.size() != times.size())
        throw TimeGridMismatch("trajectories have different sample counts");
    if (ref.empty()) throw TimeGridMismatch("empty trajectories");

    const std::vector<double> w = trapezoid_weights(times);
    const int n_node = static_cast<int>(surrogate.node_active().size());
    double num = 0.0, den = 0.0;
    StateVector diff;
    for (size_t k = 0; k < ref.size(); ++k) {
        if (ref[k].size() != test[k].size())
            throw ShapeError("sample size mismatch between trajectories");
        diff.resize(ref[k].size());
        for (size_t i = 0; i < diff.size(); ++i) diff[i] = ref[k][i] - test[k][i];
        const int lo = (field == kStacked) ? 0 : field;
        const int hi = (field == kStacked) ? 3 : field + 1;
        for (int f = lo; f < hi; ++f) {
            num += w[k] * field_sq_sum(diff, surrogate, n_node, f);
            den += w[k] * field_sq_sum(ref[k], surrogate, n_node, f);
        }
    }
    if (den == 0.0) return (num == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num) / std::sqrt(den);
}

double spacetime_error(const Trajectory& ref, const Trajectory& test,
                       const SurrogateDomain& surrogate, int field) {
    if (ref.times.size() != test.times.size())
        throw TimeGridMismatch("trajectories have different sample counts");
    for (size_t k = 0; k < ref.times.size(); ++k)
        if (ref.times[k] != test.times[k])
            throw TimeGridMismatch("sample times differ at index " + std::to_string(k));
    return spacetime_error(ref.times, ref.states, test.states, surrogate, field);
}

ActiveLeastSquares::ActiveLeastSquares(const Eigen::MatrixXd& modes,
                                       const SurrogateDomain& surrogate)
    : modes_(modes) {
    const int n_node = static_cast<int>(surrogate.node_active().size());
    if (modes.rows() != 3 * n_node)
        throw ShapeError("basis rows do not match the surrogate domain");
    for (int f = 0; f < 3; ++f)
        for (int a = 0; a < n_node; ++a)
            if (surrogate.node_is_active(a)) active_rows_.push_back(f * n_node + a);

    masked_.resize(static_cast<Eigen::Index>(active_rows_.size()), modes.cols());
    for (size_t k = 0; k < active_rows_.size(); ++k)
        masked_.row(static_cast<Eigen::Index>(k)) = modes.row(active_rows_[k]);

    Eigen::MatrixXd gram = masked_.transpose() * masked_;
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success) {
        // Modes with no support on the active set make the Gram matrix
        // singular; a relative ridge keeps the fit defined (it pins their
        // coefficients near zero).
        const double ridge = 1e-12 * gram.trace() / static_cast<double>(gram.rows());
        gram.diagonal().array() += ridge;
        llt_.compute(gram);
        if (llt_.info() != Eigen::Success)
            throw SingularSystem("active-restricted Gram matrix is singular");
    }
}

Eigen::VectorXd ActiveLeastSquares::coeffs(const StateVector& state) const {
    if (static_cast<Eigen::Index>(state.size()) != modes_.rows())
        throw ShapeError("state size does not match basis rows");
    Eigen::VectorXd masked_u(static_cast<Eigen::Index>(active_rows_.size()));
    for (size_t k = 0; k < active_rows_.size(); ++k)
        masked_u[static_cast<Eigen::Index>(k)] = state[active_rows_[k]];
    return llt_.solve(masked_.transpose() * masked_u);
}

double projection_error(const Trajectory& traj, const Eigen::MatrixXd& modes,
                        const SurrogateDomain& surrogate, int field) {
    // Least-squares fit in the active-restricted norm: values at the online
    // geometry's ghost nodes (zeroed by the solver, smooth in the basis)
    // must not influence the fit they are excluded from scoring.
    const ActiveLeastSquares lsq(modes, surrogate);
    std::vector<StateVector> projected;
    projected.reserve(traj.states.size());
    for (const StateVector& s : traj.states) {
        const Eigen::VectorXd rec = modes * lsq.coeffs(s);
        projected.emplace_back(rec.data(), rec.data() + rec.size());
    }
    return spacetime_error(traj.times, traj.states, projected, surrogate, field);
}

void export_vtk(const TriMesh& mesh, const StateVector& state,
                const std::filesystem::path& path, double h_min) {
    const int nn = mesh.n_nodes();
    if (static_cast<int>(state.size()) != 3 * nn)
        throw ShapeError("state size does not match the mesh");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

    char buf[160];
    out << "# vtk DataFile Version 3.0\n";
    out << "sbmrom fields\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nn << " double\n";
    for (int i = 0; i < nn; ++i) {
        const Vec2& p = mesh.node(i);
        std::snprintf(buf, sizeof buf, "%.12g %.12g 0", p.x, p.y);
        out << buf << '\n';
    }
    out << "CELLS " << mesh.n_elements() << ' ' << 4 * mesh.n_elements() << '\n';
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        out << "3 " << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
    }
    out << "CELL_TYPES " << mesh.n_elements() << '\n';
    for (int e = 0; e < mesh.n_elements(); ++e) out << "5\n";
    out << "POINT_DATA " << nn << '\n';
    out << "SCALARS h double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int i = 0; i < nn; ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", state[i]);
        out << buf << '\n';
    }
    out << "VECTORS velocity double\n";
    for (int i = 0; i < nn; ++i) {
        const double h = state[i];
        double v1 = 0.0, v2 = 0.0;
        if (h >= h_min) {
            v1 = state[nn + i] / h;
            v2 = state[2 * nn + i] / h;
        }
        std::snprintf(buf, sizeof buf, "%.12g %.12g 0", v1, v2);
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void save_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const char magic[7] = {'S', 'B', 'M', 'R', 'O', 'M', '1'};
    out.write(magic, sizeof magic);
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    char magic[7];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, "SBMROM1", 7) != 0)
        throw ParseError(path.string() + ": bad matrix magic");
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in) throw ParseError(path.string() + ": truncated header");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw ParseError(path.string() + ": truncated data");
    return m;
}

void save_vector_csv(const std::vector<double>& times, const std::vector<long long>& steps,
                     const std::filesystem::path& path) {
    if (times.size() != steps.size()) throw ShapeError("times/steps size mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "step,t\n";
    char buf[64];
    for (size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g", steps[k], times[k]);
        out << buf << '\n';
    }
}

void export_spectrum_csv(const Eigen::VectorXd& eigenvalues,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "i,lambda,cumulative_energy\n";
    const double total = eigenvalues.sum();
    double partial = 0.0;
    char buf[96];
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        partial += eigenvalues[i];
        std::snprintf(buf, sizeof buf, "%lld,%.12e,%.12e", static_cast<long long>(i + 1),
                      eigenvalues[i], total > 0.0 ? partial / total : 0.0);
        out << buf << '\n';
    }
}

} // namespace sbmrom

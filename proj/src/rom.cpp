#include "sbmrom/rom.hpp"

#include <cmath>

#include "sbmrom/errors.hpp"
#include "sbmrom/workbench.hpp"

namespace sbmrom {

RomOperator::RomOperator(Eigen::MatrixXd modes, const TriMesh& mesh,
                         SurrogateDomain surrogate, FomConfig config)
    : modes_(std::move(modes)),
      mesh_(mesh),
      surrogate_(std::move(surrogate)),
      config_(std::move(config)) {
    if (modes_.cols() == 0) throw EmptyBasis("basis has no modes");
    if (modes_.rows() != 3 * mesh_.n_nodes())
        throw ShapeError("basis rows do not match the mesh");

    mass_ = lumped_mass(mesh_, surrogate_);
    const Eigen::Map<const Eigen::VectorXd> m(mass_.data(),
                                              static_cast<Eigen::Index>(mass_.size()));
    reduced_mass_ = modes_.transpose() * m.asDiagonal() * modes_;
    // Symmetrize; the congruence is symmetric up to round-off.
    reduced_mass_ = 0.5 * (reduced_mass_ + reduced_mass_.transpose()).eval();
    reduced_mass_llt_.compute(reduced_mass_);
    if (reduced_mass_llt_.info() != Eigen::Success)
        throw SingularReducedMass("reduced mass is not positive definite");
}

Eigen::VectorXd RomOperator::initial_coeffs(const StateVector& full_state) const {
    if (static_cast<Eigen::Index>(full_state.size()) != modes_.rows())
        throw ShapeError("state size does not match basis rows");
    // Fit on the online active nodes only; the zeroed ghost entries of the
    // full-order state carry no information about the flow.
    const ActiveLeastSquares lsq(modes_, surrogate_);
    return lsq.coeffs(full_state);
}

StateVector RomOperator::reconstruct(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != modes_.cols()) throw ShapeError("coefficient count mismatch");
    const Eigen::VectorXd u = modes_ * coeffs;
    return StateVector(u.data(), u.data() + u.size());
}

Eigen::VectorXd RomOperator::step(const Eigen::VectorXd& coeffs, double dt, int n_pmc) const {
    if (coeffs.size() != modes_.cols()) throw ShapeError("coefficient count mismatch");
    Eigen::VectorXd ak = coeffs;
    StateVector mid_full(static_cast<size_t>(modes_.rows()));
    for (int k = 0; k < n_pmc; ++k) {
        const Eigen::VectorXd mid = 0.5 * (coeffs + ak);
        Eigen::Map<Eigen::VectorXd>(mid_full.data(), modes_.rows()) = modes_ * mid;
        const StateVector res =
            assemble_residual(mid_full, mesh_, surrogate_, config_, dt, nullptr);
        const Eigen::Map<const Eigen::VectorXd> r(res.data(),
                                                  static_cast<Eigen::Index>(res.size()));
        const Eigen::VectorXd rhs = -dt * (modes_.transpose() * r);
        ak = coeffs + reduced_mass_llt_.solve(rhs);
        if (!ak.allFinite()) throw NumericalBlowup("non-finite reduced coefficients");
    }
    return ak;
}

RomOperator build_rom(Eigen::MatrixXd modes, const TriMesh& mesh,
                      const CircleGeometry* geometry, const FomConfig& config) {
    SurrogateDomain surrogate =
        geometry ? classify(mesh, *geometry) : SurrogateDomain::all_active(mesh);
    return RomOperator(std::move(modes), mesh, std::move(surrogate), config);
}

RomTrajectory run_rom(const RomOperator& op, double t_end, double dt, int sample_stride) {
    if (!(dt > 0.0)) throw Error("dt must be positive");
    if (sample_stride < 1) throw Error("sample stride must be at least 1");

    const StateVector u0 = initial_state(op.mesh(), op.surrogate(), op.config());
    Eigen::VectorXd a = op.initial_coeffs(u0);
    const double a0_norm = std::max(a.norm(), 1e-300);

    RomTrajectory traj;
    double t = 0.0;
    long long step = 0;
    const double eps = 1e-12 * std::max(1.0, t_end);
    while (t < t_end - eps) {
        double step_dt = dt;
        if (t + step_dt > t_end) step_dt = t_end - t;
        try {
            a = op.step(a, step_dt, op.config().n_pmc);
            if (a.norm() > 1e6 * a0_norm)
                throw NumericalBlowup("reduced state grew beyond 1e6x the initial norm");
        } catch (const NumericalBlowup& e) {
            traj.failed = true;
            traj.failure_step = step + 1;
            traj.failure_reason = e.what();
            return traj;
        }
        ++step;
        t += step_dt;
        if (step % sample_stride == 0) {
            traj.steps.push_back(step);
            traj.times.push_back(t);
            traj.coeffs.push_back(a);
            traj.states.push_back(op.reconstruct(a));
        }
    }
    if (traj.steps.empty() || traj.steps.back() != step) {
        traj.steps.push_back(step);
        traj.times.push_back(t);
        traj.coeffs.push_back(a);
        traj.states.push_back(op.reconstruct(a));
    }
    return traj;
}

} // namespace sbmrom

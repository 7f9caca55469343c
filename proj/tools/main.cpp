#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbmrom/embedded.hpp"
#include "sbmrom/errors.hpp"
#include "sbmrom/fom.hpp"
#include "sbmrom/ghost_interp.hpp"
#include "sbmrom/mesh.hpp"
#include "sbmrom/pod.hpp"
#include "sbmrom/rom.hpp"
#include "sbmrom/study.hpp"
#include "sbmrom/workbench.hpp"

namespace fs = std::filesystem;
using namespace sbmrom;

namespace {

struct GeometryArgs {
    std::optional<double> radius;
    double xc = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--radius,-R", radius, "embedded cylinder radius (omit for none)");
        cmd->add_option("--xc", xc, "cylinder center x coordinate")->default_val(0.0);
    }
    SurrogateDomain make_surrogate(const TriMesh& mesh) const {
        if (!radius) return SurrogateDomain::all_active(mesh);
        return classify(mesh, CircleGeometry{{xc, 0.0}, *radius});
    }
};

Eigen::MatrixXd states_to_matrix(const std::vector<StateVector>& states) {
    if (states.empty()) return {};
    const Eigen::Index rows = static_cast<Eigen::Index>(states[0].size());
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(states.size()));
    for (size_t k = 0; k < states.size(); ++k)
        m.col(static_cast<Eigen::Index>(k)) =
            Eigen::Map<const Eigen::VectorXd>(states[k].data(), rows);
    return m;
}

int cmd_mesh_gen(double x0, double x1, double y0, double y1, double edge,
                 const std::string& out) {
    const TriMesh mesh = generate_channel_mesh(x0, x1, y0, y1, edge);
    save_mesh(mesh, out);
    std::printf("mesh: %d nodes, %d elements, %d boundary edges -> %s\n", mesh.n_nodes(),
                mesh.n_elements(), mesh.n_boundary_edges(), out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shallow-water shifted-boundary workbench"};
    app.require_subcommand(1);

    // mesh-gen
    auto* mesh_gen = app.add_subcommand("mesh-gen", "generate the background channel mesh");
    double x0 = -1.5, x1 = 1.5, y0 = -0.3, y1 = 0.3, edge = 0.02;
    std::string mesh_out = "mesh.txt";
    mesh_gen->add_option("--xmin", x0)->capture_default_str();
    mesh_gen->add_option("--xmax", x1)->capture_default_str();
    mesh_gen->add_option("--ymin", y0)->capture_default_str();
    mesh_gen->add_option("--ymax", y1)->capture_default_str();
    mesh_gen->add_option("--edge", edge, "target element edge length")->capture_default_str();
    mesh_gen->add_option("--out,-o", mesh_out)->capture_default_str();

    // fom-run
    auto* fom_run = app.add_subcommand("fom-run", "run the full-order solver");
    std::string fom_mesh, fom_out = "fom";
    GeometryArgs fom_geom;
    FomConfig fom_cfg;
    double fom_dt = 0.0;
    fom_run->add_option("--mesh,-m", fom_mesh, "mesh file")->required();
    fom_geom.attach(fom_run);
    fom_run->add_option("--t-end,-T", fom_cfg.t_end)->capture_default_str();
    fom_run->add_option("--cfl", fom_cfg.cfl)->capture_default_str();
    fom_run->add_option("--dt", fom_dt, "fixed time step (overrides CFL)");
    fom_run->add_option("--n-pmc", fom_cfg.n_pmc)->capture_default_str();
    fom_run->add_option("--n-freq", fom_cfg.sample_stride, "snapshot sampling stride")
        ->capture_default_str();
    fom_run->add_option("--c-vms", fom_cfg.c_vms)->capture_default_str();
    fom_run->add_option("--h0", fom_cfg.h0)->capture_default_str();
    fom_run->add_option("--inflow", fom_cfg.boundary.inflow)->capture_default_str();
    fom_run->add_option("--outflow", fom_cfg.boundary.outflow)->capture_default_str();
    fom_run->add_flag("--log", fom_cfg.log_progress, "print per-step progress");
    fom_run->add_option("--out,-o", fom_out, "output prefix")->capture_default_str();

    // interp
    auto* interp = app.add_subcommand("interp", "fill ghost nodes of stored snapshots");
    std::string interp_mesh, interp_in, interp_out = "snapshots_filled.mat";
    GeometryArgs interp_geom;
    interp->add_option("--mesh,-m", interp_mesh)->required();
    interp_geom.attach(interp);
    interp->add_option("--in,-i", interp_in, "snapshot matrix file")->required();
    interp->add_option("--out,-o", interp_out)->capture_default_str();

    // pod-build
    auto* pod_build = app.add_subcommand("pod-build", "compute a POD basis from snapshots");
    std::vector<std::string> pod_in;
    std::string pod_out = "basis";
    pod_build->add_option("--in,-i", pod_in, "snapshot matrix file(s)")->required();
    pod_build->add_option("--out,-o", pod_out, "output prefix")->capture_default_str();

    // rom-run
    auto* rom_run_cmd = app.add_subcommand("rom-run", "run the reduced-order model");
    std::string rom_mesh, rom_basis, rom_out = "rom";
    GeometryArgs rom_geom;
    double rom_t_end = 0.8, rom_dt = 0.002, rom_mu = 0.0;
    int rom_modes = 0, rom_stride = 1, rom_n_pmc = 2;
    rom_run_cmd->add_option("--mesh,-m", rom_mesh)->required();
    rom_run_cmd->add_option("--basis,-b", rom_basis, "basis prefix from pod-build")->required();
    rom_geom.attach(rom_run_cmd);
    rom_run_cmd->add_option("--t-end,-T", rom_t_end)->capture_default_str();
    rom_run_cmd->add_option("--dt", rom_dt)->capture_default_str();
    rom_run_cmd->add_option("--n-modes", rom_modes, "number of modes (0 = use --mu-pod)");
    rom_run_cmd->add_option("--mu-pod", rom_mu, "energy threshold for mode selection");
    rom_run_cmd->add_option("--n-freq", rom_stride)->capture_default_str();
    rom_run_cmd->add_option("--n-pmc", rom_n_pmc)->capture_default_str();
    rom_run_cmd->add_option("--out,-o", rom_out, "output prefix")->capture_default_str();

    // study
    auto* study = app.add_subcommand("study", "run an offline/online study");
    std::string preset, config_path, study_out;
    study->add_option("--preset", preset, "test1, test2, or test3");
    study->add_option("--config", config_path, "JSON study configuration");
    study->add_option("--out-dir", study_out, "override the output directory");

    // export
    auto* export_cmd = app.add_subcommand("export", "convert a stored state column to VTK");
    std::string exp_mesh, exp_in, exp_out = "state.vtk";
    int exp_col = 0;
    export_cmd->add_option("--mesh,-m", exp_mesh)->required();
    export_cmd->add_option("--in,-i", exp_in, "matrix file")->required();
    export_cmd->add_option("--col", exp_col, "column index")->capture_default_str();
    export_cmd->add_option("--out,-o", exp_out)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (mesh_gen->parsed()) return cmd_mesh_gen(x0, x1, y0, y1, edge, mesh_out);

        if (fom_run->parsed()) {
            const TriMesh mesh = load_mesh(fom_mesh);
            const SurrogateDomain surrogate = fom_geom.make_surrogate(mesh);
            if (fom_dt > 0.0) fom_cfg.fixed_dt = fom_dt;
            const Trajectory traj = run_fom(mesh, surrogate, fom_cfg);
            save_matrix(states_to_matrix(traj.states), fom_out + ".mat");
            save_vector_csv(traj.times, traj.steps, fom_out + ".times.csv");
            export_vtk(mesh, traj.states.back(), fom_out + "_terminal.vtk",
                       fom_cfg.physics.h_min);
            std::printf("fom: %lld steps, %zu snapshots, %.2f s -> %s.mat\n", traj.n_steps,
                        traj.states.size(), traj.wall_seconds, fom_out.c_str());
            return 0;
        }

        if (interp->parsed()) {
            const TriMesh mesh = load_mesh(interp_mesh);
            const SurrogateDomain surrogate = interp_geom.make_surrogate(mesh);
            const Eigen::MatrixXd snaps = load_matrix(interp_in);
            if (snaps.rows() != 3 * mesh.n_nodes())
                throw ShapeError("snapshot rows do not match the mesh");
            GhostFiller filler(mesh, surrogate);
            Eigen::MatrixXd filled(snaps.rows(), snaps.cols());
            StateVector col(static_cast<size_t>(snaps.rows()));
            for (Eigen::Index k = 0; k < snaps.cols(); ++k) {
                Eigen::Map<Eigen::VectorXd>(col.data(), snaps.rows()) = snaps.col(k);
                const StateVector out = filler.fill(col);
                filled.col(k) = Eigen::Map<const Eigen::VectorXd>(out.data(), snaps.rows());
            }
            save_matrix(filled, interp_out);
            std::printf("interp: filled %d ghost nodes in %lld snapshots -> %s\n",
                        filler.n_ghost_nodes(), static_cast<long long>(snaps.cols()),
                        interp_out.c_str());
            return 0;
        }

        if (pod_build->parsed()) {
            Eigen::MatrixXd snaps;
            for (const std::string& f : pod_in) {
                const Eigen::MatrixXd m = load_matrix(f);
                if (snaps.size() == 0) {
                    snaps = m;
                } else {
                    if (m.rows() != snaps.rows()) throw ShapeError("snapshot rows differ");
                    const Eigen::Index old = snaps.cols();
                    snaps.conservativeResize(Eigen::NoChange, old + m.cols());
                    snaps.rightCols(m.cols()) = m;
                }
            }
            const PodBasis basis = compute_modes(snaps);
            save_matrix(basis.modes, pod_out + ".modes.mat");
            export_spectrum_csv(basis.eigenvalues, pod_out + ".spectrum.csv");
            std::printf("pod: %lld snapshots -> %d modes (%s.modes.mat)\n",
                        static_cast<long long>(snaps.cols()), basis.n_modes(),
                        pod_out.c_str());
            return 0;
        }

        if (rom_run_cmd->parsed()) {
            const TriMesh mesh = load_mesh(rom_mesh);
            Eigen::MatrixXd modes = load_matrix(rom_basis + ".modes.mat");
            int n_r = rom_modes;
            if (n_r <= 0) {
                if (!(rom_mu > 0.0))
                    throw Error("give --n-modes or --mu-pod to choose the basis size");
                // Recover the spectrum from the sibling CSV written by pod-build.
                std::ifstream spec(rom_basis + ".spectrum.csv");
                if (!spec) throw IoError("cannot open " + rom_basis + ".spectrum.csv");
                std::string line;
                std::getline(spec, line);
                std::vector<double> lambda;
                while (std::getline(spec, line)) {
                    const size_t c1 = line.find(',');
                    const size_t c2 = line.find(',', c1 + 1);
                    lambda.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
                }
                n_r = select_modes(
                    Eigen::Map<const Eigen::VectorXd>(lambda.data(),
                                                      static_cast<Eigen::Index>(lambda.size())),
                    rom_mu);
            }
            if (n_r > modes.cols()) throw ShapeError("basis has fewer modes than requested");

            FomConfig fc;
            fc.n_pmc = rom_n_pmc;
            const CircleGeometry geom{{rom_geom.xc, 0.0},
                                      rom_geom.radius ? *rom_geom.radius : 0.0};
            RomOperator op = build_rom(modes.leftCols(n_r), mesh,
                                       rom_geom.radius ? &geom : nullptr, fc);
            const RomTrajectory traj = run_rom(op, rom_t_end, rom_dt, rom_stride);

            std::ofstream coeffs(rom_out + ".coeffs.csv");
            coeffs << "step,t";
            for (int i = 1; i <= n_r; ++i) coeffs << ",a_" << i;
            coeffs << '\n';
            char buf[64];
            for (size_t k = 0; k < traj.coeffs.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%lld,%.12g", traj.steps[k], traj.times[k]);
                coeffs << buf;
                for (int i = 0; i < n_r; ++i) {
                    std::snprintf(buf, sizeof buf, ",%.12e", traj.coeffs[k][i]);
                    coeffs << buf;
                }
                coeffs << '\n';
            }
            if (traj.failed) {
                std::printf("rom: FAILED at step %lld (%s)\n", traj.failure_step,
                            traj.failure_reason.c_str());
                return 1;
            }
            save_matrix(states_to_matrix(traj.states), rom_out + ".mat");
            export_vtk(mesh, traj.states.back(), rom_out + "_terminal.vtk", fc.physics.h_min);
            std::printf("rom: %d modes, %zu samples -> %s.mat\n", n_r, traj.states.size(),
                        rom_out.c_str());
            return 0;
        }

        if (study->parsed()) {
            StudyConfig cfg;
            if (!preset.empty()) cfg = make_preset_config(preset);
            else if (!config_path.empty()) cfg = load_study_config(config_path);
            else throw Error("study needs --preset or --config");
            if (!study_out.empty()) cfg.output_dir = study_out;
            const ErrorReport report = run_study(cfg);
            std::printf("study: %lld training snapshots, %zu report rows -> %s/report.csv\n",
                        report.total_training_snapshots, report.rows.size(),
                        cfg.output_dir.c_str());
            return 0;
        }

        if (export_cmd->parsed()) {
            const TriMesh mesh = load_mesh(exp_mesh);
            const Eigen::MatrixXd m = load_matrix(exp_in);
            if (exp_col < 0 || exp_col >= m.cols()) throw IndexError("column out of range");
            StateVector state(static_cast<size_t>(m.rows()));
            Eigen::Map<Eigen::VectorXd>(state.data(), m.rows()) = m.col(exp_col);
            export_vtk(mesh, state, exp_out);
            std::printf("export: column %d -> %s\n", exp_col, exp_out.c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#include "sbmrom/study.hpp"

#include <cstdio>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "sbmrom/errors.hpp"
#include "sbmrom/ghost_interp.hpp"
#include "sbmrom/rom.hpp"
#include "sbmrom/workbench.hpp"

namespace sbmrom {

using nlohmann::json;

namespace {

StudyConfig channel_defaults() {
    StudyConfig c;
    c.fom.cfl = 0.5;
    c.fom.c_vms = 2.0;
    c.fom.n_pmc = 2;
    c.fom.h0 = 0.2;
    c.fom.v0 = {0.1, 0.0};
    c.fom.boundary.v_n = 0.0;
    c.fom.boundary.inflow = -0.02;
    c.fom.boundary.outflow = 0.02;
    c.mu_pod = {1.0 - 1e-5, 1.0 - 1e-6, 1.0 - 1e-7, 1.0 - 1e-8, 1.0 - 1e-9};
    return c;
}

std::string param_label(const ParamPoint& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "R=%g;xc=%g", p.radius, p.xc);
    return buf;
}

std::string param_file_tag(const ParamPoint& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "R%g_xc%g", p.radius, p.xc);
    std::string s(buf);
    for (char& ch : s)
        if (ch == '.') ch = 'd';
        else if (ch == '-') ch = 'm';
    return s;
}

} // namespace

StudyConfig make_test1_config() {
    StudyConfig c = channel_defaults();
    c.n_freq = 2;
    for (double r : {0.1, 0.15, 0.2}) c.training.push_back({r, 0.0, 0.8});
    for (double r : {0.08, 0.13, 0.17, 0.22}) c.evaluation.push_back({r, 0.0, 0.8});
    c.output_dir = "out/test1";
    return c;
}

StudyConfig make_test2_config() {
    StudyConfig c = channel_defaults();
    c.n_freq = 10;
    c.training = {{0.15, -0.5, 0.5}, {0.15, 0.0, 0.8}, {0.15, 0.5, 0.5}};
    c.evaluation = {{0.15, -0.65, 0.4}, {0.15, -0.15, 0.7}, {0.15, 0.3, 0.6},
                    {0.15, 0.8, 0.3}};
    c.output_dir = "out/test2";
    return c;
}

StudyConfig make_test3_config() {
    StudyConfig c = channel_defaults();
    c.n_freq = 10;
    const std::vector<std::pair<double, double>> centers_t = {{-0.5, 0.5}, {0.0, 0.8},
                                                              {0.5, 0.5}};
    for (const auto& [xc, t] : centers_t)
        for (double r : {0.1, 0.15, 0.2}) c.training.push_back({r, xc, t});
    const std::vector<std::pair<double, double>> eval_centers_t = {
        {-0.65, 0.4}, {-0.15, 0.7}, {0.3, 0.6}, {0.8, 0.3}};
    for (const auto& [xc, t] : eval_centers_t)
        for (double r : {0.08, 0.15, 0.22}) c.evaluation.push_back({r, xc, t});
    c.output_dir = "out/test3";
    return c;
}

StudyConfig make_preset_config(const std::string& name) {
    if (name == "test1") return make_test1_config();
    if (name == "test2") return make_test2_config();
    if (name == "test3") return make_test3_config();
    throw Error("unknown preset '" + name + "' (expected test1, test2, or test3)");
}

static void to_json(json& j, const ParamPoint& p) {
    j = json{{"radius", p.radius}, {"xc", p.xc}, {"t_end", p.t_end}};
}

static ParamPoint param_from_json(const json& j) {
    return {j.at("radius").get<double>(), j.at("xc").get<double>(),
            j.at("t_end").get<double>()};
}

void save_study_config(const StudyConfig& c, const std::filesystem::path& path) {
    json j;
    j["schema_version"] = 1;
    j["domain"] = {{"x", {c.x_min, c.x_max}}, {"y", {c.y_min, c.y_max}}, {"edge", c.edge}};
    j["initial"] = {{"h", c.fom.h0}, {"v", {c.fom.v0.x, c.fom.v0.y}}};
    j["boundary"] = {{"v_n", c.fom.boundary.v_n},
                     {"inflow", c.fom.boundary.inflow},
                     {"outflow", c.fom.boundary.outflow}};
    j["physics"] = {{"g", c.fom.physics.g}, {"h_min", c.fom.physics.h_min}};
    j["stabilization"] = {{"c_vms", c.fom.c_vms}, {"vms_time_term", c.fom.vms_time_term}};
    j["time"] = {{"cfl", c.fom.cfl}, {"dt_eval", c.dt_eval}, {"n_pmc", c.fom.n_pmc}};
    j["sampling"] = {{"n_freq", c.n_freq}};
    j["training"] = json::array();
    for (const ParamPoint& p : c.training) {
        json pj;
        to_json(pj, p);
        j["training"].push_back(pj);
    }
    j["evaluation"] = json::array();
    for (const ParamPoint& p : c.evaluation) {
        json pj;
        to_json(pj, p);
        j["evaluation"].push_back(pj);
    }
    j["mu_pod"] = c.mu_pod;
    json models = json::array();
    if (c.run_interpolated) models.push_back("irom");
    if (c.run_raw) models.push_back("rom");
    j["models"] = models;
    j["output_dir"] = c.output_dir;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
}

StudyConfig load_study_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (j.value("schema_version", 0) != 1)
        throw ParseError(path.string() + ": unsupported schema version");

    StudyConfig c = channel_defaults();
    const json& dom = j.at("domain");
    c.x_min = dom.at("x")[0].get<double>();
    c.x_max = dom.at("x")[1].get<double>();
    c.y_min = dom.at("y")[0].get<double>();
    c.y_max = dom.at("y")[1].get<double>();
    c.edge = dom.at("edge").get<double>();
    if (j.contains("initial")) {
        c.fom.h0 = j["initial"].at("h").get<double>();
        c.fom.v0 = {j["initial"].at("v")[0].get<double>(),
                    j["initial"].at("v")[1].get<double>()};
    }
    if (j.contains("boundary")) {
        c.fom.boundary.v_n = j["boundary"].value("v_n", 0.0);
        c.fom.boundary.inflow = j["boundary"].at("inflow").get<double>();
        c.fom.boundary.outflow = j["boundary"].at("outflow").get<double>();
    }
    if (j.contains("physics")) {
        c.fom.physics.g = j["physics"].value("g", 9.81);
        c.fom.physics.h_min = j["physics"].value("h_min", 1e-8);
    }
    if (j.contains("stabilization")) {
        c.fom.c_vms = j["stabilization"].value("c_vms", 2.0);
        c.fom.vms_time_term = j["stabilization"].value("vms_time_term", false);
    }
    if (j.contains("time")) {
        c.fom.cfl = j["time"].value("cfl", 0.5);
        c.dt_eval = j["time"].at("dt_eval").get<double>();
        c.fom.n_pmc = j["time"].value("n_pmc", 2);
    }
    c.n_freq = j.at("sampling").at("n_freq").get<int>();
    c.training.clear();
    for (const json& pj : j.at("training")) c.training.push_back(param_from_json(pj));
    c.evaluation.clear();
    for (const json& pj : j.at("evaluation")) c.evaluation.push_back(param_from_json(pj));
    c.mu_pod = j.at("mu_pod").get<std::vector<double>>();
    if (j.contains("models")) {
        c.run_interpolated = false;
        c.run_raw = false;
        for (const json& m : j["models"]) {
            if (m == "irom") c.run_interpolated = true;
            else if (m == "rom") c.run_raw = true;
            else throw ParseError(path.string() + ": unknown model '" +
                                  m.get<std::string>() + "'");
        }
    }
    c.output_dir = j.value("output_dir", c.output_dir);

    if (c.training.empty() || c.evaluation.empty())
        throw ParseError(path.string() + ": training and evaluation lists must be nonempty");
    for (double mu : c.mu_pod)
        if (!(mu > 0.0 && mu <= 1.0))
            throw ParseError(path.string() + ": mu_pod values must lie in (0, 1]");
    return c;
}

bool operator==(const StudyConfig& a, const StudyConfig& b) {
    auto params_eq = [](const std::vector<ParamPoint>& x, const std::vector<ParamPoint>& y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i].radius != y[i].radius || x[i].xc != y[i].xc || x[i].t_end != y[i].t_end)
                return false;
        return true;
    };
    return a.x_min == b.x_min && a.x_max == b.x_max && a.y_min == b.y_min &&
           a.y_max == b.y_max && a.edge == b.edge && params_eq(a.training, b.training) &&
           params_eq(a.evaluation, b.evaluation) && a.n_freq == b.n_freq &&
           a.mu_pod == b.mu_pod && a.run_interpolated == b.run_interpolated &&
           a.run_raw == b.run_raw && a.dt_eval == b.dt_eval &&
           a.fom.cfl == b.fom.cfl && a.fom.c_vms == b.fom.c_vms &&
           a.fom.n_pmc == b.fom.n_pmc && a.fom.h0 == b.fom.h0 &&
           a.fom.v0.x == b.fom.v0.x && a.fom.v0.y == b.fom.v0.y &&
           a.fom.boundary.v_n == b.fom.boundary.v_n &&
           a.fom.boundary.inflow == b.fom.boundary.inflow &&
           a.fom.boundary.outflow == b.fom.boundary.outflow &&
           a.fom.physics.g == b.fom.physics.g && a.output_dir == b.output_dir;
}

void export_report_csv(const ErrorReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "param,mu_pod,model,err_h,err_hv1,err_hv2,n_modes,status\n";
    char buf[256];
    for (const ErrorRow& row : report.rows) {
        if (row.failed) {
            std::snprintf(buf, sizeof buf, "%s,%.12g,%s,--,--,--,%d,FAILED",
                          param_label(row.param).c_str(), row.mu_pod, row.model.c_str(),
                          row.n_modes);
        } else {
            std::snprintf(buf, sizeof buf, "%s,%.12g,%s,%.6e,%.6e,%.6e,%d,OK",
                          param_label(row.param).c_str(), row.mu_pod, row.model.c_str(),
                          row.err[0], row.err[1], row.err[2], row.n_modes);
        }
        out << buf << '\n';
    }
}

SnapshotSet collect_snapshots(const TriMesh& mesh, const StudyConfig& config) {
    SnapshotSet set;
    const Eigen::Index n_h = 3 * mesh.n_nodes();

    std::vector<Eigen::VectorXd> raw_cols, interp_cols;
    std::vector<SnapshotInfo> infos;
    for (const ParamPoint& p : config.training) {
        const CircleGeometry geom{{p.xc, 0.0}, p.radius};
        const SurrogateDomain surrogate = classify(mesh, geom);
        FomConfig fc = config.fom;
        fc.fixed_dt.reset();
        fc.t_end = p.t_end;
        fc.sample_stride = config.n_freq;
        const Trajectory traj = run_fom(mesh, surrogate, fc);

        std::optional<GhostFiller> filler;
        if (config.run_interpolated) filler.emplace(mesh, surrogate);
        for (size_t k = 0; k < traj.states.size(); ++k) {
            const StateVector& s = traj.states[k];
            raw_cols.emplace_back(
                Eigen::Map<const Eigen::VectorXd>(s.data(), n_h));
            if (filler) {
                const StateVector filled = filler->fill(s);
                interp_cols.emplace_back(
                    Eigen::Map<const Eigen::VectorXd>(filled.data(), n_h));
            }
            infos.push_back({p.radius, p.xc, traj.times[k]});
        }
    }

    const Eigen::Index n_s = static_cast<Eigen::Index>(raw_cols.size());
    set.raw.data.resize(n_h, n_s);
    for (Eigen::Index k = 0; k < n_s; ++k) set.raw.data.col(k) = raw_cols[k];
    set.raw.info = infos;
    set.raw.interpolated = false;
    if (config.run_interpolated) {
        set.interpolated.data.resize(n_h, n_s);
        for (Eigen::Index k = 0; k < n_s; ++k) set.interpolated.data.col(k) = interp_cols[k];
        set.interpolated.info = infos;
        set.interpolated.interpolated = true;
    }
    return set;
}

ErrorReport run_study(const StudyConfig& config) {
    namespace fs = std::filesystem;
    if (config.training.empty() || config.evaluation.empty())
        throw Error("training and evaluation lists must be nonempty");
    const fs::path out_dir(config.output_dir);
    fs::create_directories(out_dir);

    const TriMesh mesh =
        generate_channel_mesh(config.x_min, config.x_max, config.y_min, config.y_max,
                              config.edge);

    // Offline: training snapshots and the two POD bases.
    const SnapshotSet snapshots = collect_snapshots(mesh, config);
    ErrorReport report;
    report.total_training_snapshots = snapshots.raw.data.cols();

    PodBasis basis_interp, basis_raw;
    if (config.run_interpolated) {
        basis_interp = compute_modes(snapshots.interpolated.data);
        export_spectrum_csv(basis_interp.eigenvalues, out_dir / "spectrum_irom.csv");
        save_matrix(basis_interp.modes, out_dir / "basis_irom.mat");
    }
    if (config.run_raw) {
        basis_raw = compute_modes(snapshots.raw.data);
        export_spectrum_csv(basis_raw.eigenvalues, out_dir / "spectrum_rom.csv");
        save_matrix(basis_raw.modes, out_dir / "basis_rom.mat");
    }

    // Online: reduced runs against reference solutions at a fixed step size.
    for (const ParamPoint& p : config.evaluation) {
        const CircleGeometry geom{{p.xc, 0.0}, p.radius};
        const SurrogateDomain surrogate = classify(mesh, geom);
        FomConfig fc = config.fom;
        fc.fixed_dt = config.dt_eval;
        fc.t_end = p.t_end;
        fc.sample_stride = config.n_freq;
        const Trajectory ref = run_fom(mesh, surrogate, fc);
        export_vtk(mesh, ref.states.back(), out_dir / ("fom_" + param_file_tag(p) + ".vtk"),
                   config.fom.physics.h_min);

        for (double mu : config.mu_pod) {
            if (config.run_interpolated) {
                const int n_r = select_modes(basis_interp.eigenvalues, mu);
                ErrorRow proj_row{p, mu, "projection", {}, n_r, false};
                const Eigen::MatrixXd sub = basis_interp.modes.leftCols(n_r);
                proj_row.err = {projection_error(ref, sub, surrogate, kHeight),
                                projection_error(ref, sub, surrogate, kDischargeX),
                                projection_error(ref, sub, surrogate, kDischargeY)};
                report.rows.push_back(proj_row);
            }
            for (int variant = 0; variant < 2; ++variant) {
                const bool interp = (variant == 0);
                if (interp && !config.run_interpolated) continue;
                if (!interp && !config.run_raw) continue;
                const PodBasis& basis = interp ? basis_interp : basis_raw;
                const int n_r = select_modes(basis.eigenvalues, mu);
                ErrorRow row{p, mu, interp ? "irom" : "rom", {}, n_r, false};
                try {
                    RomOperator op =
                        build_rom(basis.modes.leftCols(n_r), mesh, &geom, fc);
                    const RomTrajectory rom_traj =
                        run_rom(op, p.t_end, config.dt_eval, config.n_freq);
                    if (rom_traj.failed) {
                        row.failed = true;
                    } else {
                        row.err = {
                            spacetime_error(ref.times, ref.states, rom_traj.states,
                                            surrogate, kHeight),
                            spacetime_error(ref.times, ref.states, rom_traj.states,
                                            surrogate, kDischargeX),
                            spacetime_error(ref.times, ref.states, rom_traj.states,
                                            surrogate, kDischargeY)};
                        export_vtk(mesh, rom_traj.states.back(),
                                   out_dir / (row.model + "_" + param_file_tag(p) + "_Nr" +
                                              std::to_string(n_r) + ".vtk"),
                                   config.fom.physics.h_min);
                    }
                } catch (const Error&) {
                    row.failed = true;
                }
                report.rows.push_back(row);
            }
        }
    }

    export_report_csv(report, out_dir / "report.csv");
    return report;
}

} // namespace sbmrom

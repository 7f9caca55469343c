#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sbmrom/fom.hpp"
#include "sbmrom/pod.hpp"

namespace sbmrom {

struct ParamPoint {
    double radius = 0.15;
    double xc = 0.0;
    double t_end = 0.8;
};

/**
 * One offline/online reduced-order study: train full-order snapshots over the
 * training parameters, build POD bases with and without ghost-node
 * interpolation, then evaluate reduced runs against reference full-order
 * solutions over the evaluation parameters and energy thresholds.
 */
struct StudyConfig {
    double x_min = -1.5, x_max = 1.5;
    double y_min = -0.3, y_max = 0.3;
    double edge = 0.02;

    std::vector<ParamPoint> training;
    std::vector<ParamPoint> evaluation;
    int n_freq = 2;
    std::vector<double> mu_pod;
    bool run_interpolated = true; // SBM-iROM
    bool run_raw = true;          // SBM-ROM
    double dt_eval = 0.002;
    FomConfig fom; // cfl, c_vms, n_pmc, boundary, initial state, physics
    std::string output_dir = "study_out";
};

StudyConfig make_test1_config();
StudyConfig make_test2_config();
StudyConfig make_test3_config();
StudyConfig make_preset_config(const std::string& name);

StudyConfig load_study_config(const std::filesystem::path& path);
void save_study_config(const StudyConfig& config, const std::filesystem::path& path);
bool operator==(const StudyConfig& a, const StudyConfig& b);

struct ErrorRow {
    ParamPoint param;
    double mu_pod = 0.0;
    std::string model; // "projection", "irom", or "rom"
    std::array<double, 3> err{0.0, 0.0, 0.0};
    int n_modes = 0;
    bool failed = false;
};

struct ErrorReport {
    std::vector<ErrorRow> rows;
    long long total_training_snapshots = 0;
};

// Header: param,mu_pod,model,err_h,err_hv1,err_hv2,n_modes,status.
// Failed rows carry "--" in the error columns.
void export_report_csv(const ErrorReport& report, const std::filesystem::path& path);

struct SnapshotSet {
    SnapshotMatrix raw;
    SnapshotMatrix interpolated;
};

// Offline stage only: training runs, sampling, optional ghost interpolation.
SnapshotSet collect_snapshots(const TriMesh& mesh, const StudyConfig& config);

ErrorReport run_study(const StudyConfig& config);

} // namespace sbmrom

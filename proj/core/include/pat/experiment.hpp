#pragma once

#include "pat/recon.hpp"

#include <cstdint>
#include <string>

namespace pat {

/// Flat key = value configuration with [sections]; see the README for the
/// grammar. Defaults give a small desk-scale run.
struct ExperimentConfig {
    std::string name = "experiment";

    // [experiment]
    double radius = 1.0;
    std::string speed = "nontrapping";
    std::string phantom = "ghosts";
    double phantom_smoothing = 0.0;  // 0 -> 2h of the simulation mesh
    double T_absolute = 0.0;         // T = <number>
    double T0_multiple = 0.0;        // T = <number> * T0

    // [simulation]
    double h = 0.1;
    double sim_dt_divisor = 15.0;  // dt = h / (divisor * c_max)

    // [reconstruction]
    double h_r = 0.15;
    double recon_dt_divisor = 14.0;
    std::string method = "landweber";  // landweber | tr | tr-harmonic | neumann
    double omega = 0.0;                // 0 -> spectral estimate
    double tau = 1.5;
    double delta = 0.0;
    int k_max = 200;
    int J = 5;
    int snapshot_every = 5;

    // [seeds]
    uint64_t noise_seed = 1;
    uint64_t omega_seed = 20240601;

    // [output]
    std::string output_dir = ".";

    // [flags]
    bool allow_inverse_crime = false;
    bool override_stability = false;
    bool lumped_mass = true;

    double t0_grid_spacing = 0.0;  // 0 -> radius/100
    int render_size = 512;
};

ExperimentConfig parse_config_file(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

/// Resolved time span: absolute, or multiple of the estimated T0.
/// Returns {T, T0} with T0 = 0 when no estimate was needed.
std::pair<double, double> resolve_time_span(const ExperimentConfig& cfg,
                                            const SpeedField& speed);

int cmd_simulate(const ExperimentConfig& cfg);
int cmd_reconstruct(const ExperimentConfig& cfg, const std::string& trace_path);
int cmd_diagnose(const ExperimentConfig& cfg);
int cmd_render(const std::string& field_path, const std::string& image_path, int size = 512,
               const std::string& mesh_path = "");
int cmd_t0(const ExperimentConfig& cfg);

/// Rasterizes a nodal field to a 16-bit PGM (P5) with linear min-max
/// scaling; the scaling is recorded in <image>.scale.txt.
void render_field_pgm(const FemSpace& space, const Eigen::VectorXd& coeffs,
                      const std::string& image_path, int size);

}  // namespace pat

#pragma once

#include "pat/wavesolver.hpp"

#include <string>

namespace pat {

/// Time-indexed values at the ordered boundary vertices: row n holds the
/// samples at t_n = n*dt.
struct BoundaryTrace {
    Eigen::MatrixXd values;           // (N+1) x n_b
    double dt = 0.0;
    std::vector<double> arc_lengths;  // cumulative arc coordinate per node
    double radius = 0.0;

    int steps() const { return static_cast<int>(values.rows()) - 1; }
    int n_b() const { return static_cast<int>(values.cols()); }
    double T() const { return steps() * dt; }
};

BoundaryTrace make_trace(const BoundaryGrid& boundary, const TimeGrid& grid);

/// Everything one forward/adjoint application needs, built once per
/// (mesh, speed, grid) triple and immutable afterwards.
struct OperatorSetup {
    double radius = 0.0;
    double h = 0.0;
    TriMesh mesh;
    std::shared_ptr<FemSpace> space;
    BoundaryGrid boundary;
    SpeedField speed;
    TimeGrid grid;
    Discretization disc;
    CQWeightSet weights;

    OperatorSetup(double radius, double h, const SpeedField& speed, const TimeGrid& grid,
                  bool lumped = true, bool enforce_cfl = true);
};

/// Forward map: trace of the transmission solve with initial value f and
/// zero jump. f must vanish on the boundary (checked, not zeroed).
BoundaryTrace forward_L(const NodalField& f, const OperatorSetup& setup);

/// Adjoint map: time-reverse h, solve the transmission problem with h as the
/// normal-derivative jump, form (1/c^2) z'(0) by the second-order one-sided
/// difference, and apply the inverse Dirichlet Laplacian.
NodalField adjoint_L(const BoundaryTrace& h, const OperatorSetup& setup);

/// Trapezoidal rule in time composed with the piecewise-linear boundary mass
/// in arc length.
double l2_sigma_inner(const BoundaryTrace& a, const BoundaryTrace& b);
double l2_sigma_norm(const BoundaryTrace& a);

/// Gaussian perturbation rescaled so the measured distance is exactly delta.
BoundaryTrace add_noise(const BoundaryTrace& m, double delta, uint64_t seed);

/// Bilinear resampling: periodic linear in arc length, linear in time.
/// Time extrapolation beyond the source span is rejected.
BoundaryTrace resample_trace(const BoundaryTrace& trace, const BoundaryGrid& src_boundary,
                             const TimeGrid& src_grid, const BoundaryGrid& dst_boundary,
                             const TimeGrid& dst_grid);

void write_trace(const BoundaryTrace& trace, const std::string& path);
BoundaryTrace read_trace(const std::string& path);

}  // namespace pat

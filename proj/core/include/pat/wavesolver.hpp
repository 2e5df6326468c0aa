#pragma once

#include "pat/cq.hpp"
#include "pat/fem.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <utility>
#include <vector>

namespace pat {

/// Uniform time grid on (0, T).
struct TimeGrid {
    double T = 0.0;
    int N = 0;
    double dt = 0.0;

    static TimeGrid from_steps(double T, int N);
    /// N = ceil(T / dt_max), dt = T / N.
    static TimeGrid from_dt(double T, double dt_max);
};

/// Stability guard dt * c_max <= h / factor (default 10).
void check_cfl(const TimeGrid& grid, double c_max, double h, double factor = 10.0);

/// Assembled operators shared by every solve on one (mesh, speed) pair.
/// Immutable after construction; solver calls keep their own state.
struct Discretization {
    const FemSpace* space = nullptr;
    SparseOperator M;       // weighted mass (1/c^2), lumped -> diagonal
    SparseOperator Mplain;  // unweighted mass, same lumping
    SparseOperator A;       // stiffness
    SparseOperator B;       // boundary coupling
    Eigen::MatrixXd Mb;     // piecewise-linear boundary mass in arc length
    bool lumped = true;
    double c_max = 0.0;

    Eigen::VectorXd M_inv_diag;  // lumped fast path
    std::shared_ptr<Eigen::SimplicialLDLT<SparseOperator>> M_chol;    // consistent path
    std::shared_ptr<Eigen::SimplicialLDLT<SparseOperator>> A_int_chol;  // interior stiffness
    std::vector<int> interior_dofs;
    std::vector<int> dof_to_interior;

    Discretization() = default;
    Discretization(const FemSpace& space, const SpeedField& speed, const BoundaryGrid& boundary,
                   bool lumped);
};

struct SolveOptions {
    bool record_energy = false;
    int snapshot_every = 0;  // 0 disables snapshots
    double amp_guard = 1e6;  // instability abort threshold (times initial amplitude)
};

struct SolveRecord {
    Eigen::MatrixXd boundary_trace;  // (N+1) x n_b, row n = trace at t_n
    Eigen::MatrixXd lambda_history;  // (N+1) x n_b
    std::vector<Eigen::VectorXd> final_fields;  // v at the last three steps
    std::vector<double> energy;                 // per half step if recorded
    std::vector<std::pair<int, Eigen::VectorXd>> snapshots;
};

/// Leapfrog march of the coupled interior/boundary-integral system. rho is
/// the prescribed normal-derivative jump sampled at the grid times ((N+1) x
/// n_b); pass an empty matrix for zero.
SolveRecord solve_transmission(const Discretization& disc, const CQWeightSet& weights,
                               const NodalField& v0, const Eigen::MatrixXd& rho,
                               const TimeGrid& grid, const SolveOptions& opts = {});

/// Interior leapfrog with the natural (reflecting) boundary, lambda forced 0.
SolveRecord solve_reflecting(const Discretization& disc, const NodalField& v0,
                             const TimeGrid& grid, const SolveOptions& opts = {});

/// Backward-in-time interior solve with strongly imposed Dirichlet data g
/// ((N+1) x n_b at the boundary vertices, row n = data at t_n) and final
/// state final_value at t = T (final velocity optional, default zero). The
/// reconstruction at t = 0 is final_fields[2] of the returned record.
SolveRecord solve_interior_dirichlet_backward(const Discretization& disc,
                                              const Eigen::MatrixXd& g,
                                              const NodalField& final_value,
                                              const TimeGrid& grid,
                                              const SolveOptions& opts = {},
                                              const NodalField* final_velocity = nullptr);

/// -Laplace u = rhs weakly, u = 0 on the boundary.
NodalField solve_poisson_dirichlet(const Discretization& disc, const NodalField& rhs);

/// Discrete harmonic extension of boundary-vertex values.
NodalField solve_laplace_dirichlet(const Discretization& disc,
                                   const Eigen::VectorXd& boundary_values);

/// Half-step discrete energy between consecutive snapshots.
double interior_energy(const Discretization& disc, const Eigen::VectorXd& v_prev,
                       const Eigen::VectorXd& v_next, double dt);

}  // namespace pat

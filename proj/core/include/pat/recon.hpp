#pragma once

#include "pat/operators.hpp"

namespace pat {

struct LandweberConfig {
    double omega = 0.0;      // <= 0 requests a spectral estimate
    double tau = 1.5;        // discrepancy constant, > 1
    double delta = 0.0;      // noise level
    int k_max = 200;
    int snapshot_every = 5;  // 0 disables iterate snapshots
    int power_iters = 15;    // used when omega is estimated
    uint64_t seed = 20240601;
};

enum class StopReason { Discrepancy, IterationCap };

struct ReconReport {
    NodalField final_iterate;
    std::vector<double> residuals;    // residual norm of iterate k, k = 0..
    int first_violation_index = -1;   // first k with residual <= tau*delta
    int returned_index = 0;           // index of the returned iterate
    StopReason reason = StopReason::IterationCap;
    double omega_used = 0.0;
    std::vector<std::pair<int, Eigen::VectorXd>> snapshots;
};

struct OmegaEstimate {
    double omega = 0.0;
    double lambda_max = 0.0;
    bool converged = false;
    std::vector<double> rayleigh;  // quotient per iteration
};

/// Power iteration on f -> L*(L f) in the gradient inner product;
/// omega = 0.95 / lambda_max.
OmegaEstimate estimate_omega(const OperatorSetup& setup, int power_iters, uint64_t seed);

/// Gradient iteration f_k = f_{k-1} - omega L*(L f_{k-1} - m), started at 0,
/// stopped by the discrepancy rule residual <= tau*delta or the cap.
ReconReport landweber(const BoundaryTrace& m, const OperatorSetup& setup,
                      const LandweberConfig& config);

enum class TimeReversalMode { Plain, Harmonic };

/// Backward interior solve with the measured trace as Dirichlet data; final
/// state zero (Plain) or the harmonic extension of the last time slice.
NodalField time_reversal(const BoundaryTrace& m, const OperatorSetup& setup,
                         TimeReversalMode mode);

/// f_0 = harmonic time reversal of m, then J corrections
/// f_k = f_{k-1} - TR[L f_{k-1} - m].
NodalField neumann_series(const BoundaryTrace& m, const OperatorSetup& setup, int J);

enum class ErrorNorm { L2, H01 };

/// ||f_rec - f_true|| / ||f_true||; fields on different meshes are compared
/// after evaluating f_rec on the reference mesh.
double relative_error(const NodalField& f_rec, const NodalField& f_true, ErrorNorm norm);

}  // namespace pat

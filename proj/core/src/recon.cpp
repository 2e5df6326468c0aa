#include "pat/recon.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pat {

OmegaEstimate estimate_omega(const OperatorSetup& setup, int power_iters, uint64_t seed) {
    if (power_iters < 5) throw ConfigError("estimate_omega: power_iters must be >= 5");

    const FemSpace& sp = *setup.space;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    NodalField f = make_field(sp);
    for (int i = 0; i < sp.n_dofs(); ++i)
        if (!sp.is_boundary_dof[i]) f.coeffs[i] = uni(rng);

    double nrm = std::sqrt(h10_inner(f, f, setup.disc.A));
    if (!(nrm > 0.0)) throw NumericError("estimate_omega: degenerate start vector");
    f.coeffs /= nrm;

    OmegaEstimate est;
    est.rayleigh.reserve(power_iters);
    for (int k = 0; k < power_iters; ++k) {
        const BoundaryTrace y = forward_L(f, setup);
        NodalField g = adjoint_L(y, setup);
        const double lambda = h10_inner(f, g, setup.disc.A);  // f is unit in H1
        est.rayleigh.push_back(lambda);
        const double gn = std::sqrt(h10_inner(g, g, setup.disc.A));
        if (!(gn > 0.0)) throw NumericError("estimate_omega: iteration collapsed");
        f.coeffs = g.coeffs / gn;
    }
    est.lambda_max = est.rayleigh.back();

    est.converged = true;
    const int n = static_cast<int>(est.rayleigh.size());
    for (int k = std::max(1, n - 3); k < n; ++k) {
        const double rel = std::abs(est.rayleigh[k] - est.rayleigh[k - 1]) /
                           std::max(std::abs(est.rayleigh[k]), 1e-300);
        if (rel > 0.10) est.converged = false;
    }
    est.omega = 0.95 / est.lambda_max;
    return est;
}

ReconReport landweber(const BoundaryTrace& m, const OperatorSetup& setup,
                      const LandweberConfig& config) {
    if (!(config.tau > 1.0)) throw ConfigError("landweber: tau must be > 1");
    if (config.delta < 0.0) throw ConfigError("landweber: delta must be >= 0");
    if (config.k_max < 0) throw ConfigError("landweber: k_max must be >= 0");

    double omega = config.omega;
    if (!(omega > 0.0))
        omega = estimate_omega(setup, config.power_iters, config.seed).omega;

    ReconReport report;
    report.omega_used = omega;

    NodalField f = make_field(*setup.space);
    const double threshold = config.tau * config.delta;

    for (int k = 0;; ++k) {
        const BoundaryTrace y = forward_L(f, setup);
        BoundaryTrace r = y;
        r.values -= m.values;
        const double res = l2_sigma_norm(r);
        report.residuals.push_back(res);

        if (config.snapshot_every > 0 && k % config.snapshot_every == 0)
            report.snapshots.push_back({k, f.coeffs});

        if (res <= threshold) {
            report.first_violation_index = k;
            report.returned_index = k;
            report.reason = StopReason::Discrepancy;
            break;
        }
        if (k == config.k_max) {
            report.returned_index = k;
            report.reason = StopReason::IterationCap;
            break;
        }
        const NodalField grad = adjoint_L(r, setup);
        f.coeffs -= omega * grad.coeffs;
    }
    report.final_iterate = f;
    return report;
}

NodalField time_reversal(const BoundaryTrace& m, const OperatorSetup& setup,
                         TimeReversalMode mode) {
    if (m.steps() != setup.grid.N || m.n_b() != setup.boundary.size())
        throw ConfigError("time_reversal: trace shape mismatch");

    NodalField final_value;
    if (mode == TimeReversalMode::Harmonic) {
        final_value =
            solve_laplace_dirichlet(setup.disc, m.values.row(setup.grid.N).transpose());
    }
    const SolveRecord rec =
        solve_interior_dirichlet_backward(setup.disc, m.values, final_value, setup.grid);
    NodalField out = make_field(*setup.space);
    out.coeffs = rec.final_fields[2];
    return out;
}

NodalField neumann_series(const BoundaryTrace& m, const OperatorSetup& setup, int J) {
    if (J < 0) throw ConfigError("neumann_series: J must be >= 0");
    NodalField f = time_reversal(m, setup, TimeReversalMode::Harmonic);
    double prev_norm = std::sqrt(h10_inner(f, f, setup.disc.A));
    for (int k = 1; k <= J; ++k) {
        // Correction term needs boundary-zero input for the forward solve;
        // the time-reversal output carries the data on the boundary, so the
        // forward map is applied to the interior part.
        NodalField f_interior = f;
        for (int i = 0; i < setup.space->n_dofs(); ++i)
            if (setup.space->is_boundary_dof[i]) f_interior.coeffs[i] = 0.0;
        const BoundaryTrace y = forward_L(f_interior, setup);
        BoundaryTrace r = y;
        r.values -= m.values;
        const NodalField corr = time_reversal(r, setup, TimeReversalMode::Harmonic);
        f.coeffs -= corr.coeffs;

        const double nrm = std::sqrt(h10_inner(f, f, setup.disc.A));
        if (nrm > 10.0 * std::max(prev_norm, 1e-300))
            throw NumericError("neumann_series: divergence detected (norm growth > 10x)");
        prev_norm = nrm;
    }
    return f;
}

double relative_error(const NodalField& f_rec, const NodalField& f_true, ErrorNorm norm) {
    const FemSpace& ref = *f_true.space;
    Eigen::VectorXd rec_on_ref;
    if (f_rec.space == f_true.space) {
        rec_on_ref = f_rec.coeffs;
    } else {
        const FieldEvaluator eval(*f_rec.space);
        NodalField projected = project_analytic(
            [&](Vec2 p) { return eval.evaluate(f_rec.coeffs, p); }, ref);
        rec_on_ref = projected.coeffs;
    }

    const Eigen::VectorXd diff = rec_on_ref - f_true.coeffs;
    const SparseOperator G =
        (norm == ErrorNorm::L2)
            ? assemble_weighted_mass(ref, SpeedField::constant(1.0, ref.mesh->radius), true)
            : assemble_stiffness(ref);
    const double num = diff.dot(G * diff);
    const double den = f_true.coeffs.dot(G * f_true.coeffs);
    if (!(den > 0.0)) throw ConfigError("relative_error: reference field has zero norm");
    return std::sqrt(num / den);
}

}  // namespace pat

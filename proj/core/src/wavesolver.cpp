#include "pat/wavesolver.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pat {

TimeGrid TimeGrid::from_steps(double T, int N) {
    if (!(T > 0.0) || N < 1) throw ConfigError("TimeGrid: need T > 0 and N >= 1");
    return {T, N, T / N};
}

TimeGrid TimeGrid::from_dt(double T, double dt_max) {
    if (!(T > 0.0) || !(dt_max > 0.0)) throw ConfigError("TimeGrid: need T > 0 and dt > 0");
    const int N = std::max(1, static_cast<int>(std::ceil(T / dt_max - 1e-12)));
    return {T, N, T / N};
}

void check_cfl(const TimeGrid& grid, double c_max, double h, double factor) {
    if (grid.dt * c_max > h / factor + 1e-15)
        throw ConfigError("time step violates the stability guard dt*c_max <= h/" +
                          std::to_string(factor));
}

Discretization::Discretization(const FemSpace& sp, const SpeedField& speed,
                               const BoundaryGrid& boundary, bool lumped_)
    : space(&sp), lumped(lumped_), c_max(speed.c_max()) {
    M = assemble_weighted_mass(sp, speed, lumped);
    Mplain = assemble_weighted_mass(sp, SpeedField::constant(1.0, speed.radius), lumped);
    A = assemble_stiffness(sp);
    B = assemble_boundary_mass(sp, boundary);

    const int n_b = boundary.size();
    Mb = Eigen::MatrixXd::Zero(n_b, n_b);
    for (int k = 0; k < n_b; ++k) {
        const double len = boundary.segment_length(k);
        const int kp = (k + 1) % n_b;
        Mb(k, k) += len / 3.0;
        Mb(kp, kp) += len / 3.0;
        Mb(k, kp) += len / 6.0;
        Mb(kp, k) += len / 6.0;
    }

    if (lumped) {
        M_inv_diag.resize(sp.n_dofs());
        for (int i = 0; i < sp.n_dofs(); ++i) M_inv_diag[i] = 1.0 / M.coeff(i, i);
    } else {
        M_chol = std::make_shared<Eigen::SimplicialLDLT<SparseOperator>>(M);
        if (M_chol->info() != Eigen::Success)
            throw NumericError("Discretization: consistent mass factorization failed");
    }

    interior_dofs.reserve(sp.n_dofs());
    dof_to_interior.assign(sp.n_dofs(), -1);
    for (int i = 0; i < sp.n_dofs(); ++i) {
        if (!sp.is_boundary_dof[i]) {
            dof_to_interior[i] = static_cast<int>(interior_dofs.size());
            interior_dofs.push_back(i);
        }
    }
    const int ni = static_cast<int>(interior_dofs.size());
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < A.outerSize(); ++k) {
        for (SparseOperator::InnerIterator it(A, k); it; ++it) {
            const int ri = dof_to_interior[it.row()], ci = dof_to_interior[it.col()];
            if (ri >= 0 && ci >= 0) trips.emplace_back(ri, ci, it.value());
        }
    }
    SparseOperator A_int(ni, ni);
    A_int.setFromTriplets(trips.begin(), trips.end());
    A_int_chol = std::make_shared<Eigen::SimplicialLDLT<SparseOperator>>(A_int);
    if (A_int_chol->info() != Eigen::Success)
        throw NumericError("Discretization: interior stiffness factorization failed");
}

namespace {

Eigen::VectorXd apply_mass_inverse(const Discretization& d, const Eigen::VectorXd& r) {
    if (d.lumped) return d.M_inv_diag.asDiagonal() * r;
    return d.M_chol->solve(r);
}

Eigen::VectorXd trace_of(const Discretization& d, const Eigen::VectorXd& v) {
    const auto& dofs = d.space->boundary_vertex_dofs;
    Eigen::VectorXd out(dofs.size());
    for (size_t k = 0; k < dofs.size(); ++k) out[k] = v[dofs[k]];
    return out;
}

void check_finite(const Eigen::VectorXd& v, double guard, const char* where) {
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > guard)
        throw NumericError(std::string(where) + ": solution blew up (instability)");
}

}  // namespace

SolveRecord solve_transmission(const Discretization& disc, const CQWeightSet& weights,
                               const NodalField& v0, const Eigen::MatrixXd& rho,
                               const TimeGrid& grid, const SolveOptions& opts) {
    const FemSpace& sp = *disc.space;
    const int n_b = static_cast<int>(sp.boundary_vertex_dofs.size());
    const int N = grid.N;
    const double dt = grid.dt;

    if (v0.space != &sp) throw ConfigError("solve_transmission: field/space mismatch");
    if (weights.n_b != n_b || weights.N < N)
        throw ConfigError("solve_transmission: weights do not match boundary/grid");
    const bool has_rho = rho.size() > 0;
    if (has_rho && (rho.rows() != N + 1 || rho.cols() != n_b))
        throw ConfigError("solve_transmission: rho shape mismatch");

    const double amp0 = std::max({v0.coeffs.cwiseAbs().maxCoeff(),
                                  has_rho ? rho.cwiseAbs().maxCoeff() : 0.0, 1e-30});
    const double guard = opts.amp_guard * amp0;

    SolveRecord rec;
    rec.boundary_trace.resize(N + 1, n_b);
    rec.lambda_history.resize(N + 1, n_b);

    std::vector<Eigen::VectorXd> mu(N + 1);     // lambda + rho history
    std::vector<Eigen::VectorXd> traces(N + 1); // boundary vertex values

    Eigen::VectorXd v_prev = v0.coeffs;
    traces[0] = trace_of(disc, v_prev);
    rec.boundary_trace.row(0) = traces[0].transpose();

    auto rho_at = [&](int n) -> Eigen::VectorXd {
        if (!has_rho) return Eigen::VectorXd::Zero(n_b);
        return rho.row(n).transpose();
    };

    // Boundary-integral step at t_n: solve for mu_n = lambda_n + rho_n from
    // the tested exterior trace relation
    //   1/2 Mb v_n + sum_{j<=n} Wv[n-j] mu_j - sum_{j<=n} Wk[n-j] v_j = 0.
    // (The double layer of the radiating exterior trace enters with the
    // minus sign; checked against the closed-form radial solution.)
    auto boundary_step = [&](int n) {
        Eigen::VectorXd rhs = -0.5 * (disc.Mb * traces[n]);
        for (int j = 0; j < n; ++j) rhs.noalias() -= weights.Wv[n - j] * mu[j];
        for (int j = 0; j <= n; ++j) rhs.noalias() += weights.Wk[n - j] * traces[j];
        mu[n] = weights.w0_lu.solve(rhs);
        rec.lambda_history.row(n) = (mu[n] - rho_at(n)).transpose();
    };

    boundary_step(0);

    // Taylor start using v'(0) = 0.
    Eigen::VectorXd lam0 = mu[0] - rho_at(0);
    Eigen::VectorXd v_cur =
        v_prev + 0.5 * dt * dt *
                     apply_mass_inverse(disc, -(disc.A * v_prev) + disc.B * lam0);
    traces[1] = trace_of(disc, v_cur);
    rec.boundary_trace.row(1) = traces[1].transpose();
    boundary_step(1);

    if (opts.record_energy) rec.energy.push_back(interior_energy(disc, v_prev, v_cur, dt));
    if (opts.snapshot_every > 0) rec.snapshots.push_back({0, v_prev});

    Eigen::VectorXd v_next;
    Eigen::VectorXd v_pprev = v_prev;  // keeps v^{n-2} for the final triple
    for (int n = 1; n < N; ++n) {
        const Eigen::VectorXd lam = mu[n] - rho_at(n);
        v_next = 2.0 * v_cur - v_prev +
                 dt * dt * apply_mass_inverse(disc, -(disc.A * v_cur) + disc.B * lam);
        check_finite(v_next, guard, "solve_transmission");

        traces[n + 1] = trace_of(disc, v_next);
        rec.boundary_trace.row(n + 1) = traces[n + 1].transpose();
        boundary_step(n + 1);

        if (opts.record_energy) rec.energy.push_back(interior_energy(disc, v_cur, v_next, dt));
        if (opts.snapshot_every > 0 && (n % opts.snapshot_every == 0))
            rec.snapshots.push_back({n, v_cur});

        v_pprev = v_prev;
        v_prev = v_cur;
        v_cur = v_next;
    }

    if (N == 1) {
        rec.final_fields = {v_prev, v_prev, v_cur};
    } else {
        rec.final_fields = {v_pprev, v_prev, v_cur};
    }
    return rec;
}

SolveRecord solve_reflecting(const Discretization& disc, const NodalField& v0,
                             const TimeGrid& grid, const SolveOptions& opts) {
    const FemSpace& sp = *disc.space;
    const int N = grid.N;
    const double dt = grid.dt;
    if (v0.space != &sp) throw ConfigError("solve_reflecting: field/space mismatch");

    const double guard = opts.amp_guard * std::max(v0.coeffs.cwiseAbs().maxCoeff(), 1e-30);

    SolveRecord rec;
    rec.boundary_trace.resize(N + 1, sp.boundary_vertex_dofs.size());
    rec.lambda_history = Eigen::MatrixXd::Zero(N + 1, sp.boundary_vertex_dofs.size());

    Eigen::VectorXd v_prev = v0.coeffs;
    rec.boundary_trace.row(0) = trace_of(disc, v_prev).transpose();
    Eigen::VectorXd v_cur =
        v_prev + 0.5 * dt * dt * apply_mass_inverse(disc, -(disc.A * v_prev));
    rec.boundary_trace.row(1) = trace_of(disc, v_cur).transpose();
    if (opts.record_energy) rec.energy.push_back(interior_energy(disc, v_prev, v_cur, dt));

    Eigen::VectorXd v_pprev = v_prev;
    for (int n = 1; n < N; ++n) {
        Eigen::VectorXd v_next =
            2.0 * v_cur - v_prev + dt * dt * apply_mass_inverse(disc, -(disc.A * v_cur));
        check_finite(v_next, guard, "solve_reflecting");
        rec.boundary_trace.row(n + 1) = trace_of(disc, v_next).transpose();
        if (opts.record_energy) rec.energy.push_back(interior_energy(disc, v_cur, v_next, dt));
        if (opts.snapshot_every > 0 && (n % opts.snapshot_every == 0))
            rec.snapshots.push_back({n, v_cur});
        v_pprev = v_prev;
        v_prev = v_cur;
        v_cur = v_next;
    }
    rec.final_fields = {N >= 2 ? v_pprev : v_prev, v_prev, v_cur};
    return rec;
}

SolveRecord solve_interior_dirichlet_backward(const Discretization& disc,
                                              const Eigen::MatrixXd& g,
                                              const NodalField& final_value,
                                              const TimeGrid& grid, const SolveOptions& opts,
                                              const NodalField* final_velocity) {
    const FemSpace& sp = *disc.space;
    const int n_b = static_cast<int>(sp.boundary_vertex_dofs.size());
    const int N = grid.N;
    const double dt = grid.dt;
    if (g.rows() != N + 1 || g.cols() != n_b)
        throw ConfigError("solve_interior_dirichlet_backward: data shape mismatch");
    if (final_value.space != nullptr && final_value.space != &sp)
        throw ConfigError("solve_interior_dirichlet_backward: field/space mismatch");
    if (final_velocity && final_velocity->space != &sp)
        throw ConfigError("solve_interior_dirichlet_backward: velocity/space mismatch");

    const double amp0 = std::max({g.cwiseAbs().maxCoeff(),
                                  final_value.space ? final_value.coeffs.cwiseAbs().maxCoeff() : 0.0,
                                  1e-30});
    const double guard = opts.amp_guard * amp0;

    // March in reversed time tau = T - t; data row for tau-step n is g[N-n].
    auto impose = [&](Eigen::VectorXd& v, int n_tau) {
        const int row = N - n_tau;
        for (int k = 0; k < n_b; ++k) v[sp.boundary_vertex_dofs[k]] = g(row, k);
        for (int k = 0; k < n_b; ++k)
            v[sp.boundary_edge_dofs[k]] = 0.5 * (g(row, k) + g(row, (k + 1) % n_b));
    };

    SolveRecord rec;
    rec.boundary_trace.resize(N + 1, n_b);
    rec.lambda_history = Eigen::MatrixXd();

    Eigen::VectorXd v_prev = final_value.space ? final_value.coeffs
                                               : Eigen::VectorXd::Zero(sp.n_dofs());
    impose(v_prev, 0);
    rec.boundary_trace.row(0) = trace_of(disc, v_prev).transpose();

    // z(T - dt) = z(T) - dt z'(T) + (dt^2/2) z''(T)
    Eigen::VectorXd v_cur =
        v_prev + 0.5 * dt * dt * apply_mass_inverse(disc, -(disc.A * v_prev));
    if (final_velocity) v_cur -= dt * final_velocity->coeffs;
    impose(v_cur, 1);
    rec.boundary_trace.row(1) = trace_of(disc, v_cur).transpose();

    Eigen::VectorXd v_pprev = v_prev;
    for (int n = 1; n < N; ++n) {
        Eigen::VectorXd v_next =
            2.0 * v_cur - v_prev + dt * dt * apply_mass_inverse(disc, -(disc.A * v_cur));
        impose(v_next, n + 1);
        check_finite(v_next, guard, "solve_interior_dirichlet_backward");
        rec.boundary_trace.row(n + 1) = trace_of(disc, v_next).transpose();
        if (opts.snapshot_every > 0 && (n % opts.snapshot_every == 0))
            rec.snapshots.push_back({n, v_cur});
        v_pprev = v_prev;
        v_prev = v_cur;
        v_cur = v_next;
    }
    rec.final_fields = {N >= 2 ? v_pprev : v_prev, v_prev, v_cur};
    return rec;
}

NodalField solve_poisson_dirichlet(const Discretization& disc, const NodalField& rhs) {
    const FemSpace& sp = *disc.space;
    if (rhs.space != &sp) throw ConfigError("solve_poisson_dirichlet: field/space mismatch");
    const Eigen::VectorXd b = disc.Mplain * rhs.coeffs;
    Eigen::VectorXd b_int(disc.interior_dofs.size());
    for (size_t i = 0; i < disc.interior_dofs.size(); ++i) b_int[i] = b[disc.interior_dofs[i]];
    const Eigen::VectorXd u_int = disc.A_int_chol->solve(b_int);
    if (disc.A_int_chol->info() != Eigen::Success)
        throw NumericError("solve_poisson_dirichlet: solve failed");
    NodalField u = make_field(sp);
    for (size_t i = 0; i < disc.interior_dofs.size(); ++i)
        u.coeffs[disc.interior_dofs[i]] = u_int[i];
    return u;
}

NodalField solve_laplace_dirichlet(const Discretization& disc,
                                   const Eigen::VectorXd& boundary_values) {
    const FemSpace& sp = *disc.space;
    const int n_b = static_cast<int>(sp.boundary_vertex_dofs.size());
    if (boundary_values.size() != n_b)
        throw ConfigError("solve_laplace_dirichlet: boundary value count mismatch");

    NodalField u = make_field(sp);
    for (int k = 0; k < n_b; ++k) {
        u.coeffs[sp.boundary_vertex_dofs[k]] = boundary_values[k];
        u.coeffs[sp.boundary_edge_dofs[k]] =
            0.5 * (boundary_values[k] + boundary_values[(k + 1) % n_b]);
    }
    const Eigen::VectorXd r = disc.A * u.coeffs;
    Eigen::VectorXd b_int(disc.interior_dofs.size());
    for (size_t i = 0; i < disc.interior_dofs.size(); ++i) b_int[i] = -r[disc.interior_dofs[i]];
    const Eigen::VectorXd u_int = disc.A_int_chol->solve(b_int);
    for (size_t i = 0; i < disc.interior_dofs.size(); ++i)
        u.coeffs[disc.interior_dofs[i]] = u_int[i];
    return u;
}

double interior_energy(const Discretization& disc, const Eigen::VectorXd& v_prev,
                       const Eigen::VectorXd& v_next, double dt) {
    const Eigen::VectorXd d = (v_next - v_prev) / dt;
    return d.dot(disc.M * d) + v_next.dot(disc.A * v_prev);
}

}  // namespace pat

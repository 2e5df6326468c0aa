#include "pat/operators.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace pat {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676655900577;
}

BoundaryTrace make_trace(const BoundaryGrid& boundary, const TimeGrid& grid) {
    BoundaryTrace t;
    t.values = Eigen::MatrixXd::Zero(grid.N + 1, boundary.size());
    t.dt = grid.dt;
    t.arc_lengths = boundary.arc_lengths;
    t.radius = boundary.radius;
    return t;
}

OperatorSetup::OperatorSetup(double radius_, double h_, const SpeedField& speed_,
                             const TimeGrid& grid_, bool lumped, bool enforce_cfl)
    : radius(radius_), h(h_), speed(speed_), grid(grid_) {
    mesh = generate_disk_mesh(radius, h);
    space = std::make_shared<FemSpace>(mesh);
    boundary = extract_boundary(mesh);
    if (enforce_cfl) check_cfl(grid, speed.c_max(), h);
    disc = Discretization(*space, speed, boundary, lumped);
    weights = load_or_compute_weights(boundary, grid.N, grid.dt);
}

BoundaryTrace forward_L(const NodalField& f, const OperatorSetup& setup) {
    if (f.space != setup.space.get()) throw ConfigError("forward_L: field/space mismatch");
    const double scale = std::max(1.0, f.coeffs.cwiseAbs().maxCoeff());
    for (int i = 0; i < setup.space->n_dofs(); ++i) {
        if (setup.space->is_boundary_dof[i] && std::abs(f.coeffs[i]) > 1e-12 * scale)
            throw NumericError(
                "forward_L: initial value does not vanish on the boundary (support condition)");
    }
    const SolveRecord rec =
        solve_transmission(setup.disc, setup.weights, f, Eigen::MatrixXd(), setup.grid);
    BoundaryTrace out = make_trace(setup.boundary, setup.grid);
    out.values = rec.boundary_trace;
    return out;
}

NodalField adjoint_L(const BoundaryTrace& h, const OperatorSetup& setup) {
    const int N = setup.grid.N;
    if (h.steps() != N || h.n_b() != setup.boundary.size())
        throw ConfigError("adjoint_L: trace shape mismatch");

    Eigen::MatrixXd rho(N + 1, h.n_b());
    for (int n = 0; n <= N; ++n) rho.row(n) = h.values.row(N - n);

    NodalField zero = make_field(*setup.space);
    const SolveRecord rec = solve_transmission(setup.disc, setup.weights, zero, rho, setup.grid);

    // z'(0) = -v'(T) after the time flip, second-order one-sided difference.
    const Eigen::VectorXd dz0 =
        -(3.0 * rec.final_fields[2] - 4.0 * rec.final_fields[1] + rec.final_fields[0]) /
        (2.0 * setup.grid.dt);

    NodalField psi = make_field(*setup.space);
    for (int i = 0; i < setup.space->n_dofs(); ++i) {
        const double c = setup.speed.value(setup.space->dof_pos[i]);
        psi.coeffs[i] = dz0[i] / (c * c);
    }
    return solve_poisson_dirichlet(setup.disc, psi);
}

namespace {

// Piecewise-linear boundary mass in arc length applied to one time row.
double space_inner(const BoundaryTrace& a, const BoundaryTrace& b, int row_a, int row_b) {
    const int n = a.n_b();
    const double total = kTwoPi * a.radius;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const int kp = (k + 1) % n;
        const double len = (k + 1 < n) ? a.arc_lengths[k + 1] - a.arc_lengths[k]
                                       : total - a.arc_lengths[n - 1];
        const double u0 = a.values(row_a, k), u1 = a.values(row_a, kp);
        const double v0 = b.values(row_b, k), v1 = b.values(row_b, kp);
        acc += len * ((u0 * v0 + u1 * v1) / 3.0 + (u0 * v1 + u1 * v0) / 6.0);
    }
    return acc;
}

}  // namespace

double l2_sigma_inner(const BoundaryTrace& a, const BoundaryTrace& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
        throw ConfigError("l2_sigma_inner: shape mismatch");
    const int N = a.steps();
    double acc = 0.0;
    for (int n = 0; n <= N; ++n) {
        const double w = (n == 0 || n == N) ? 0.5 : 1.0;
        acc += w * a.dt * space_inner(a, b, n, n);
    }
    return acc;
}

double l2_sigma_norm(const BoundaryTrace& a) { return std::sqrt(l2_sigma_inner(a, a)); }

BoundaryTrace add_noise(const BoundaryTrace& m, double delta, uint64_t seed) {
    if (delta < 0.0) throw ConfigError("add_noise: delta must be >= 0");
    if (delta == 0.0) return m;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    BoundaryTrace d = m;
    for (int n = 0; n < d.values.rows(); ++n)
        for (int k = 0; k < d.values.cols(); ++k) d.values(n, k) = gauss(rng);
    const double nrm = l2_sigma_norm(d);
    if (!(nrm > 0.0)) throw NumericError("add_noise: degenerate perturbation");
    BoundaryTrace out = m;
    out.values += (delta / nrm) * d.values;
    return out;
}

BoundaryTrace resample_trace(const BoundaryTrace& trace, const BoundaryGrid& src_boundary,
                             const TimeGrid& src_grid, const BoundaryGrid& dst_boundary,
                             const TimeGrid& dst_grid) {
    if (std::abs(src_boundary.radius - dst_boundary.radius) > 1e-12 * src_boundary.radius)
        throw ConfigError("resample_trace: radius mismatch");
    if (trace.steps() != src_grid.N || trace.n_b() != src_boundary.size())
        throw ConfigError("resample_trace: trace does not match source grids");

    const double T_src = src_grid.T;
    const double tol = 1e-12 * std::max(T_src, 1.0);
    if (dst_grid.T > T_src + tol)
        throw ConfigError("resample_trace: time extrapolation rejected");

    const int n_src = src_boundary.size();
    const int n_dst = dst_boundary.size();
    const double total = kTwoPi * src_boundary.radius;

    // Spatial interpolation weights, periodic in arc length.
    std::vector<int> k0(n_dst), k1(n_dst);
    std::vector<double> wsp(n_dst);
    for (int j = 0; j < n_dst; ++j) {
        double s = dst_boundary.arc_lengths[j];
        // Arc coordinates of both grids are anchored at their first node;
        // align by angular offset of the first nodes.
        const double off =
            (dst_boundary.angles[0] - src_boundary.angles[0]) * src_boundary.radius;
        s = s + off;
        while (s < 0.0) s += total;
        while (s >= total) s -= total;
        int k = static_cast<int>(std::upper_bound(src_boundary.arc_lengths.begin(),
                                                  src_boundary.arc_lengths.end(), s) -
                                 src_boundary.arc_lengths.begin()) -
                1;
        k = std::clamp(k, 0, n_src - 1);
        const double s0 = src_boundary.arc_lengths[k];
        const double len = (k + 1 < n_src) ? src_boundary.arc_lengths[k + 1] - s0 : total - s0;
        k0[j] = k;
        k1[j] = (k + 1) % n_src;
        wsp[j] = std::clamp((s - s0) / len, 0.0, 1.0);
    }

    BoundaryTrace out = make_trace(dst_boundary, dst_grid);
    Eigen::VectorXd row_src(n_src);
    for (int n = 0; n <= dst_grid.N; ++n) {
        const double t = std::min(n * dst_grid.dt, T_src);
        const double pos = t / src_grid.dt;
        int m0 = std::clamp(static_cast<int>(std::floor(pos)), 0, src_grid.N);
        double wt = pos - m0;
        if (wt < 1e-14) wt = 0.0;
        if (m0 >= src_grid.N) {
            m0 = src_grid.N;
            wt = 0.0;
        }
        const int m1 = std::min(m0 + 1, src_grid.N);
        row_src = (1.0 - wt) * trace.values.row(m0).transpose() +
                  wt * trace.values.row(m1).transpose();
        for (int j = 0; j < n_dst; ++j)
            out.values(n, j) = (1.0 - wsp[j]) * row_src[k0[j]] + wsp[j] * row_src[k1[j]];
    }
    return out;
}

void write_trace(const BoundaryTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_trace: cannot open " + path);
    char header[128];
    std::snprintf(header, sizeof(header), "PATR1 %d %d %.17g %.17g\n", trace.n_b(),
                  trace.steps(), trace.dt, trace.radius);
    out << header;
    // time-major rows, step 0 first
    for (int n = 0; n < trace.values.rows(); ++n) {
        const Eigen::VectorXd row = trace.values.row(n).transpose();
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(8) * row.size());
    }
    if (!out) throw IoError("write_trace: write failed for " + path);
}

BoundaryTrace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_trace: cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::istringstream hs(line);
    std::string magic;
    int n_b = 0, N = 0;
    double dt = 0.0, radius = 0.0;
    hs >> magic >> n_b >> N >> dt >> radius;
    if (!hs || magic != "PATR1" || n_b <= 0 || N < 0)
        throw IoError("read_trace: bad header in " + path);

    BoundaryTrace t;
    t.dt = dt;
    t.radius = radius;
    t.arc_lengths.resize(n_b);
    for (int k = 0; k < n_b; ++k) t.arc_lengths[k] = kTwoPi * radius * k / n_b;
    t.values.resize(N + 1, n_b);
    Eigen::VectorXd row(n_b);
    for (int n = 0; n <= N; ++n) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(8) * n_b);
        if (!in) throw IoError("read_trace: truncated file " + path);
        t.values.row(n) = row.transpose();
    }
    return t;
}

}  // namespace pat

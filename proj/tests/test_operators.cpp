#include "pat/errors.hpp"
#include "pat/operators.hpp"

#include "support/fd_reference.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>

using namespace pat;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smooth deterministic test fields for the adjoint checks.
NodalField smooth_random_field(const OperatorSetup& setup, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double cx[5], cy[5], amp[5], sig[5];
    for (int i = 0; i < 5; ++i) {
        cx[i] = 0.55 * uni(rng);
        cy[i] = 0.55 * uni(rng);
        amp[i] = uni(rng);
        sig[i] = 0.12 + 0.08 * std::abs(uni(rng));
    }
    return project_analytic(
        [&](Vec2 p) {
            double v = 0.0;
            for (int i = 0; i < 5; ++i)
                v += amp[i] * gaussian_bump(p, {cx[i], cy[i]}, sig[i], setup.radius);
            return v;
        },
        *setup.space);
}

BoundaryTrace smooth_random_trace(const OperatorSetup& setup, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    BoundaryTrace h = make_trace(setup.boundary, setup.grid);
    const double a1 = uni(rng), a2 = uni(rng), a3 = uni(rng), w1 = 1.0 + std::abs(uni(rng));
    for (int n = 0; n <= setup.grid.N; ++n) {
        const double t = n * setup.grid.dt;
        for (int k = 0; k < setup.boundary.size(); ++k) {
            const double a = setup.boundary.angles[k];
            h.values(n, k) = std::sin(w1 * t + 0.4) *
                             (a1 + a2 * std::cos(a) + a3 * std::sin(2.0 * a + 0.7));
        }
    }
    return h;
}

double adjoint_mismatch(const OperatorSetup& setup, uint64_t seed) {
    const NodalField f = smooth_random_field(setup, seed);
    const BoundaryTrace h = smooth_random_trace(setup, seed + 17);
    const BoundaryTrace Lf = forward_L(f, setup);
    const NodalField Lsh = adjoint_L(h, setup);
    const double lhs = l2_sigma_inner(Lf, h);
    const double rhs = h10_inner(f, Lsh, setup.disc.A);
    return std::abs(lhs - rhs) / (l2_sigma_norm(Lf) * l2_sigma_norm(h));
}

}  // namespace

TEST_SUITE_BEGIN("operators");

TEST_CASE("forward map: zero input, linearity, support condition") {
    const SpeedField c = SpeedField::constant(1.0, 1.0);
    const TimeGrid grid = TimeGrid::from_dt(0.6, 0.25 / 15.0);
    const OperatorSetup setup(1.0, 0.25, c, grid);

    const NodalField zero = make_field(*setup.space);
    CHECK(forward_L(zero, setup).values.cwiseAbs().maxCoeff() == 0.0);

    const NodalField f1 = smooth_random_field(setup, 1);
    const NodalField f2 = smooth_random_field(setup, 2);
    NodalField combo = make_field(*setup.space);
    combo.coeffs = 1.7 * f1.coeffs - 0.4 * f2.coeffs;
    const Eigen::MatrixXd lin =
        1.7 * forward_L(f1, setup).values - 0.4 * forward_L(f2, setup).values;
    const Eigen::MatrixXd got = forward_L(combo, setup).values;
    CHECK((got - lin).cwiseAbs().maxCoeff() <= 1e-10 * lin.cwiseAbs().maxCoeff());

    const NodalField bad = project_analytic([](Vec2 p) { return p.x; }, *setup.space);
    CHECK_THROWS_AS(forward_L(bad, setup), NumericError);
}

TEST_CASE("forward trace matches the grid reference") {
    const SpeedField c = SpeedField::constant(1.0, 1.0);
    const double h = 0.1;
    const TimeGrid grid = TimeGrid::from_dt(1.2, h / 15.0);
    const OperatorSetup setup(1.0, h, c, grid);
    const NodalField f = project_analytic(
        [](Vec2 p) { return gaussian_bump(p, {0, 0}, 0.15, 1.0); }, *setup.space);
    const BoundaryTrace got = forward_L(f, setup);
    const Eigen::MatrixXd ref = oracle::fd_boundary_trace(
        [](Vec2 p) { return gaussian_bump(p, {0, 0}, 0.15, 1.0); }, c,
        setup.boundary.node_positions, grid.T, grid.N, h / 4.0);
    const double err = (got.values - ref).norm() / ref.norm();
    MESSAGE("forward trace error: ", err);
    CHECK(err <= 0.05);
}

TEST_CASE("adjoint map: zero input and linearity") {
    const SpeedField c = SpeedField::nontrapping(1.0);
    const TimeGrid grid = TimeGrid::from_dt(0.5, 0.25 / (15.0 * c.c_max()));
    const OperatorSetup setup(1.0, 0.25, c, grid);

    BoundaryTrace zero = make_trace(setup.boundary, setup.grid);
    CHECK(adjoint_L(zero, setup).coeffs.cwiseAbs().maxCoeff() == 0.0);

    const BoundaryTrace h1 = smooth_random_trace(setup, 5);
    const BoundaryTrace h2 = smooth_random_trace(setup, 6);
    BoundaryTrace combo = h1;
    combo.values = 2.5 * h1.values + h2.values;
    const Eigen::VectorXd lin =
        2.5 * adjoint_L(h1, setup).coeffs + adjoint_L(h2, setup).coeffs;
    const Eigen::VectorXd got = adjoint_L(combo, setup).coeffs;
    CHECK((got - lin).cwiseAbs().maxCoeff() <= 1e-10 * lin.cwiseAbs().maxCoeff());
}

TEST_CASE("adjoint identity at the calibration resolution") {
    const SpeedField c = SpeedField::nontrapping(1.0);
    const double h = 0.15;
    const int N = 80;
    const double dt = h / (15.0 * c.c_max());
    const OperatorSetup setup(1.0, h, c, TimeGrid::from_steps(N * dt, N));
    const double mismatch = adjoint_mismatch(setup, 42);
    MESSAGE("adjoint mismatch at h=0.15, N=80: ", mismatch);
    CHECK(mismatch <= 2e-2);
}

TEST_CASE("sigma inner product: measure, orthogonality, Cauchy-Schwarz") {
    const SpeedField c = SpeedField::constant(1.0, 1.0);
    const TimeGrid grid = TimeGrid::from_dt(0.9, 0.3 / 15.0);
    const OperatorSetup setup(1.0, 0.3, c, grid);

    BoundaryTrace ones = make_trace(setup.boundary, setup.grid);
    ones.values.setOnes();
    CHECK(l2_sigma_inner(ones, ones) ==
          doctest::Approx(grid.T * 2.0 * kPi).epsilon(1e-6));

    BoundaryTrace ca = make_trace(setup.boundary, setup.grid);
    BoundaryTrace sa = make_trace(setup.boundary, setup.grid);
    for (int n = 0; n <= grid.N; ++n)
        for (int k = 0; k < setup.boundary.size(); ++k) {
            ca.values(n, k) = std::cos(setup.boundary.angles[k]);
            sa.values(n, k) = std::sin(setup.boundary.angles[k]);
        }
    CHECK(std::abs(l2_sigma_inner(ca, sa)) <= 1e-8 * l2_sigma_norm(ca) * l2_sigma_norm(sa));

    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        BoundaryTrace a = make_trace(setup.boundary, setup.grid);
        BoundaryTrace b = make_trace(setup.boundary, setup.grid);
        for (int n = 0; n <= grid.N; ++n)
            for (int k = 0; k < setup.boundary.size(); ++k) {
                a.values(n, k) = gauss(rng);
                b.values(n, k) = gauss(rng);
            }
        CHECK(std::abs(l2_sigma_inner(a, b)) <=
              l2_sigma_norm(a) * l2_sigma_norm(b) * (1.0 + 1e-12));
    }
}

TEST_CASE("noise perturbation hits the requested distance exactly") {
    const SpeedField c = SpeedField::constant(1.0, 1.0);
    const TimeGrid grid = TimeGrid::from_dt(0.5, 0.3 / 15.0);
    const OperatorSetup setup(1.0, 0.3, c, grid);
    BoundaryTrace m = smooth_random_trace(setup, 31);

    const BoundaryTrace same = add_noise(m, 0.0, 99);
    CHECK((same.values - m.values).cwiseAbs().maxCoeff() == 0.0);

    for (const double delta : {1e-3, 0.05, 2.0}) {
        const BoundaryTrace noisy = add_noise(m, delta, 7);
        BoundaryTrace diff = noisy;
        diff.values -= m.values;
        CHECK(l2_sigma_norm(diff) == doctest::Approx(delta).epsilon(1e-12));
    }

    const BoundaryTrace n1 = add_noise(m, 0.1, 1);
    const BoundaryTrace n2 = add_noise(m, 0.1, 2);
    CHECK((n1.values - n2.values).cwiseAbs().maxCoeff() > 0.0);
    BoundaryTrace d1 = n1, d2 = n2;
    d1.values -= m.values;
    d2.values -= m.values;
    CHECK(l2_sigma_norm(d1) == doctest::Approx(l2_sigma_norm(d2)).epsilon(1e-12));
}

TEST_CASE("trace resampling: identity, constants, order, extrapolation guard") {
    const SpeedField c = SpeedField::constant(1.0, 1.0);
    const TimeGrid grid = TimeGrid::from_dt(0.5, 0.3 / 15.0);
    const OperatorSetup setup(1.0, 0.3, c, grid);
    const BoundaryTrace m = smooth_random_trace(setup, 15);

    const BoundaryTrace same =
        resample_trace(m, setup.boundary, setup.grid, setup.boundary, setup.grid);
    CHECK((same.values - m.values).cwiseAbs().maxCoeff() <=
          1e-15 * m.values.cwiseAbs().maxCoeff());

    BoundaryTrace constant = make_trace(setup.boundary, setup.grid);
    constant.values.setConstant(3.25);
    const BoundaryGrid fineb = extract_boundary(generate_disk_mesh(1.0, 0.15));
    const TimeGrid fineg = TimeGrid::from_dt(0.5, 0.15 / 15.0);
    const BoundaryTrace cre =
        resample_trace(constant, setup.boundary, setup.grid, fineb, fineg);
    CHECK((cre.values.array() - 3.25).abs().maxCoeff() == 0.0);

    // interpolation order against an analytic trace
    auto exact = [](double theta, double t) {
        return std::cos(theta) * std::sin(2.0 * t) + 0.4 * std::sin(2 * theta + t);
    };
    auto sample_err = [&](double h_src) {
        const BoundaryGrid sb = extract_boundary(generate_disk_mesh(1.0, h_src));
        const TimeGrid sg = TimeGrid::from_dt(0.5, h_src / 15.0);
        BoundaryTrace src;
        src.dt = sg.dt;
        src.radius = 1.0;
        src.arc_lengths = sb.arc_lengths;
        src.values.resize(sg.N + 1, sb.size());
        for (int n = 0; n <= sg.N; ++n)
            for (int k = 0; k < sb.size(); ++k)
                src.values(n, k) = exact(sb.angles[k], n * sg.dt);
        const BoundaryTrace dst = resample_trace(src, sb, sg, fineb, fineg);
        double err = 0.0;
        for (int n = 0; n <= fineg.N; ++n)
            for (int k = 0; k < fineb.size(); ++k)
                err = std::max(
                    err, std::abs(dst.values(n, k) - exact(fineb.angles[k], n * fineg.dt)));
        return err;
    };
    const double e1 = sample_err(0.4);
    const double e2 = sample_err(0.2);
    MESSAGE("resample errors ", e1, " -> ", e2);
    CHECK(std::log2(e1 / e2) >= 1.9);

    const TimeGrid longer = TimeGrid::from_dt(0.6, 0.15 / 15.0);
    CHECK_THROWS_AS(resample_trace(m, setup.boundary, setup.grid, fineb, longer),
                    ConfigError);
}

TEST_CASE("trace file round trip") {
    const SpeedField c = SpeedField::constant(1.0, 1.0);
    const TimeGrid grid = TimeGrid::from_dt(0.4, 0.35 / 15.0);
    const OperatorSetup setup(1.0, 0.35, c, grid);
    const BoundaryTrace m = smooth_random_trace(setup, 77);
    const std::string path =
        (std::filesystem::temp_directory_path() / "pat_trace_rt.bin").string();
    write_trace(m, path);
    const BoundaryTrace back = read_trace(path);
    CHECK(back.dt == m.dt);
    CHECK(back.radius == m.radius);
    REQUIRE(back.values.rows() == m.values.rows());
    REQUIRE(back.values.cols() == m.values.cols());
    CHECK((back.values - m.values).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_trace("/nonexistent/pat_trace.bin"), IoError);
}

TEST_SUITE_END();

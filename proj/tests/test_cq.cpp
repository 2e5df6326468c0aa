#include "pat/cq.hpp"
#include "pat/errors.hpp"
#include "pat/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <random>

using namespace pat;
using cplx = std::complex<double>;

namespace {

BoundaryGrid test_boundary(double radius, double h) {
    return extract_boundary(generate_disk_mesh(radius, h));
}

}  // namespace

TEST_SUITE_BEGIN("cq");

TEST_CASE("bdf2 quotient values") {
    CHECK(std::abs(gamma_bdf2({1.0, 0.0})) <= 1e-15);
    CHECK(gamma_bdf2({0.0, 0.0}).real() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(gamma_bdf2({-1.0, 0.0}).real() == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("contour parameters") {
    const CQConfig cfg = CQConfig::make(64, 0.01);
    CHECK(cfg.L == 128);
    CHECK(cfg.machine_eps == std::pow(2.0, -52));
    CHECK(cfg.beta == doctest::Approx(std::pow(cfg.machine_eps, 1.0 / 128.0)).epsilon(1e-15));
    for (int l = 0; l <= cfg.L / 2; ++l) CHECK(cfg.s(l).real() > 0.0);
}

TEST_CASE("scalar weights of 1/s reproduce the direct recursion") {
    // 1/s is the running-integral operator; its convolution weights must act
    // like the two-step backward-differentiation quadrature. Reference:
    // (3/2 y_n - 2 y_{n-1} + 1/2 y_{n-2}) = dt * u_n with zero history.
    const int N = 64;
    const double dt = 0.02;
    const auto w = scalar_cq_weights([](cplx s) { return 1.0 / s; }, N, dt);

    auto bdf2_response = [&](const std::vector<double>& u) {
        std::vector<double> y(N + 1, 0.0);
        for (int n = 0; n <= N; ++n) {
            const double ym1 = n >= 1 ? y[n - 1] : 0.0;
            const double ym2 = n >= 2 ? y[n - 2] : 0.0;
            y[n] = (dt * u[n] + 2.0 * ym1 - 0.5 * ym2) / 1.5;
        }
        return y;
    };
    auto cq_response = [&](const std::vector<double>& u, int n) {
        cplx acc(0.0, 0.0);
        for (int j = 0; j <= n; ++j) acc += w[n - j] * u[j];
        return acc;
    };

    // step response, the calibrated comparison
    const std::vector<double> ones(N + 1, 1.0);
    const std::vector<double> y_step = bdf2_response(ones);
    for (int n = 0; n <= N; ++n) {
        const cplx acc = cq_response(ones, n);
        CHECK(std::abs(acc.real() - y_step[n]) <= 1e-8);
        CHECK(std::abs(acc.imag()) <= 1e-8);
    }

    // random input; the late weights carry the amplified contour round-off,
    // so the allowance is looser here
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> u(N + 1);
    for (auto& x : u) x = uni(rng);
    const std::vector<double> y_ref = bdf2_response(u);
    for (int n = 0; n <= N; ++n)
        CHECK(std::abs(cq_response(u, n).real() - y_ref[n]) <= 1e-7);
}

TEST_CASE("weight matrices are real and the mirrored path matches the full path") {
    const BoundaryGrid grid = test_boundary(1.0, 0.45);
    const int N = 64;
    const double dt = 0.45 / 15.0;

    // reference path: all frequencies assembled independently
    const CQWeightSet full = compute_cq_weights(grid, N, dt, false);
    CHECK(full.max_imag_residue <= 1e-6);

    const CQWeightSet fast = compute_cq_weights(grid, N, dt, true);
    CHECK(fast.max_imag_residue <= 1e-6);

    double max_entry = 0.0, max_diff = 0.0;
    for (int n = 0; n <= N; ++n) {
        max_entry = std::max(max_entry, full.Wv[n].cwiseAbs().maxCoeff());
        max_diff = std::max(max_diff, (full.Wv[n] - fast.Wv[n]).cwiseAbs().maxCoeff());
        max_diff = std::max(max_diff, (full.Wk[n] - fast.Wk[n]).cwiseAbs().maxCoeff());
    }
    CHECK(max_diff <= 1e-6 * max_entry);

    // single-layer symmetry
    for (int n = 0; n <= N; n += 7)
        CHECK((fast.Wv[n] - fast.Wv[n].transpose()).cwiseAbs().maxCoeff() <=
              1e-10 * std::max(1e-300, fast.Wv[n].cwiseAbs().maxCoeff()));

    // no blow-up across the range
    for (int n = 0; n <= N; ++n)
        CHECK(fast.Wv[n].cwiseAbs().maxCoeff() <= 50.0 * max_entry + 1e-6);
}

TEST_CASE("weight decay stays bounded out to N = 512") {
    const BoundaryGrid grid = test_boundary(1.0, 0.45);
    const CQWeightSet w = compute_cq_weights(grid, 512, 0.03);
    double max_entry = 0.0;
    for (int n = 0; n <= 512; ++n)
        max_entry = std::max(max_entry, w.Wv[n].cwiseAbs().maxCoeff());
    CHECK(std::isfinite(max_entry));
    double late = 0.0;
    for (int n = 450; n <= 512; ++n) late = std::max(late, w.Wv[n].cwiseAbs().maxCoeff());
    CHECK(late <= max_entry);
}

TEST_CASE("forward transform of the weights recovers the sampled kernels") {
    const BoundaryGrid grid = test_boundary(1.0, 0.45);
    const int N = 24;
    const double dt = 0.03;
    const CQConfig cfg = CQConfig::make(N, dt);
    // weights for every index of the transform length, same contour
    const CQWeightSet w = compute_cq_weights(grid, N, dt, true, cfg.L - 1);

    for (const int l : {0, 3, 17, cfg.L / 2}) {
        const cplx s = cfg.s(l);
        const Eigen::MatrixXcd A = assemble_single_layer_matrix(grid, s);
        Eigen::MatrixXcd rec = Eigen::MatrixXcd::Zero(grid.size(), grid.size());
        for (int n = 0; n < cfg.L; ++n) {
            const double phi = 2.0 * 3.14159265358979323846 * n * l / cfg.L;
            rec += std::pow(cfg.beta, n) * cplx(std::cos(phi), std::sin(phi)) * w.Wv[n];
        }
        const double scale = A.cwiseAbs().maxCoeff();
        CHECK((rec - A).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    }
}

TEST_CASE("retarded convolution: zeros, linearity, shift invariance, causality") {
    const BoundaryGrid grid = test_boundary(1.0, 0.45);
    const int N = 32;
    const CQWeightSet w = compute_cq_weights(grid, N, 0.03);
    const int n_b = grid.size();

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Eigen::VectorXd> phi(N + 1), zero(N + 1);
    for (int j = 0; j <= N; ++j) {
        phi[j] = Eigen::VectorXd::NullaryExpr(n_b, [&](Eigen::Index) { return uni(rng); });
        zero[j] = Eigen::VectorXd::Zero(n_b);
    }

    CHECK(retarded_convolve(w, 'V', zero, N).cwiseAbs().maxCoeff() == 0.0);

    // linearity
    std::vector<Eigen::VectorXd> phi2(N + 1);
    for (int j = 0; j <= N; ++j) phi2[j] = 3.5 * phi[j];
    const Eigen::VectorXd a = retarded_convolve(w, 'V', phi, N);
    const Eigen::VectorXd b = retarded_convolve(w, 'V', phi2, N);
    CHECK((b - 3.5 * a).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());

    // impulse at j0: zero output strictly before, shifted replica afterwards
    const int j0 = 9;
    std::vector<Eigen::VectorXd> imp(N + 1, Eigen::VectorXd::Zero(n_b));
    imp[j0] = phi[0];
    for (int n = 0; n < j0; ++n) {
        const auto out = retarded_convolve(
            w, 'K', std::vector<Eigen::VectorXd>(imp.begin(), imp.begin() + n + 1), n);
        CHECK(out.cwiseAbs().maxCoeff() == 0.0);
    }
    std::vector<Eigen::VectorXd> imp0(N + 1, Eigen::VectorXd::Zero(n_b));
    imp0[0] = phi[0];
    for (int n = j0; n <= N; ++n) {
        const auto shifted = retarded_convolve(
            w, 'K', std::vector<Eigen::VectorXd>(imp.begin(), imp.begin() + n + 1), n);
        const auto base = retarded_convolve(
            w, 'K', std::vector<Eigen::VectorXd>(imp0.begin(), imp0.begin() + n - j0 + 1),
            n - j0);
        CHECK((shifted - base).cwiseAbs().maxCoeff() <=
              1e-12 * (1.0 + base.cwiseAbs().maxCoeff()));
    }

    CHECK_THROWS_AS(retarded_convolve(w, 'X', phi, N), ConfigError);
    CHECK_THROWS_AS(retarded_convolve(w, 'V', phi, N - 1), ConfigError);
}

TEST_CASE("weight cache round trip") {
    const BoundaryGrid grid = test_boundary(1.0, 0.45);
    const CQWeightSet w = compute_cq_weights(grid, 16, 0.05);
    const std::string path =
        (std::filesystem::temp_directory_path() / "pat_cq_cache_rt.bin").string();
    write_weight_cache(w, path);
    CQWeightSet back;
    REQUIRE(read_weight_cache(back, grid.size(), 16, 0.05, grid.radius, path));
    for (int n = 0; n <= 16; ++n) {
        CHECK((back.Wv[n] - w.Wv[n]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.Wk[n] - w.Wk[n]).cwiseAbs().maxCoeff() == 0.0);
    }
    CQWeightSet reject;
    CHECK_FALSE(read_weight_cache(reject, grid.size(), 17, 0.05, grid.radius, path));
    CHECK_FALSE(read_weight_cache(reject, grid.size(), 16, 0.051, grid.radius, path));
    std::filesystem::remove(path);

    CHECK(weight_cache_key(grid, 16, 0.05) != weight_cache_key(grid, 17, 0.05));
    CHECK(weight_cache_key(grid, 16, 0.05) == weight_cache_key(grid, 16, 0.05));
}

TEST_SUITE_END();

#include "pat/bessel.hpp"
#include "pat/cq.hpp"
#include "pat/operators.hpp"
#include "pat/phantoms.hpp"

#include <benchmark/benchmark.h>

#include <complex>
#include <memory>

namespace {

void bm_bessel_k01(benchmark::State& state) {
    const std::complex<double> z(static_cast<double>(state.range(0)), 3.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pat::bessel_k01(z));
    }
}
BENCHMARK(bm_bessel_k01)->Arg(1)->Arg(10)->Arg(100);

void bm_cq_weights(benchmark::State& state) {
    const pat::BoundaryGrid grid =
        pat::extract_boundary(pat::generate_disk_mesh(1.0, 0.3));
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pat::compute_cq_weights(grid, N, 0.02));
    }
}
BENCHMARK(bm_cq_weights)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void bm_retarded_convolve(benchmark::State& state) {
    const pat::BoundaryGrid grid =
        pat::extract_boundary(pat::generate_disk_mesh(1.0, 0.2));
    const int N = 128;
    const pat::CQWeightSet w = pat::compute_cq_weights(grid, N, 0.01);
    std::vector<Eigen::VectorXd> hist(N + 1, Eigen::VectorXd::Ones(grid.size()));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pat::retarded_convolve(w, 'V', hist, N));
    }
}
BENCHMARK(bm_retarded_convolve)->Unit(benchmark::kMicrosecond);

void bm_forward_solve(benchmark::State& state) {
    const pat::SpeedField c = pat::SpeedField::nontrapping(1.0);
    const double h = 0.2;
    const pat::TimeGrid grid = pat::TimeGrid::from_dt(0.8, h / (15.0 * c.c_max()));
    static const pat::OperatorSetup setup(1.0, h, c, grid);
    const pat::NodalField f = pat::project_analytic(
        [](pat::Vec2 p) { return pat::ghost_phantom(p, 1.0); }, *setup.space);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pat::forward_L(f, setup));
    }
}
BENCHMARK(bm_forward_solve)->Unit(benchmark::kMillisecond);

void bm_travel_time(benchmark::State& state) {
    const pat::SpeedField c = pat::SpeedField::nontrapping(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pat::estimate_T0(c, 0.01));
    }
}
BENCHMARK(bm_travel_time)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

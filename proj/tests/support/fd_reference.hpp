// Independent reference for the free-space wave propagation: second-order
// finite differences on a large padded Cartesian grid, so that no reflection
// from the artificial box edge reaches the measurement circle within (0, T).
#pragma once

#include "pat/phantoms.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Trace of the free-space solution at the given circle nodes and times
/// t_n = n*dt, n = 0..N. grid_h is the Cartesian spacing.
inline Eigen::MatrixXd fd_boundary_trace(const std::function<double(pat::Vec2)>& f,
                                         const pat::SpeedField& speed,
                                         const std::vector<pat::Vec2>& nodes, double T, int N,
                                         double grid_h) {
    const double dt = T / N;
    const double c_max = speed.c_max();
    double r_nodes = 0.0;
    for (const auto& p : nodes) r_nodes = std::max(r_nodes, pat::norm(p));
    const double R_pad = r_nodes + c_max * T + 0.5;

    const int n = 2 * static_cast<int>(std::ceil(R_pad / grid_h)) + 1;
    const double x0 = -grid_h * ((n - 1) / 2);
    auto at = [&](int i, int j) { return static_cast<size_t>(i) * n + j; };

    // sub-stepping to satisfy the grid CFL limit
    const double dt_stable = 0.7 * grid_h / (std::sqrt(2.0) * c_max);
    const int sub = std::max(1, static_cast<int>(std::ceil(dt / dt_stable)));
    const double dtf = dt / sub;

    std::vector<double> y_prev(static_cast<size_t>(n) * n), y_cur(y_prev.size()),
        y_next(y_prev.size()), c2(y_prev.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const pat::Vec2 p{x0 + i * grid_h, x0 + j * grid_h};
            y_prev[at(i, j)] = f(p);
            const double c = speed.value(p);
            c2[at(i, j)] = c * c;
        }
    }

    auto laplace_step = [&](const std::vector<double>& a, const std::vector<double>& b,
                            std::vector<double>& out, double factor) {
        const double inv_h2 = 1.0 / (grid_h * grid_h);
        for (int i = 1; i + 1 < n; ++i) {
            for (int j = 1; j + 1 < n; ++j) {
                const size_t k = at(i, j);
                const double lap =
                    (a[k - n] + a[k + n] + a[k - 1] + a[k + 1] - 4.0 * a[k]) * inv_h2;
                out[k] = 2.0 * a[k] - b[k] + factor * c2[k] * lap;
            }
        }
    };

    auto sample = [&](const std::vector<double>& y, Eigen::MatrixXd& trace, int row) {
        for (size_t q = 0; q < nodes.size(); ++q) {
            const double fx = (nodes[q].x - x0) / grid_h;
            const double fy = (nodes[q].y - x0) / grid_h;
            const int i = static_cast<int>(std::floor(fx));
            const int j = static_cast<int>(std::floor(fy));
            const double wx = fx - i, wy = fy - j;
            trace(row, static_cast<Eigen::Index>(q)) =
                (1 - wx) * (1 - wy) * y[at(i, j)] + wx * (1 - wy) * y[at(i + 1, j)] +
                (1 - wx) * wy * y[at(i, j + 1)] + wx * wy * y[at(i + 1, j + 1)];
        }
    };

    Eigen::MatrixXd trace(N + 1, static_cast<Eigen::Index>(nodes.size()));
    sample(y_prev, trace, 0);

    // first sub-step from y'(0) = 0
    {
        const double inv_h2 = 1.0 / (grid_h * grid_h);
        for (int i = 1; i + 1 < n; ++i) {
            for (int j = 1; j + 1 < n; ++j) {
                const size_t k = at(i, j);
                const double lap = (y_prev[k - n] + y_prev[k + n] + y_prev[k - 1] +
                                    y_prev[k + 1] - 4.0 * y_prev[k]) *
                                   inv_h2;
                y_cur[k] = y_prev[k] + 0.5 * dtf * dtf * c2[k] * lap;
            }
        }
    }

    int done_sub = 1;
    for (int row = 1; row <= N; ++row) {
        const int target = row * sub;
        while (done_sub < target) {
            laplace_step(y_cur, y_prev, y_next, dtf * dtf);
            std::swap(y_prev, y_cur);
            std::swap(y_cur, y_next);
            ++done_sub;
        }
        sample(y_cur, trace, row);
    }
    return trace;
}

}  // namespace oracle

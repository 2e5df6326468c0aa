#include "pat/phantoms.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace pat {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// ---------------------------------------------------------------------------
// Speed fields
// ---------------------------------------------------------------------------

static double raw_speed(SpeedKind kind, double constant_value, Vec2 x) {
    switch (kind) {
        case SpeedKind::Constant:
            return constant_value;
        case SpeedKind::Nontrapping:
            return 1.0 + 0.2 * std::sin(2.0 * kPi * x.x) + 0.1 * std::cos(2.0 * kPi * x.y);
        case SpeedKind::Trapping:
            return 1.0 + 0.5 * std::sin(-3.0 * kPi * x.x) * std::cos(3.0 * kPi * x.y);
    }
    return 1.0;
}

double SpeedField::value(Vec2 x) const {
    if (kind == SpeedKind::Constant) return constant_value;
    const double rho = norm(x);
    if (rho >= radius - 0.5 * eps_smooth) return 1.0;
    const double raw = raw_speed(kind, constant_value, x);
    if (rho <= radius - eps_smooth) return raw;
    const double t = (rho - (radius - eps_smooth)) / (0.5 * eps_smooth);
    return 1.0 + (raw - 1.0) * (1.0 - smoothstep5(t));
}

double SpeedField::c_min() const {
    switch (kind) {
        case SpeedKind::Constant: return constant_value;
        case SpeedKind::Nontrapping: return 0.7;
        case SpeedKind::Trapping: return 0.5;
    }
    return 1.0;
}

double SpeedField::c_max() const {
    switch (kind) {
        case SpeedKind::Constant: return constant_value;
        case SpeedKind::Nontrapping: return 1.3;
        case SpeedKind::Trapping: return 1.5;
    }
    return 1.0;
}

SpeedField SpeedField::constant(double c, double radius) {
    if (c <= 0.0) throw ConfigError("SpeedField: constant speed must be positive");
    SpeedField f;
    f.kind = SpeedKind::Constant;
    f.constant_value = c;
    f.radius = radius;
    f.eps_smooth = 0.1 * radius;
    return f;
}

SpeedField SpeedField::nontrapping(double radius) {
    SpeedField f;
    f.kind = SpeedKind::Nontrapping;
    f.radius = radius;
    f.eps_smooth = 0.1 * radius;
    return f;
}

SpeedField SpeedField::trapping(double radius) {
    SpeedField f;
    f.kind = SpeedKind::Trapping;
    f.radius = radius;
    f.eps_smooth = 0.1 * radius;
    return f;
}

SpeedField SpeedField::parse(const std::string& name, double radius) {
    if (name == "constant") return constant(1.0, radius);
    if (name == "nontrapping") return nontrapping(radius);
    if (name == "trapping") return trapping(radius);
    // "constant:2.0" style override
    if (name.rfind("constant:", 0) == 0)
        return constant(std::stod(name.substr(9)), radius);
    throw ConfigError("unknown speed field '" + name + "'");
}

// ---------------------------------------------------------------------------
// Phantoms
// ---------------------------------------------------------------------------

namespace {

struct Ellipse {
    double intensity, a, b, x0, y0, phi_deg;
};

// Standard low-contrast Shepp-Logan table.
constexpr Ellipse kSheppLogan[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
};

}  // namespace

double shepp_logan(Vec2 x, double smoothing, double radius) {
    // Outer ellipse has semi-axis 0.92; scale so it fits radius 0.9*R.
    const double scale = 0.9 * radius / 0.92;
    double value = 0.0;
    for (const Ellipse& e : kSheppLogan) {
        const double a = e.a * scale, b = e.b * scale;
        const double phi = e.phi_deg * kPi / 180.0;
        const double dx = x.x - e.x0 * scale;
        const double dy = x.y - e.y0 * scale;
        const double xi = std::cos(phi) * dx + std::sin(phi) * dy;
        const double eta = -std::sin(phi) * dx + std::cos(phi) * dy;
        const double q = (xi / a) * (xi / a) + (eta / b) * (eta / b);
        // Inward geometric depth from the ellipse edge, ramped over a band
        // of total width 2*smoothing lying inside the edge.
        const double depth = (1.0 - std::sqrt(q)) * std::min(a, b);
        if (depth <= 0.0) continue;
        value += e.intensity * smoothstep5(depth / (2.0 * smoothing));
    }
    return value;
}

double ghost_phantom(Vec2 x, double radius) {
    auto disk = [&](Vec2 center, double r_in, double r_out, double peak) {
        const double d = norm(x - center);
        if (d >= r_out) return 0.0;
        return peak * smoothstep5((r_out - d) / (r_out - r_in));
    };

    double value = 0.0;
    value += disk({-0.38 * radius, 0.22 * radius}, 0.14 * radius, 0.24 * radius, 1.0);
    value += disk({0.25 * radius, -0.18 * radius}, 0.07 * radius, 0.14 * radius, 0.8);

    // Annular arc about the +x axis.
    const double r_mid = 0.62 * radius;
    const double w_half = 0.08 * radius;
    const double rho = norm(x);
    const double d = std::abs(rho - r_mid);
    if (d < w_half) {
        const double radial = smoothstep5((w_half - d) / (0.5 * w_half));
        double theta = std::atan2(x.y, x.x);  // axis at theta = 0
        const double theta_half = 60.0 * kPi / 180.0;
        const double theta_ramp = 15.0 * kPi / 180.0;
        const double angular = smoothstep5((theta_half - std::abs(theta)) / theta_ramp);
        value += 0.6 * radial * angular;
    }
    return value;
}

double gaussian_bump(Vec2 x, Vec2 center, double sigma, double radius) {
    const double rho = norm(x);
    if (rho >= 0.9 * radius) return 0.0;
    const double window = smoothstep5((0.9 * radius - rho) / (0.05 * radius));
    const double d2 = dot(x - center, x - center);
    return window * std::exp(-d2 / (2.0 * sigma * sigma));
}

double Phantom::value(Vec2 x) const {
    switch (kind) {
        case PhantomKind::SheppLogan: return shepp_logan(x, smoothing, radius);
        case PhantomKind::Ghosts: return ghost_phantom(x, radius);
        case PhantomKind::Gaussian: return gaussian_bump(x, {0.0, 0.0}, 0.15 * radius, radius);
        case PhantomKind::None: return 0.0;
    }
    return 0.0;
}

Phantom Phantom::parse(const std::string& name, double radius, double smoothing) {
    Phantom p;
    p.radius = radius;
    p.smoothing = smoothing;
    if (name == "shepp_logan") p.kind = PhantomKind::SheppLogan;
    else if (name == "ghosts") p.kind = PhantomKind::Ghosts;
    else if (name == "gaussian") p.kind = PhantomKind::Gaussian;
    else if (name == "none") p.kind = PhantomKind::None;
    else throw ConfigError("unknown phantom '" + name + "'");
    return p;
}

// ---------------------------------------------------------------------------
// Travel-time estimate (fast marching)
// ---------------------------------------------------------------------------

double estimate_T0(const SpeedField& field, double grid_spacing) {
    const double R = field.radius;
    if (!(grid_spacing > 0.0) || grid_spacing > R / 20.0)
        throw ConfigError("estimate_T0: grid_spacing must be in (0, radius/20]");

    const double g = grid_spacing;
    const int n = static_cast<int>(std::llround(2.0 * R / g)) + 1;
    auto coord = [&](int i) { return -R + (2.0 * R) * i / (n - 1); };
    auto at = [&](int i, int j) { return i * n + j; };

    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) * n, INF);
    std::vector<char> accepted(static_cast<size_t>(n) * n, 0);
    std::vector<char> inside(static_cast<size_t>(n) * n, 0);

    using HeapItem = std::pair<double, int>;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;

    // Seed a collar just inside the circle. The speed is identically 1 there
    // (mollified field), so the travel time to the boundary is R - |x|.
    const double collar = std::max(0.5 * field.eps_smooth, 2.0 * g);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 p{coord(i), coord(j)};
            const double rho = norm(p);
            if (rho >= R) continue;
            inside[at(i, j)] = 1;
            if (rho >= R - collar) {
                // Radial integral of 1/c from |x| to R (midpoint rule per cell);
                // exact when c == 1 on the collar.
                const int steps = std::max(1, static_cast<int>(std::ceil((R - rho) / g)));
                double t = 0.0;
                const double dr = (R - rho) / steps;
                const Vec2 dir = (rho > 0.0) ? Vec2{p.x / rho, p.y / rho} : Vec2{1.0, 0.0};
                for (int s = 0; s < steps; ++s) {
                    const double rmid = rho + (s + 0.5) * dr;
                    t += dr / field.value({rmid * dir.x, rmid * dir.y});
                }
                u[at(i, j)] = t;
                heap.push({t, at(i, j)});
            }
        }
    }
    if (heap.empty()) throw NumericError("estimate_T0: no seed nodes inside the disk");

    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    double t_max = 0.0;

    while (!heap.empty()) {
        auto [val, idx] = heap.top();
        heap.pop();
        if (accepted[idx] || val > u[idx]) continue;
        accepted[idx] = 1;
        t_max = std::max(t_max, val);

        const int i = idx / n, j = idx % n;
        for (int k = 0; k < 4; ++k) {
            const int ni = i + di[k], nj = j + dj[k];
            if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;
            const int nidx = at(ni, nj);
            if (!inside[nidx] || accepted[nidx]) continue;

            // Upwind quadratic update with slowness 1/c.
            const double f = g / field.value({coord(ni), coord(nj)});
            double a = INF, b = INF;
            if (ni > 0 && accepted[at(ni - 1, nj)]) a = std::min(a, u[at(ni - 1, nj)]);
            if (ni + 1 < n && accepted[at(ni + 1, nj)]) a = std::min(a, u[at(ni + 1, nj)]);
            if (nj > 0 && accepted[at(ni, nj - 1)]) b = std::min(b, u[at(ni, nj - 1)]);
            if (nj + 1 < n && accepted[at(ni, nj + 1)]) b = std::min(b, u[at(ni, nj + 1)]);

            double cand;
            if (a > b) std::swap(a, b);
            if (b == INF || b - a >= f) {
                cand = a + f;
            } else {
                cand = 0.5 * (a + b + std::sqrt(2.0 * f * f - (a - b) * (a - b)));
            }
            if (cand < u[nidx]) {
                u[nidx] = cand;
                heap.push({cand, nidx});
            }
        }
    }
    return t_max;
}

}  // namespace pat

#include "pat/geometry.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace pat {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

double BoundaryGrid::segment_length(int k) const {
    const int n = size();
    const double a0 = angles[k];
    double a1 = angles[(k + 1) % n];
    if (a1 <= a0) a1 += 2.0 * kPi;
    return radius * (a1 - a0);
}

TriMesh generate_disk_mesh(double radius, double h) {
    if (!std::isfinite(radius) || !std::isfinite(h))
        throw ConfigError("generate_disk_mesh: non-finite radius or h");
    if (radius <= 0.0) throw ConfigError("generate_disk_mesh: radius must be positive");
    if (h <= 0.0 || h >= radius)
        throw ConfigError("generate_disk_mesh: need 0 < h < radius");

    // Concentric-ring layout: ring k carries 6k equally spaced vertices.
    // Ring spacing is h*sqrt(3)/2 so the near-equilateral triangles have
    // edges close to (but never above) h.
    const int m = static_cast<int>(std::ceil(radius / (h * std::sqrt(3.0) / 2.0)));

    TriMesh mesh;
    mesh.h = h;
    mesh.radius = radius;
    mesh.vertices.reserve(1 + 3 * m * (m + 1));

    mesh.vertices.push_back({0.0, 0.0});
    std::vector<int> ring_start(m + 1, 0);  // ring 0 = center
    for (int k = 1; k <= m; ++k) {
        ring_start[k] = static_cast<int>(mesh.vertices.size());
        const double r = radius * static_cast<double>(k) / m;
        const int nk = 6 * k;
        for (int j = 0; j < nk; ++j) {
            const double th = 2.0 * kPi * j / nk;
            mesh.vertices.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }

    // Band triangulation, sector by sector. In sector s of band k the inner
    // ring contributes k-1 local nodes and the outer ring k+1 of them.
    for (int k = 1; k <= m; ++k) {
        const int inner_count = (k == 1) ? 1 : 6 * (k - 1);
        const int outer_count = 6 * k;
        const int inner0 = (k == 1) ? 0 : ring_start[k - 1];
        const int outer0 = ring_start[k];
        for (int s = 0; s < 6; ++s) {
            auto outer = [&](int i) { return outer0 + (s * k + i) % outer_count; };
            auto inner = [&](int i) {
                if (k == 1) return 0;
                return inner0 + (s * (k - 1) + i) % inner_count;
            };
            for (int i = 0; i < k; ++i)
                mesh.triangles.push_back({outer(i), outer(i + 1), inner(i)});
            for (int i = 0; i + 1 < k; ++i)
                mesh.triangles.push_back({inner(i), outer(i + 1), inner(i + 1)});
        }
    }

    mesh.boundary_nodes.resize(6 * m);
    for (int j = 0; j < 6 * m; ++j) mesh.boundary_nodes[j] = ring_start[m] + j;

    return mesh;
}

BoundaryGrid extract_boundary(const TriMesh& mesh) {
    if (mesh.boundary_nodes.empty())
        throw ConfigError("extract_boundary: mesh has no boundary nodes");

    BoundaryGrid grid;
    grid.radius = mesh.radius;
    const int n = static_cast<int>(mesh.boundary_nodes.size());
    grid.node_positions.reserve(n);
    grid.angles.reserve(n);
    for (int idx : mesh.boundary_nodes) {
        const Vec2& p = mesh.vertices[idx];
        grid.node_positions.push_back(p);
        double a = std::atan2(p.y, p.x);
        if (a < 0.0) a += 2.0 * kPi;
        grid.angles.push_back(a);
    }

    grid.arc_lengths.resize(n);
    grid.arc_lengths[0] = 0.0;
    for (int k = 1; k < n; ++k) {
        double da = grid.angles[k] - grid.angles[k - 1];
        if (da <= 0.0) da += 2.0 * kPi;
        grid.arc_lengths[k] = grid.arc_lengths[k - 1] + grid.radius * da;
    }

    grid.segments.reserve(n);
    for (int k = 0; k < n; ++k) grid.segments.push_back({k, (k + 1) % n});

    return grid;
}

double min_triangle_angle_deg(const TriMesh& mesh) {
    double min_angle = 180.0;
    for (const auto& t : mesh.triangles) {
        const Vec2& a = mesh.vertices[t[0]];
        const Vec2& b = mesh.vertices[t[1]];
        const Vec2& c = mesh.vertices[t[2]];
        const double la = norm(c - b), lb = norm(a - c), lc = norm(b - a);
        auto angle = [](double opp, double s1, double s2) {
            double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
            cosv = std::clamp(cosv, -1.0, 1.0);
            return std::acos(cosv) * 180.0 / kPi;
        };
        min_angle = std::min({min_angle, angle(la, lb, lc), angle(lb, lc, la),
                              angle(lc, la, lb)});
    }
    return min_angle;
}

double max_edge_length(const TriMesh& mesh) {
    double mx = 0.0;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e)
            mx = std::max(mx, norm(mesh.vertices[t[e]] - mesh.vertices[t[(e + 1) % 3]]));
    return mx;
}

MeshValidation validate_mesh(const TriMesh& mesh) {
    MeshValidation report;
    auto fail = [&](const std::string& msg) {
        report.ok = false;
        report.failures.push_back(msg);
    };

    for (size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        if (signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <= 0.0) {
            fail("triangle " + std::to_string(i) + " is not counter-clockwise");
            break;
        }
    }

    const int n_b = static_cast<int>(mesh.boundary_nodes.size());
    const int n_v = static_cast<int>(mesh.vertices.size());
    for (int idx : mesh.boundary_nodes) {
        const double dev = std::abs(norm(mesh.vertices[idx]) - mesh.radius);
        if (dev > 1e-12 * mesh.radius) {
            fail("boundary vertex " + std::to_string(idx) + " off the circle by " +
                 std::to_string(dev));
            break;
        }
    }
    {
        std::vector<int> sorted = mesh.boundary_nodes;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail("boundary node list repeats a vertex");
        if (!sorted.empty() && (sorted.front() != n_v - n_b || sorted.back() != n_v - 1))
            fail("boundary nodes are not the trailing vertex block");
        double poly_area = 0.0;
        for (int k = 0; k < n_b; ++k) {
            const Vec2& p = mesh.vertices[mesh.boundary_nodes[k]];
            const Vec2& q = mesh.vertices[mesh.boundary_nodes[(k + 1) % n_b]];
            poly_area += 0.5 * (p.x * q.y - q.x * p.y);
        }
        if (poly_area <= 0.0) fail("boundary polygon is not counter-clockwise");
    }

    // Edge manifoldness: interior edges in exactly 2 triangles, boundary
    // edges (consecutive boundary nodes) in exactly 1.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    for (const auto& [edge, count] : edge_count) {
        if (count > 2) {
            fail("edge shared by more than 2 triangles");
            break;
        }
    }
    std::map<std::pair<int, int>, bool> is_boundary_edge;
    for (int k = 0; k < n_b; ++k) {
        int a = mesh.boundary_nodes[k], b = mesh.boundary_nodes[(k + 1) % n_b];
        if (a > b) std::swap(a, b);
        is_boundary_edge[{a, b}] = true;
        auto it = edge_count.find({a, b});
        if (it == edge_count.end() || it->second != 1) {
            fail("boundary edge not in exactly 1 triangle");
            break;
        }
    }
    for (const auto& [edge, count] : edge_count) {
        if (count == 1 && !is_boundary_edge.count(edge)) {
            fail("interior edge in only 1 triangle");
            break;
        }
    }

    const double max_edge = max_edge_length(mesh);
    if (max_edge > 2.0 * mesh.h)
        fail("max edge length " + std::to_string(max_edge) + " exceeds 2h");
    const double min_angle = min_triangle_angle_deg(mesh);
    if (min_angle < 20.0)
        fail("min triangle angle " + std::to_string(min_angle) + " below 20 degrees");

    return report;
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_mesh: cannot open " + path);
    out << "MESH2 " << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' '
        << mesh.boundary_nodes.size() << '\n';
    char buf[64];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", v.x, v.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (int idx : mesh.boundary_nodes) out << idx << '\n';
    if (!out) throw IoError("write_mesh: write failed for " + path);
}

TriMesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_mesh: cannot open " + path);
    std::string magic;
    size_t nv = 0, nt = 0, nb = 0;
    in >> magic >> nv >> nt >> nb;
    if (!in || magic != "MESH2") throw IoError("read_mesh: bad header in " + path);

    TriMesh mesh;
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices) in >> v.x >> v.y;
    mesh.triangles.resize(nt);
    for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
    mesh.boundary_nodes.resize(nb);
    for (auto& idx : mesh.boundary_nodes) in >> idx;
    if (!in) throw IoError("read_mesh: truncated file " + path);

    double r = 0.0;
    for (int idx : mesh.boundary_nodes) r = std::max(r, norm(mesh.vertices[idx]));
    mesh.radius = r;
    mesh.h = max_edge_length(mesh);
    return mesh;
}

}  // namespace pat

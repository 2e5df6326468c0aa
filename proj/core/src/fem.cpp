#include "pat/fem.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

namespace pat {

namespace {

// Degree-5 symmetric 7-point rule on the reference triangle (weights sum 1).
struct QuadRule {
    std::array<std::array<double, 3>, 7> bary;
    std::array<double, 7> w;
};

QuadRule degree5_rule() {
    QuadRule q;
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0, wa = (155.0 - s15) / 1200.0;
    const double b = (6.0 + s15) / 21.0, wb = (155.0 + s15) / 1200.0;
    q.bary[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    q.w[0] = 9.0 / 40.0;
    q.bary[1] = {a, a, 1 - 2 * a};
    q.bary[2] = {a, 1 - 2 * a, a};
    q.bary[3] = {1 - 2 * a, a, a};
    q.w[1] = q.w[2] = q.w[3] = wa;
    q.bary[4] = {b, b, 1 - 2 * b};
    q.bary[5] = {b, 1 - 2 * b, b};
    q.bary[6] = {1 - 2 * b, b, b};
    q.w[4] = q.w[5] = q.w[6] = wb;
    return q;
}

// Interpolatory basis at the 7 nodes (3 vertices, 3 midpoints, barycenter).
// Local ordering: vertices 0..2, edge opposite vertex i -> 3+i, bubble 6.
void basis_values(const std::array<double, 3>& l, std::array<double, 7>& phi) {
    const double bub = l[0] * l[1] * l[2];
    for (int i = 0; i < 3; ++i) phi[i] = l[i] * (2.0 * l[i] - 1.0) + 3.0 * bub;
    for (int i = 0; i < 3; ++i) phi[3 + i] = 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3] - 12.0 * bub;
    phi[6] = 27.0 * bub;
}

void basis_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& gl,
                     std::array<Vec2, 7>& grad) {
    const Vec2 gbub = l[1] * l[2] * gl[0] + l[0] * l[2] * gl[1] + l[0] * l[1] * gl[2];
    for (int i = 0; i < 3; ++i)
        grad[i] = (4.0 * l[i] - 1.0) * gl[i] + 3.0 * gbub;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        grad[3 + i] = 4.0 * (l[k] * gl[j] + l[j] * gl[k]) - 12.0 * gbub;
    }
    grad[6] = 27.0 * gbub;
}

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

FemSpace::FemSpace(const TriMesh& m) : mesh(&m) {
    n_vertex = static_cast<int>(m.vertices.size());
    n_tri = static_cast<int>(m.triangles.size());

    std::map<std::pair<int, int>, int> edge_id;
    tri_edges.resize(n_tri);
    for (int t = 0; t < n_tri; ++t) {
        const auto& tri = m.triangles[t];
        for (int i = 0; i < 3; ++i) {
            int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
            if (a > b) std::swap(a, b);
            auto it = edge_id.find({a, b});
            if (it == edge_id.end()) {
                it = edge_id.insert({{a, b}, static_cast<int>(edges.size())}).first;
                edges.push_back({a, b});
            }
            tri_edges[t][i] = it->second;
        }
    }
    n_edge = static_cast<int>(edges.size());

    dof_pos.resize(n_dofs());
    for (int v = 0; v < n_vertex; ++v) dof_pos[v] = m.vertices[v];
    for (int e = 0; e < n_edge; ++e)
        dof_pos[n_vertex + e] = 0.5 * (m.vertices[edges[e][0]] + m.vertices[edges[e][1]]);
    for (int t = 0; t < n_tri; ++t) {
        const auto& tri = m.triangles[t];
        dof_pos[n_vertex + n_edge + t] =
            (1.0 / 3.0) * (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]);
    }

    boundary_vertex_dofs = m.boundary_nodes;
    const int n_b = static_cast<int>(m.boundary_nodes.size());
    boundary_edge_dofs.resize(n_b);
    for (int k = 0; k < n_b; ++k) {
        int a = m.boundary_nodes[k], b = m.boundary_nodes[(k + 1) % n_b];
        if (a > b) std::swap(a, b);
        auto it = edge_id.find({a, b});
        if (it == edge_id.end())
            throw NumericError("FemSpace: boundary segment is not a mesh edge");
        boundary_edge_dofs[k] = n_vertex + it->second;
    }

    is_boundary_dof.assign(n_dofs(), 0);
    for (int v : boundary_vertex_dofs) is_boundary_dof[v] = 1;
    for (int d : boundary_edge_dofs) is_boundary_dof[d] = 1;
}

NodalField make_field(const FemSpace& space) {
    return {&space, Eigen::VectorXd::Zero(space.n_dofs())};
}

SparseOperator assemble_weighted_mass(const FemSpace& space, const SpeedField& speed,
                                      bool lumped) {
    const TriMesh& m = *space.mesh;
    const QuadRule q = degree5_rule();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(space.n_tri) * (lumped ? 7 : 49));

    for (int t = 0; t < space.n_tri; ++t) {
        const auto& tri = m.triangles[t];
        const Vec2 p0 = m.vertices[tri[0]], p1 = m.vertices[tri[1]], p2 = m.vertices[tri[2]];
        const double area = triangle_area(p0, p1, p2);

        int dofs[7];
        for (int i = 0; i < 3; ++i) dofs[i] = tri[i];
        for (int i = 0; i < 3; ++i) dofs[3 + i] = space.n_vertex + space.tri_edges[t][i];
        dofs[6] = space.n_vertex + space.n_edge + t;

        double local[7][7] = {};
        std::array<double, 7> phi;
        for (int iq = 0; iq < 7; ++iq) {
            const auto& l = q.bary[iq];
            const Vec2 x = l[0] * p0 + l[1] * p1 + l[2] * p2;
            const double c = speed.value(x);
            if (!(c > 0.0)) throw NumericError("assemble_weighted_mass: speed <= 0");
            const double wq = q.w[iq] * area / (c * c);
            basis_values(l, phi);
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j <= i; ++j) local[i][j] += wq * phi[i] * phi[j];
        }

        if (lumped) {
            for (int i = 0; i < 7; ++i) {
                double row = 0.0;
                for (int j = 0; j < 7; ++j) row += (j <= i) ? local[i][j] : local[j][i];
                trips.emplace_back(dofs[i], dofs[i], row);
            }
        } else {
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j < 7; ++j)
                    trips.emplace_back(dofs[i], dofs[j], (j <= i) ? local[i][j] : local[j][i]);
        }
    }

    SparseOperator M(space.n_dofs(), space.n_dofs());
    M.setFromTriplets(trips.begin(), trips.end());
    M.makeCompressed();

    if (lumped) {
        for (int i = 0; i < space.n_dofs(); ++i) {
            if (!(M.coeff(i, i) > 0.0))
                throw NumericError("assemble_weighted_mass: non-positive lumped entry");
        }
    }
    return M;
}

SparseOperator assemble_stiffness(const FemSpace& space) {
    const TriMesh& m = *space.mesh;
    const QuadRule q = degree5_rule();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(space.n_tri) * 49);

    for (int t = 0; t < space.n_tri; ++t) {
        const auto& tri = m.triangles[t];
        const Vec2 p0 = m.vertices[tri[0]], p1 = m.vertices[tri[1]], p2 = m.vertices[tri[2]];
        const double area = triangle_area(p0, p1, p2);
        const double inv2A = 1.0 / (2.0 * area);
        const std::array<Vec2, 3> gl = {Vec2{(p1.y - p2.y) * inv2A, (p2.x - p1.x) * inv2A},
                                        Vec2{(p2.y - p0.y) * inv2A, (p0.x - p2.x) * inv2A},
                                        Vec2{(p0.y - p1.y) * inv2A, (p1.x - p0.x) * inv2A}};

        int dofs[7];
        for (int i = 0; i < 3; ++i) dofs[i] = tri[i];
        for (int i = 0; i < 3; ++i) dofs[3 + i] = space.n_vertex + space.tri_edges[t][i];
        dofs[6] = space.n_vertex + space.n_edge + t;

        double local[7][7] = {};
        std::array<Vec2, 7> grad;
        for (int iq = 0; iq < 7; ++iq) {
            basis_gradients(q.bary[iq], gl, grad);
            const double wq = q.w[iq] * area;
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j <= i; ++j) local[i][j] += wq * dot(grad[i], grad[j]);
        }
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j)
                trips.emplace_back(dofs[i], dofs[j], (j <= i) ? local[i][j] : local[j][i]);
    }

    SparseOperator A(space.n_dofs(), space.n_dofs());
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
}

SparseOperator assemble_boundary_mass(const FemSpace& space, const BoundaryGrid& boundary) {
    const int n_b = boundary.size();
    if (n_b != static_cast<int>(space.boundary_vertex_dofs.size()))
        throw ConfigError("assemble_boundary_mass: boundary grid does not match mesh");
    for (int k = 0; k < n_b; ++k) {
        const Vec2 d = boundary.node_positions[k] -
                       space.mesh->vertices[space.boundary_vertex_dofs[k]];
        if (norm(d) > 1e-12 * boundary.radius)
            throw ConfigError("assemble_boundary_mass: boundary grid does not match mesh");
    }

    // 3-point Gauss on [0,1].
    const double g = std::sqrt(0.6);
    const double tq[3] = {0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
    const double wq[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n_b) * 6);
    for (int k = 0; k < n_b; ++k) {
        const double len = boundary.segment_length(k);
        const int rows[3] = {space.boundary_vertex_dofs[k], space.boundary_edge_dofs[k],
                             space.boundary_vertex_dofs[(k + 1) % n_b]};
        const int cols[2] = {k, (k + 1) % n_b};
        double local[3][2] = {};
        for (int iq = 0; iq < 3; ++iq) {
            const double t = tq[iq];
            const double tr[3] = {(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t),
                                  t * (2.0 * t - 1.0)};
            const double p1b[2] = {1.0 - t, t};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 2; ++j) local[i][j] += wq[iq] * len * tr[i] * p1b[j];
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 2; ++j) trips.emplace_back(rows[i], cols[j], local[i][j]);
    }

    SparseOperator B(space.n_dofs(), n_b);
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    return B;
}

NodalField project_analytic(const std::function<double(Vec2)>& fn, const FemSpace& space) {
    NodalField f = make_field(space);
    for (int v = 0; v < space.n_vertex; ++v) f.coeffs[v] = fn(space.dof_pos[v]);
    for (int e = 0; e < space.n_edge; ++e)
        f.coeffs[space.n_vertex + e] = fn(space.dof_pos[space.n_vertex + e]);
    // Barycenter value of the pure quadratic interpolant: the enrichment
    // coefficient of the projection is therefore zero.
    const TriMesh& m = *space.mesh;
    for (int t = 0; t < space.n_tri; ++t) {
        const auto& tri = m.triangles[t];
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s -= f.coeffs[tri[i]] / 9.0;
        for (int i = 0; i < 3; ++i) s += 4.0 / 9.0 * f.coeffs[space.n_vertex + space.tri_edges[t][i]];
        f.coeffs[space.n_vertex + space.n_edge + t] = s;
    }
    for (int i = 0; i < f.coeffs.size(); ++i)
        if (!std::isfinite(f.coeffs[i]))
            throw NumericError("project_analytic: non-finite value at a node");
    return f;
}

double h10_inner(const NodalField& f, const NodalField& g, const SparseOperator& A) {
    if (f.coeffs.size() != g.coeffs.size() || f.coeffs.size() != A.rows())
        throw ConfigError("h10_inner: dimension mismatch");
    return f.coeffs.dot(A * g.coeffs);
}

Eigen::VectorXd boundary_vertex_values(const NodalField& f) {
    const auto& dofs = f.space->boundary_vertex_dofs;
    Eigen::VectorXd v(dofs.size());
    for (size_t k = 0; k < dofs.size(); ++k) v[k] = f.coeffs[dofs[k]];
    return v;
}

double symmetry_defect(const SparseOperator& A) {
    SparseOperator D = A - SparseOperator(A.transpose());
    double dmax = 0.0, amax = 0.0;
    for (int k = 0; k < D.outerSize(); ++k)
        for (SparseOperator::InnerIterator it(D, k); it; ++it)
            dmax = std::max(dmax, std::abs(it.value()));
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseOperator::InnerIterator it(A, k); it; ++it)
            amax = std::max(amax, std::abs(it.value()));
    return amax > 0.0 ? dmax / amax : 0.0;
}

void write_field_csv(const NodalField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_field_csv: cannot open " + path);
    out << "x,y,value\n";
    char buf[128];
    for (int i = 0; i < f.coeffs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", f.space->dof_pos[i].x,
                      f.space->dof_pos[i].y, f.coeffs[i]);
        out << buf;
    }
    if (!out) throw IoError("write_field_csv: write failed for " + path);
}

void write_field_binary(const NodalField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_field_binary: cannot open " + path);
    char magic[8] = {'P', 'A', 'F', 'F', '1', 0, 0, 0};
    out.write(magic, 8);
    const uint32_t count = static_cast<uint32_t>(f.coeffs.size());
    const uint32_t reserved = 0;
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    out.write(reinterpret_cast<const char*>(f.coeffs.data()),
              static_cast<std::streamsize>(sizeof(double)) * f.coeffs.size());
    if (!out) throw IoError("write_field_binary: write failed for " + path);
}

Eigen::VectorXd read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_field_binary: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "PAFF1\0\0\0", 8) != 0)
        throw IoError("read_field_binary: bad magic in " + path);
    uint32_t count = 0, reserved = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    Eigen::VectorXd v(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double)) * count);
    if (!in) throw IoError("read_field_binary: truncated file " + path);
    return v;
}

FieldEvaluator::FieldEvaluator(const FemSpace& space) : space_(&space) {
    const TriMesh& m = *space.mesh;
    double x1 = -1e300, y1 = -1e300;
    x0_ = 1e300;
    y0_ = 1e300;
    for (const auto& v : m.vertices) {
        x0_ = std::min(x0_, v.x);
        y0_ = std::min(y0_, v.y);
        x1 = std::max(x1, v.x);
        y1 = std::max(y1, v.y);
    }
    const int target = std::max(1, static_cast<int>(std::sqrt(m.triangles.size())));
    nx_ = target;
    ny_ = target;
    cell_ = std::max((x1 - x0_) / nx_, (y1 - y0_) / ny_) + 1e-300;
    nx_ = static_cast<int>((x1 - x0_) / cell_) + 1;
    ny_ = static_cast<int>((y1 - y0_) / cell_) + 1;
    bins_.resize(static_cast<size_t>(nx_) * ny_);
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
        const auto& tri = m.triangles[t];
        double tx0 = 1e300, ty0 = 1e300, tx1 = -1e300, ty1 = -1e300;
        for (int i = 0; i < 3; ++i) {
            const Vec2& p = m.vertices[tri[i]];
            tx0 = std::min(tx0, p.x);
            ty0 = std::min(ty0, p.y);
            tx1 = std::max(tx1, p.x);
            ty1 = std::max(ty1, p.y);
        }
        const int i0 = std::clamp(static_cast<int>((tx0 - x0_) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((tx1 - x0_) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((ty0 - y0_) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((ty1 - y0_) / cell_), 0, ny_ - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) bins_[static_cast<size_t>(i) * ny_ + j].push_back(t);
    }
}

double FieldEvaluator::evaluate(const Eigen::VectorXd& coeffs, Vec2 p, bool* inside) const {
    const TriMesh& m = *space_->mesh;
    const int ci = std::clamp(static_cast<int>((p.x - x0_) / cell_), 0, nx_ - 1);
    const int cj = std::clamp(static_cast<int>((p.y - y0_) / cell_), 0, ny_ - 1);
    for (int t : bins_[static_cast<size_t>(ci) * ny_ + cj]) {
        const auto& tri = m.triangles[t];
        const Vec2 p0 = m.vertices[tri[0]], p1 = m.vertices[tri[1]], p2 = m.vertices[tri[2]];
        const double area = triangle_area(p0, p1, p2);
        const double l0 = triangle_area(p, p1, p2) / area;
        const double l1 = triangle_area(p0, p, p2) / area;
        const double l2 = 1.0 - l0 - l1;
        const double tol = -1e-12;
        if (l0 < tol || l1 < tol || l2 < tol) continue;
        std::array<double, 7> phi;
        basis_values({l0, l1, l2}, phi);
        double val = 0.0;
        for (int i = 0; i < 3; ++i) val += phi[i] * coeffs[tri[i]];
        for (int i = 0; i < 3; ++i)
            val += phi[3 + i] * coeffs[space_->n_vertex + space_->tri_edges[t][i]];
        val += phi[6] * coeffs[space_->n_vertex + space_->n_edge + t];
        if (inside) *inside = true;
        return val;
    }
    if (inside) *inside = false;
    return 0.0;
}

}  // namespace pat

#pragma once

#include "pat/geometry.hpp"
#include "pat/phantoms.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace pat {

using SparseOperator = Eigen::SparseMatrix<double>;

/// Degree-of-freedom layout of the quadratic element enriched with one cubic
/// bubble per triangle: vertex dofs first, then edge-midpoint dofs, then one
/// barycenter dof per triangle. The basis is interpolatory at all 7 local
/// nodes, so a coefficient is the field value at its node and the lumped mass
/// matrix is diagonal with positive weights.
struct FemSpace {
    const TriMesh* mesh = nullptr;
    std::vector<std::array<int, 2>> edges;      // (vmin, vmax)
    std::vector<std::array<int, 3>> tri_edges;  // edge id opposite local vertex i
    std::vector<Vec2> dof_pos;
    int n_vertex = 0, n_edge = 0, n_tri = 0;

    std::vector<int> boundary_vertex_dofs;  // == mesh->boundary_nodes, ordered
    std::vector<int> boundary_edge_dofs;    // midpoint dof of boundary segment k
    std::vector<char> is_boundary_dof;

    explicit FemSpace(const TriMesh& mesh);
    int n_dofs() const { return n_vertex + n_edge + n_tri; }
};

/// Coefficients are nodal values (vertices, edge midpoints, barycenters).
struct NodalField {
    const FemSpace* space = nullptr;
    Eigen::VectorXd coeffs;
};

NodalField make_field(const FemSpace& space);

/// Mass matrix of (1/c^2 u, w). Consistent assembly uses a degree-5 symmetric
/// triangle rule with 1/c^2 evaluated at the quadrature points; the lumped
/// variant row-sums it, which preserves the total integral of 1/c^2 exactly
/// and is diagonal in this basis.
SparseOperator assemble_weighted_mass(const FemSpace& space, const SpeedField& speed,
                                      bool lumped = true);

/// Stiffness matrix of (grad u, grad w); the degree-5 rule is exact here.
SparseOperator assemble_stiffness(const FemSpace& space);

/// Coupling of the piecewise-linear boundary space into the volume test
/// space: B(dof, k) = integral over the boundary of psi_k * trace(phi_dof),
/// integrated segment-wise in the shared reference parameter with the exact
/// circle-arc length as the Jacobian.
SparseOperator assemble_boundary_mass(const FemSpace& space, const BoundaryGrid& boundary);

/// Interpolation at vertices and edge midpoints; the barycenter value is
/// filled with the quadratic interpolant there, so the cubic enrichment
/// component of the result is zero.
NodalField project_analytic(const std::function<double(Vec2)>& fn, const FemSpace& space);

double h10_inner(const NodalField& f, const NodalField& g, const SparseOperator& A);

/// Values of the field at the ordered boundary vertices.
Eigen::VectorXd boundary_vertex_values(const NodalField& f);

/// Largest relative entrywise asymmetry, |A - A^T|_max / |A|_max.
double symmetry_defect(const SparseOperator& A);

void write_field_csv(const NodalField& f, const std::string& path);
void write_field_binary(const NodalField& f, const std::string& path);
Eigen::VectorXd read_field_binary(const std::string& path);

/// Point evaluation backed by a uniform spatial bin over triangle bboxes.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const FemSpace& space);
    /// Evaluates the field at p; returns 0 outside the mesh (sets *inside).
    double evaluate(const Eigen::VectorXd& coeffs, Vec2 p, bool* inside = nullptr) const;

private:
    const FemSpace* space_;
    double x0_, y0_, cell_;
    int nx_, ny_;
    std::vector<std::vector<int>> bins_;
};

}  // namespace pat

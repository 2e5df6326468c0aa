#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace pat {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

/// Conforming triangulation of the disk of radius `radius`.
/// Boundary vertices are stored last and contiguously, ordered
/// counter-clockwise, and lie exactly on the circle.
struct TriMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW, positive signed area
    std::vector<int> boundary_nodes;            // ordered CCW, trailing block
    double h = 0.0;                             // target mesh size
    double radius = 0.0;
};

/// Discretized measurement circle: the mesh boundary vertices together with
/// their exact-circle arc-length parametrization. Segments are the arcs
/// between consecutive nodes (one closed loop).
struct BoundaryGrid {
    std::vector<Vec2> node_positions;           // on the circle
    std::vector<double> arc_lengths;            // cumulative, arc_lengths[0] = 0
    std::vector<std::array<int, 2>> segments;   // consecutive node pairs, closed
    std::vector<double> angles;                 // node angle in [0, 2pi)
    double radius = 0.0;

    int size() const { return static_cast<int>(node_positions.size()); }
    double total_length() const { return 6.283185307179586476925286766559 * radius; }
    /// Arc length of segment k (exact circle arc between nodes k and k+1).
    double segment_length(int k) const;
};

struct MeshValidation {
    bool ok = true;
    std::vector<std::string> failures;
};

TriMesh generate_disk_mesh(double radius, double h);
BoundaryGrid extract_boundary(const TriMesh& mesh);

/// Runs every structural mesh invariant (orientation, boundary-on-circle,
/// edge manifoldness, edge length, minimum angle) and reports each failure.
MeshValidation validate_mesh(const TriMesh& mesh);

double min_triangle_angle_deg(const TriMesh& mesh);
double max_edge_length(const TriMesh& mesh);

void write_mesh(const TriMesh& mesh, const std::string& path);
TriMesh read_mesh(const std::string& path);

}  // namespace pat

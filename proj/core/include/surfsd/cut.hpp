#pragma once

#include "surfsd/geometry.hpp"
#include "surfsd/mesh.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace surfsd {

/// Planar piece K = T cap Gamma_h of the discrete surface inside one tet.
/// Vertices are counter-clockwise seen from the tip of `normal`.
struct CutPolygon {
    int parent_tet = -1;
    int num_vertices = 0;
    std::array<Vec3, 4> vertices;
    /// Local tet vertex pair whose edge carries each polygon vertex.
    std::array<std::array<int, 2>, 4> vertex_edges;
    Vec3 normal = Vec3::Zero();
    double area = 0.0;

    Vec3 centroid() const;
    std::span<const Vec3> points() const { return {vertices.data(), static_cast<std::size_t>(num_vertices)}; }
};

/// Shared segment between two polygons with the exterior unit conormals of both sides.
struct CutEdge {
    int poly_a = -1;
    int poly_b = -1;
    Vec3 p0;
    Vec3 p1;
    Vec3 conormal_a;
    Vec3 conormal_b;
};

/// Segment of a single polygon with no partner: either on the box boundary
/// (open surfaces such as planes) or next to a discarded sliver.
struct OpenSegment {
    int poly = -1;
    Vec3 p0;
    Vec3 p1;
    bool on_box_boundary = false;
};

struct CutSurfaceMesh {
    /// Sorted by parent tet id.
    std::vector<CutPolygon> polygons;
    std::vector<CutEdge> edges;
    std::vector<OpenSegment> open_segments;
    int discarded_polygons = 0;
    /// Number of distinct polygon vertices (mesh edges crossed by Gamma_h).
    int num_vertices = 0;

    double total_area() const;
};

/// Nodal level-set values; |phi| < 1e-12 h is replaced by +1e-12 h.
std::vector<double> sample_level_set(const BackgroundMesh& mesh, const ImplicitSurface& surface);

/// Zero set of the linear interpolant of `values` inside one tet. Throws
/// Error(DegenerateInput) if a value is exactly zero.
std::optional<CutPolygon> marching_tet(const std::array<Vec3, 4>& v, const std::array<double, 4>& values);

/// Runs marching_tet on every tet, drops polygons with area < 1e-14 h^2 and
/// pairs shared segments. Throws Error(NotWatertight) when a segment has no
/// legitimate partner.
CutSurfaceMesh build_cut_surface(const BackgroundMesh& mesh, std::span<const double> values);

/// Quadrature points on Gamma_h, grouped per polygon.
struct SurfaceQuadrature {
    std::vector<Vec3> points;
    std::vector<double> weights;
    /// Polygon k owns entries [offsets[k], offsets[k+1]).
    std::vector<int> offsets;

    int begin(int poly) const { return offsets[poly]; }
    int end(int poly) const { return offsets[poly + 1]; }
};

/// Fan triangulation from the centroid with the 3-point degree-2 rule per
/// triangle. Only degree 2 is provided.
SurfaceQuadrature polygon_quadrature(const CutPolygon& polygon, int degree = 2);
SurfaceQuadrature build_surface_quadrature(const CutSurfaceMesh& cuts);

}  // namespace surfsd

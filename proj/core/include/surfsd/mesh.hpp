#pragma once

#include "surfsd/geometry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace surfsd {

using Tet = std::array<int, 4>;

/// Structured tetrahedral mesh of an axis-aligned box. Every cell is split
/// into six tetrahedra sharing the cell diagonal (Kuhn split), so all tets
/// have the same diameter h = cell diagonal.
struct BackgroundMesh {
    Aabb box;
    int n = 0;
    std::vector<Vec3> nodes;
    std::vector<Tet> tets;
    double h = 0.0;

    int node_index(int i, int j, int k) const { return i + (n + 1) * (j + (n + 1) * k); }
    Vec3 cell_size() const { return (box.hi - box.lo) / n; }
    std::array<Vec3, 4> tet_vertices(int t) const {
        const Tet& tt = tets[t];
        return {nodes[tt[0]], nodes[tt[1]], nodes[tt[2]], nodes[tt[3]]};
    }
};

/// Cell diagonal of the n^3 grid on `box`, equal to the largest tet diameter.
double mesh_size(const Aabb& box, int n);

double tet_volume(const std::array<Vec3, 4>& v);
double tet_diameter(const std::array<Vec3, 4>& v);

/// Builds the Kuhn-split mesh of `box` with n cells per axis. When a surface
/// is given, throws Error(BoxTooSmall) unless its bounding box lies inside
/// the closed box.
BackgroundMesh build_background_mesh(const Aabb& box, int n, const ImplicitSurface* surface = nullptr);

struct CutSurfaceMesh;

/// Interior face shared by two active tets (indices into ActiveMesh::tet_ids).
struct ActiveFace {
    std::array<int, 3> nodes;
    int elem_a = -1;
    int elem_b = -1;
};

/// The tets carrying a cut polygon, with contiguous DOF numbering of their
/// nodes. Element e of the active mesh owns polygon e of the cut mesh.
struct ActiveMesh {
    std::vector<int> tet_ids;
    /// Global node index -> active DOF, -1 for inactive nodes.
    std::vector<int> dof_map;
    /// Active DOF -> global node index.
    std::vector<int> dof_nodes;
    std::vector<ActiveFace> faces;
    /// Per element: DOF indices of the four vertices.
    std::vector<std::array<int, 4>> elem_dofs;

    int num_dofs() const { return static_cast<int>(dof_nodes.size()); }
    int num_elements() const { return static_cast<int>(tet_ids.size()); }
};

ActiveMesh extract_active_mesh(const BackgroundMesh& mesh, const CutSurfaceMesh& cuts);

/// Gradients of the four P1 barycentric functions of a tet (columns).
Eigen::Matrix<double, 3, 4> p1_gradients(const std::array<Vec3, 4>& v);

/// Barycentric coordinates of x with respect to the tet.
Eigen::Vector4d barycentric(const std::array<Vec3, 4>& v, const Vec3& x);

}  // namespace surfsd

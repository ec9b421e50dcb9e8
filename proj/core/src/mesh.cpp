#include "surfsd/mesh.hpp"

#include "surfsd/cut.hpp"
#include "surfsd/error.hpp"

#include <algorithm>
#include <map>

namespace surfsd {

double mesh_size(const Aabb& box, int n) { return ((box.hi - box.lo) / n).norm(); }

double tet_volume(const std::array<Vec3, 4>& v) {
    return (v[1] - v[0]).cross(v[2] - v[0]).dot(v[3] - v[0]) / 6.0;
}

double tet_diameter(const std::array<Vec3, 4>& v) {
    double d = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            d = std::max(d, (v[i] - v[j]).norm());
        }
    }
    return d;
}

BackgroundMesh build_background_mesh(const Aabb& box, int n, const ImplicitSurface* surface) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "mesh subdivisions must be >= 1");
    }
    if (!((box.lo.array() < box.hi.array()).all())) {
        throw Error(ErrorCode::InvalidArgument, "box must have positive extent on every axis");
    }
    if (surface != nullptr) {
        if (const auto bb = surface->bounding_box(); bb && !box.contains(*bb)) {
            throw Error(ErrorCode::BoxTooSmall, "surface extends outside the background box");
        }
    }

    BackgroundMesh mesh;
    mesh.box = box;
    mesh.n = n;
    const Vec3 step = (box.hi - box.lo) / n;
    mesh.h = mesh_size(box, n);

    const int np = n + 1;
    mesh.nodes.reserve(static_cast<std::size_t>(np) * np * np);
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                // the last node is pinned to hi so the box is tiled exactly
                const double x = i == n ? box.hi.x() : box.lo.x() + i * step.x();
                const double y = j == n ? box.hi.y() : box.lo.y() + j * step.y();
                const double z = k == n ? box.hi.z() : box.lo.z() + k * step.z();
                mesh.nodes.emplace_back(x, y, z);
            }
        }
    }

    // Each tet follows a monotone path v000 -> v111 adding unit steps in the
    // axis order of one permutation; this orientation is identical in every cell.
    static constexpr std::array<std::array<int, 3>, 6> kPerms = {{
        {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
    }};
    mesh.tets.reserve(static_cast<std::size_t>(6) * n * n * n);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                for (const auto& perm : kPerms) {
                    std::array<int, 3> c = {i, j, k};
                    Tet t;
                    t[0] = mesh.node_index(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        ++c[perm[s]];
                        t[s + 1] = mesh.node_index(c[0], c[1], c[2]);
                    }
                    if (tet_volume({mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]}) < 0.0) {
                        std::swap(t[1], t[2]);
                    }
                    mesh.tets.push_back(t);
                }
            }
        }
    }
    return mesh;
}

ActiveMesh extract_active_mesh(const BackgroundMesh& mesh, const CutSurfaceMesh& cuts) {
    if (cuts.polygons.empty()) {
        throw Error(ErrorCode::EmptySurface, "no background tetrahedron is cut by the surface");
    }
    ActiveMesh active;
    active.tet_ids.reserve(cuts.polygons.size());
    for (const CutPolygon& p : cuts.polygons) {
        active.tet_ids.push_back(p.parent_tet);
    }

    active.dof_map.assign(mesh.nodes.size(), -1);
    std::vector<int> used;
    used.reserve(active.tet_ids.size() * 4);
    for (int t : active.tet_ids) {
        for (int v : mesh.tets[t]) {
            used.push_back(v);
        }
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    active.dof_nodes = used;
    for (std::size_t d = 0; d < used.size(); ++d) {
        active.dof_map[used[d]] = static_cast<int>(d);
    }

    active.elem_dofs.reserve(active.tet_ids.size());
    std::map<std::array<int, 3>, std::pair<int, int>> face_owner;
    for (int e = 0; e < active.num_elements(); ++e) {
        const Tet& tet = mesh.tets[active.tet_ids[e]];
        std::array<int, 4> dofs;
        for (int i = 0; i < 4; ++i) {
            dofs[i] = active.dof_map[tet[i]];
        }
        active.elem_dofs.push_back(dofs);
        for (int skip = 0; skip < 4; ++skip) {
            std::array<int, 3> f;
            int c = 0;
            for (int i = 0; i < 4; ++i) {
                if (i != skip) {
                    f[c++] = tet[i];
                }
            }
            std::sort(f.begin(), f.end());
            auto [it, inserted] = face_owner.try_emplace(f, e, -1);
            if (!inserted) {
                it->second.second = e;
            }
        }
    }
    for (const auto& [nodes, owners] : face_owner) {
        if (owners.second >= 0) {
            active.faces.push_back({nodes, owners.first, owners.second});
        }
    }
    return active;
}

Eigen::Matrix<double, 3, 4> p1_gradients(const std::array<Vec3, 4>& v) {
    Mat3 J;
    J.col(0) = v[1] - v[0];
    J.col(1) = v[2] - v[0];
    J.col(2) = v[3] - v[0];
    const Mat3 JinvT = J.inverse().transpose();
    Eigen::Matrix<double, 3, 4> G;
    G.col(1) = JinvT.col(0);
    G.col(2) = JinvT.col(1);
    G.col(3) = JinvT.col(2);
    G.col(0) = -(G.col(1) + G.col(2) + G.col(3));
    return G;
}

Eigen::Vector4d barycentric(const std::array<Vec3, 4>& v, const Vec3& x) {
    Mat3 J;
    J.col(0) = v[1] - v[0];
    J.col(1) = v[2] - v[0];
    J.col(2) = v[3] - v[0];
    const Vec3 l = J.partialPivLu().solve(x - v[0]);
    return {1.0 - l.sum(), l[0], l[1], l[2]};
}

}  // namespace surfsd

#include "surfsd/cut.hpp"

#include "surfsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace surfsd {

namespace {

constexpr double kPerturbation = 1e-12;
constexpr double kMinArea = 1e-14;

bool lex_less(const Vec3& a, const Vec3& b) {
    return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
}

// Zero crossing on an edge, evaluated from the lexicographically smaller
// endpoint so both tets sharing the edge produce identical bits.
Vec3 crossing(const Vec3& xa, double fa, const Vec3& xb, double fb) {
    if (lex_less(xb, xa)) {
        return crossing(xb, fb, xa, fa);
    }
    const double lambda = fa / (fa - fb);
    return xa + lambda * (xb - xa);
}

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

struct SegmentRef {
    std::uint64_t k0;
    std::uint64_t k1;
    int poly;
    int local;

    auto key() const { return std::pair(k0, k1); }
};

}  // namespace

Vec3 CutPolygon::centroid() const {
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < num_vertices; ++i) {
        c += vertices[i];
    }
    return c / num_vertices;
}

double CutSurfaceMesh::total_area() const {
    double a = 0.0;
    for (const CutPolygon& p : polygons) {
        a += p.area;
    }
    return a;
}

std::vector<double> sample_level_set(const BackgroundMesh& mesh, const ImplicitSurface& surface) {
    const double sigma = kPerturbation * mesh.h;
    std::vector<double> values(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double v = surface.level_set_value(mesh.nodes[i]);
        values[i] = std::abs(v) < sigma ? sigma : v;
    }
    return values;
}

std::optional<CutPolygon> marching_tet(const std::array<Vec3, 4>& v, const std::array<double, 4>& values) {
    int neg[4];
    int pos[4];
    int nn = 0;
    int np = 0;
    for (int i = 0; i < 4; ++i) {
        if (values[i] == 0.0) {
            throw Error(ErrorCode::DegenerateInput, "level-set value exactly zero at a tet vertex");
        }
        if (values[i] < 0.0) {
            neg[nn++] = i;
        } else {
            pos[np++] = i;
        }
    }
    if (nn == 0 || np == 0) {
        return std::nullopt;
    }

    CutPolygon poly;
    auto add = [&](int a, int b) {
        poly.vertices[poly.num_vertices] = crossing(v[a], values[a], v[b], values[b]);
        poly.vertex_edges[poly.num_vertices] = {a, b};
        ++poly.num_vertices;
    };
    if (nn == 1 || np == 1) {
        const int lone = nn == 1 ? neg[0] : pos[0];
        for (int i = 0; i < 4; ++i) {
            if (i != lone) {
                add(lone, i);
            }
        }
    } else {
        add(neg[0], pos[0]);
        add(neg[0], pos[1]);
        add(neg[1], pos[1]);
        add(neg[1], pos[0]);
    }

    // The cut is the zero set of a linear function, so its normal is the
    // normalized gradient of that function.
    const Eigen::Matrix<double, 3, 4> G = p1_gradients(v);
    Vec3 grad = Vec3::Zero();
    for (int i = 0; i < 4; ++i) {
        grad += values[i] * G.col(i);
    }
    poly.normal = grad.normalized();

    Vec3 newell = Vec3::Zero();
    for (int i = 0; i < poly.num_vertices; ++i) {
        newell += poly.vertices[i].cross(poly.vertices[(i + 1) % poly.num_vertices]);
    }
    if (newell.dot(poly.normal) < 0.0) {
        std::reverse(poly.vertices.begin(), poly.vertices.begin() + poly.num_vertices);
        std::reverse(poly.vertex_edges.begin(), poly.vertex_edges.begin() + poly.num_vertices);
        newell = -newell;
    }
    poly.area = 0.5 * std::abs(newell.dot(poly.normal));
    return poly;
}

CutSurfaceMesh build_cut_surface(const BackgroundMesh& mesh, std::span<const double> values) {
    if (values.size() != mesh.nodes.size()) {
        throw Error(ErrorCode::InvalidArgument, "one level-set value per mesh node expected");
    }
    CutSurfaceMesh cuts;
    const double min_area = kMinArea * mesh.h * mesh.h;

    std::vector<std::array<std::uint64_t, 4>> vertex_keys;
    std::vector<SegmentRef> discarded;
    for (int t = 0; t < static_cast<int>(mesh.tets.size()); ++t) {
        const Tet& tet = mesh.tets[t];
        const std::array<double, 4> vals = {values[tet[0]], values[tet[1]], values[tet[2]], values[tet[3]]};
        const bool all_pos = vals[0] > 0 && vals[1] > 0 && vals[2] > 0 && vals[3] > 0;
        const bool all_neg = vals[0] < 0 && vals[1] < 0 && vals[2] < 0 && vals[3] < 0;
        if (all_pos || all_neg) {
            continue;
        }
        std::optional<CutPolygon> poly = marching_tet(mesh.tet_vertices(t), vals);
        if (!poly) {
            continue;
        }
        poly->parent_tet = t;
        std::array<std::uint64_t, 4> keys{};
        for (int i = 0; i < poly->num_vertices; ++i) {
            keys[i] = edge_key(tet[poly->vertex_edges[i][0]], tet[poly->vertex_edges[i][1]]);
        }
        if (poly->area < min_area) {
            ++cuts.discarded_polygons;
            for (int i = 0; i < poly->num_vertices; ++i) {
                const std::uint64_t a = keys[i];
                const std::uint64_t b = keys[(i + 1) % poly->num_vertices];
                discarded.push_back({std::min(a, b), std::max(a, b), -1, i});
            }
            continue;
        }
        cuts.polygons.push_back(*poly);
        vertex_keys.push_back(keys);
    }

    std::vector<SegmentRef> segs;
    std::vector<std::uint64_t> all_keys;
    for (int p = 0; p < static_cast<int>(cuts.polygons.size()); ++p) {
        const int nv = cuts.polygons[p].num_vertices;
        for (int i = 0; i < nv; ++i) {
            const std::uint64_t a = vertex_keys[p][i];
            const std::uint64_t b = vertex_keys[p][(i + 1) % nv];
            segs.push_back({std::min(a, b), std::max(a, b), p, i});
            all_keys.push_back(a);
        }
    }
    std::sort(all_keys.begin(), all_keys.end());
    cuts.num_vertices = static_cast<int>(std::unique(all_keys.begin(), all_keys.end()) - all_keys.begin());

    auto by_key = [](const SegmentRef& a, const SegmentRef& b) {
        return std::tie(a.k0, a.k1, a.poly) < std::tie(b.k0, b.k1, b.poly);
    };
    std::sort(segs.begin(), segs.end(), by_key);
    std::sort(discarded.begin(), discarded.end(), by_key);

    const int np1 = mesh.n + 1;
    auto node_ijk = [np1](int node) { return std::array<int, 3>{node % np1, (node / np1) % np1, node / (np1 * np1)}; };
    // A mesh edge lies on a box face if both endpoints share an extreme index.
    auto edge_face_mask = [&](std::uint64_t key) {
        const auto a = node_ijk(static_cast<int>(key >> 32));
        const auto b = node_ijk(static_cast<int>(key & 0xffffffffu));
        int mask = 0;
        for (int d = 0; d < 3; ++d) {
            if (a[d] == b[d] && a[d] == 0) mask |= 1 << (2 * d);
            if (a[d] == b[d] && a[d] == mesh.n) mask |= 1 << (2 * d + 1);
        }
        return mask;
    };

    auto segment_points = [&](const SegmentRef& s) {
        const CutPolygon& poly = cuts.polygons[s.poly];
        return std::pair(poly.vertices[s.local], poly.vertices[(s.local + 1) % poly.num_vertices]);
    };
    auto conormal = [&](const CutPolygon& poly, const Vec3& p0, const Vec3& p1) {
        const Vec3 t = (p1 - p0).normalized();
        return t.cross(poly.normal).normalized().eval();
    };

    for (std::size_t i = 0; i < segs.size();) {
        std::size_t j = i;
        while (j < segs.size() && segs[j].key() == segs[i].key()) {
            ++j;
        }
        const std::size_t count = j - i;
        if (count == 2) {
            const auto [p0, p1] = segment_points(segs[i]);
            CutEdge e;
            e.poly_a = segs[i].poly;
            e.poly_b = segs[i + 1].poly;
            e.p0 = p0;
            e.p1 = p1;
            e.conormal_a = conormal(cuts.polygons[e.poly_a], p0, p1);
            const auto [q0, q1] = segment_points(segs[i + 1]);
            e.conormal_b = conormal(cuts.polygons[e.poly_b], q0, q1);
            cuts.edges.push_back(e);
        } else if (count == 1) {
            const auto [p0, p1] = segment_points(segs[i]);
            const bool boundary = (edge_face_mask(segs[i].k0) & edge_face_mask(segs[i].k1)) != 0;
            const bool near_sliver = std::binary_search(
                discarded.begin(), discarded.end(), segs[i],
                [](const SegmentRef& a, const SegmentRef& b) { return a.key() < b.key(); });
            if (!boundary && !near_sliver) {
                throw Error(ErrorCode::NotWatertight,
                            "unpaired segment in polygon of tet " + std::to_string(cuts.polygons[segs[i].poly].parent_tet));
            }
            cuts.open_segments.push_back({segs[i].poly, p0, p1, boundary});
        } else {
            throw Error(ErrorCode::NotWatertight, "segment shared by " + std::to_string(count) + " polygons");
        }
        i = j;
    }
    return cuts;
}

SurfaceQuadrature polygon_quadrature(const CutPolygon& polygon, int degree) {
    if (degree != 2) {
        throw Error(ErrorCode::InvalidArgument, "only degree-2 surface quadrature is available");
    }
    SurfaceQuadrature q;
    q.offsets = {0};
    const Vec3 c = polygon.centroid();
    const int nv = polygon.num_vertices;
    for (int i = 0; i < nv; ++i) {
        const Vec3& a = polygon.vertices[i];
        const Vec3& b = polygon.vertices[(i + 1) % nv];
        const double area = 0.5 * (a - c).cross(b - c).norm();
        const double w = area / 3.0;
        q.points.push_back((2.0 / 3.0) * c + (1.0 / 6.0) * a + (1.0 / 6.0) * b);
        q.points.push_back((1.0 / 6.0) * c + (2.0 / 3.0) * a + (1.0 / 6.0) * b);
        q.points.push_back((1.0 / 6.0) * c + (1.0 / 6.0) * a + (2.0 / 3.0) * b);
        q.weights.insert(q.weights.end(), {w, w, w});
    }
    q.offsets.push_back(static_cast<int>(q.points.size()));
    return q;
}

SurfaceQuadrature build_surface_quadrature(const CutSurfaceMesh& cuts) {
    SurfaceQuadrature all;
    all.offsets.reserve(cuts.polygons.size() + 1);
    all.offsets.push_back(0);
    for (const CutPolygon& p : cuts.polygons) {
        const SurfaceQuadrature q = polygon_quadrature(p);
        all.points.insert(all.points.end(), q.points.begin(), q.points.end());
        all.weights.insert(all.weights.end(), q.weights.begin(), q.weights.end());
        all.offsets.push_back(static_cast<int>(all.points.size()));
    }
    return all;
}

}  // namespace surfsd

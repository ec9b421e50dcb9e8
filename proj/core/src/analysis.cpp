#include "surfsd/analysis.hpp"

#include "surfsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace surfsd {

namespace {

// 4-point degree-2 rule on a tetrahedron (barycentric a, b, b, b).
constexpr double kTetA = 0.5854101966249685;
constexpr double kTetB = 0.1381966011250105;

Eigen::Vector4d element_values(const Vector& u, const std::array<int, 4>& dofs) {
    return {u[dofs[0]], u[dofs[1]], u[dofs[2]], u[dofs[3]]};
}

}  // namespace

ErrorReport compute_errors(const Discretization& disc, const Vector& u_h, const ScalarField& u_exact,
                           const ImplicitSurface& surface, const CoefficientField& coeffs,
                           const StabilizationParams& params, double h_fd) {
    if (u_h.size() < disc.num_dofs()) {
        throw Error(ErrorCode::InvalidArgument, "solution vector shorter than the DOF count");
    }
    const double step = h_fd > 0.0 ? h_fd : default_fd_step(surface);
    double l2 = 0.0;
    double h1t = 0.0;
    double sd = 0.0;
    double ns = 0.0;
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const Eigen::Vector4d ue_loc = element_values(u_h, dofs);
        const Vec3& n = disc.cuts.polygons[e].normal;
        const Vec3 grad_h = disc.basis[e].grads * ue_loc;
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            const ExtensionDerivatives d = extension_derivatives(surface, u_exact, disc.quad.points[q], step);
            const double w = disc.quad.weights[q];
            const double err = d.value - disc.quad_bary[q].dot(ue_loc);
            Vec3 gerr = d.gradient - grad_h;
            gerr -= n.dot(gerr) * n;
            const Vec3 b = coeffs.beta_at(dofs, disc.quad_bary[q], n);
            l2 += w * err * err;
            h1t += w * gerr.squaredNorm();
            sd += w * b.dot(gerr) * b.dot(gerr);
        }
        const auto v = disc.element_vertices(e);
        const double w = disc.basis[e].volume / 4.0;
        for (int k = 0; k < 4; ++k) {
            Vec3 x = Vec3::Zero();
            for (int i = 0; i < 4; ++i) {
                x += (i == k ? kTetA : kTetB) * v[i];
            }
            const ExtensionDerivatives d = extension_derivatives(surface, u_exact, x, step);
            const double nd = n.dot(d.gradient - grad_h);
            ns += w * nd * nd;
        }
    }
    ErrorReport r;
    r.h = disc.h();
    r.n_dofs = disc.num_dofs();
    r.l2_err = std::sqrt(l2);
    r.h1t_err = std::sqrt(h1t);
    r.sd_err = std::sqrt(params.tau1 * params.h * sd);
    r.ns_err = std::sqrt(params.normal_weight() * ns);
    r.triple_err = std::sqrt(l2 + params.epsilon * h1t + r.sd_err * r.sd_err + r.ns_err * r.ns_err);
    return r;
}

std::vector<double> eoc(std::span<const double> errors, std::span<const double> hs) {
    if (errors.size() != hs.size() || errors.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "eoc needs at least two levels with matching sizes");
    }
    for (std::size_t k = 0; k + 1 < hs.size(); ++k) {
        if (!(hs[k + 1] < hs[k])) {
            throw Error(ErrorCode::InvalidArgument, "mesh sizes must be strictly decreasing");
        }
    }
    for (double e : errors) {
        if (e == 0.0) {
            throw Error(ErrorCode::DegenerateLevels, "zero error level: the discrete solution is exact");
        }
    }
    std::vector<double> rates;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        rates.push_back(std::log(errors[k] / errors[k + 1]) / std::log(hs[k] / hs[k + 1]));
    }
    return rates;
}

GeometryDiagnostics geometry_diagnostics(const CutSurfaceMesh& cuts, const SurfaceQuadrature& quad,
                                         const ImplicitSurface& surface) {
    GeometryDiagnostics g;
    for (int p = 0; p < static_cast<int>(cuts.polygons.size()); ++p) {
        const Vec3& nh = cuts.polygons[p].normal;
        for (int q = quad.begin(p); q < quad.end(p); ++q) {
            const ClosestPointResult cp = surface.closest_point(quad.points[q]);
            g.max_rho = std::max(g.max_rho, std::abs(cp.signed_distance));
            g.max_normal_dev = std::max(g.max_normal_dev, (cp.normal - nh).norm());
        }
    }
    return g;
}

OvershootReport overshoot_report(std::span<const double> u_h, double lo, double hi) {
    OvershootReport r;
    if (u_h.empty()) {
        return r;
    }
    const auto [mn, mx] = std::minmax_element(u_h.begin(), u_h.end());
    r.min_u = *mn;
    r.max_u = *mx;
    r.undershoot = std::max(0.0, lo - r.min_u);
    r.overshoot = std::max(0.0, r.max_u - hi);
    return r;
}

std::vector<double> surface_vertex_values(const Discretization& disc, const Vector& u_h) {
    std::vector<double> out;
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const CutPolygon& poly = disc.cuts.polygons[e];
        const auto& dofs = disc.active.elem_dofs[e];
        for (int k = 0; k < poly.num_vertices; ++k) {
            // vertex lies on the tet edge (a, b): linear interpolation along it
            const int a = poly.vertex_edges[k][0];
            const int b = poly.vertex_edges[k][1];
            const double fa = disc.level_set[disc.mesh.tets[disc.active.tet_ids[e]][a]];
            const double fb = disc.level_set[disc.mesh.tets[disc.active.tet_ids[e]][b]];
            const double t = fa / (fa - fb);
            out.push_back((1.0 - t) * u_h[dofs[a]] + t * u_h[dofs[b]]);
        }
    }
    return out;
}

SparseMatrix triple_norm_matrix(const Discretization& disc, const CoefficientField& coeffs,
                                const StabilizationParams& params) {
    std::vector<Eigen::Triplet<double>> trips;
    const double sd_scale = params.tau1 * params.h;
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const Vec3& n = disc.cuts.polygons[e].normal;
        const Mat3 P = Mat3::Identity() - n * n.transpose();
        const Eigen::Matrix<double, 3, 4> tg = P * disc.basis[e].grads;
        Eigen::Matrix4d local = params.epsilon * disc.cuts.polygons[e].area * (tg.transpose() * tg);
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            const Eigen::Vector4d& lam = disc.quad_bary[q];
            const Eigen::Vector4d bg = tg.transpose() * coeffs.beta_at(dofs, lam, n);
            local += disc.quad.weights[q] * (lam * lam.transpose() + sd_scale * bg * bg.transpose());
        }
        const Eigen::Vector4d ng = disc.basis[e].grads.transpose() * n;
        local += (params.normal_weight() * disc.basis[e].volume) * (ng * ng.transpose());
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                trips.emplace_back(dofs[i], dofs[j], local(i, j));
            }
        }
    }
    SparseMatrix m(disc.num_dofs(), disc.num_dofs());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

}  // namespace surfsd

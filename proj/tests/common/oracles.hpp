#pragma once

#include "surfsd/fem.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace surfsd::testing {

// Barycentric coordinates and their gradients from the 4x4 affine system,
// independent of the mesh helpers.
struct AffineTet {
    Eigen::Matrix4d inv;

    explicit AffineTet(const std::array<Vec3, 4>& v) {
        Eigen::Matrix4d m;
        for (int i = 0; i < 4; ++i) {
            m.block<3, 1>(0, i) = v[i];
            m(3, i) = 1.0;
        }
        inv = m.inverse();
    }
    Eigen::Vector4d lambda(const Vec3& x) const { return inv * Eigen::Vector4d(x.x(), x.y(), x.z(), 1.0); }
    Vec3 grad(int i) const { return inv.block<1, 3>(i, 0).transpose(); }
};

// Each fan triangle of the polygon is split into four and integrated with the
// edge-midpoint rule, exact for quadratics.
template <class F>
inline void integrate_polygon(const CutPolygon& p, F&& f) {
    const Vec3 c = p.centroid();
    for (int k = 0; k < p.num_vertices; ++k) {
        const Vec3 a = p.vertices[k];
        const Vec3 b = p.vertices[(k + 1) % p.num_vertices];
        const Vec3 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
        const std::array<std::array<Vec3, 3>, 4> subs{{{a, mab, mca}, {mab, b, mbc}, {mca, mbc, c}, {mab, mbc, mca}}};
        for (const auto& t : subs) {
            const double area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
            for (int e = 0; e < 3; ++e) {
                f(0.5 * (t[e] + t[(e + 1) % 3]), area / 3.0);
            }
        }
    }
}

/// Dense system matrix of the stabilized forms, entry by entry on the refined
/// rule above. Exact for constant reaction coefficients.
inline Eigen::MatrixXd oracle_matrix(const Discretization& disc, const CoefficientField& c,
                                     const StabilizationParams& prm) {
    const int n = disc.num_dofs();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const auto v = disc.element_vertices(e);
        const AffineTet tet(v);
        const CutPolygon& poly = disc.cuts.polygons[e];
        const Vec3 nrm = poly.normal;
        const Mat3 P = Mat3::Identity() - nrm * nrm.transpose();
        std::array<Vec3, 4> tg;
        for (int i = 0; i < 4; ++i) {
            tg[i] = P * tet.grad(i);
        }
        integrate_polygon(poly, [&](const Vec3& x, double w) {
            const Eigen::Vector4d lam = tet.lambda(x);
            double alpha = 0.0;
            Vec3 beta = Vec3::Zero();
            for (int i = 0; i < 4; ++i) {
                alpha += lam[i] * c.alpha_nodal[dofs[i]];
                beta += lam[i] * c.beta_nodal[dofs[i]];
            }
            beta = P * beta;
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    const double conv_j = beta.dot(tg[j]) + alpha * lam[j];
                    double val = prm.epsilon * tg[i].dot(tg[j]) + lam[i] * conv_j;
                    val += prm.tau1 * prm.h * beta.dot(tg[i]) * conv_j;
                    a(dofs[i], dofs[j]) += w * val;
                }
            }
        });
        const double vol = std::abs((v[1] - v[0]).dot((v[2] - v[0]).cross(v[3] - v[0]))) / 6.0;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                a(dofs[i], dofs[j]) +=
                    prm.tau2 * std::pow(prm.h, prm.gamma) * vol * nrm.dot(tet.grad(i)) * nrm.dot(tet.grad(j));
            }
        }
    }
    return a;
}

}  // namespace surfsd::testing

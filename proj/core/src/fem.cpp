#include "surfsd/fem.hpp"

#include "surfsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace surfsd {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using Local = Eigen::Matrix4d;

void scatter(Triplets& trips, const std::array<int, 4>& dofs, const Local& local) {
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            trips.emplace_back(dofs[i], dofs[j], local(i, j));
        }
    }
}

SparseMatrix from_triplets(int n, const Triplets& trips) {
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Mat3 tangential_projector(const Vec3& n) { return Mat3::Identity() - n * n.transpose(); }

}  // namespace

double compute_tau1(double c_tau, double beta_inf, double h, double epsilon) {
    if (beta_inf * h >= epsilon) {
        return beta_inf > 0.0 ? c_tau / beta_inf : 0.0;
    }
    return c_tau * h / epsilon;
}

StabilizationParams StabilizationParams::make(double epsilon, double c_tau, double beta_inf, double h,
                                              std::optional<double> tau2, double gamma) {
    if (!(gamma >= 0.0 && gamma < 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must lie in [0, 2), got " + std::to_string(gamma));
    }
    if (epsilon < 0.0 || c_tau < 0.0 || beta_inf < 0.0 || !(h > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "epsilon, c_tau, beta_inf must be >= 0 and h > 0");
    }
    StabilizationParams p;
    p.epsilon = epsilon;
    p.c_tau = c_tau;
    p.beta_inf = beta_inf;
    p.h = h;
    p.gamma = gamma;
    p.tau1 = compute_tau1(c_tau, beta_inf, h, epsilon);
    if (tau2) {
        if (!(*tau2 > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "tau2 must be positive");
        }
        p.tau2 = *tau2;
    } else {
        if (!(p.tau1 > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "tau2 = 1/tau1 requested but tau1 is zero");
        }
        p.tau2 = 1.0 / p.tau1;
    }
    return p;
}

double StabilizationParams::normal_weight() const { return tau2 * std::pow(h, gamma); }

Discretization build_discretization(const ImplicitSurface& surface, const Aabb& box, int n) {
    Discretization d;
    d.mesh = build_background_mesh(box, n, &surface);
    d.level_set = sample_level_set(d.mesh, surface);
    d.cuts = build_cut_surface(d.mesh, d.level_set);
    d.active = extract_active_mesh(d.mesh, d.cuts);
    d.quad = build_surface_quadrature(d.cuts);

    d.basis.reserve(d.active.tet_ids.size());
    for (int e = 0; e < d.active.num_elements(); ++e) {
        const auto v = d.element_vertices(e);
        d.basis.push_back({p1_gradients(v), tet_volume(v)});
    }
    d.quad_bary.resize(d.quad.points.size());
    d.quad_feet.resize(d.quad.points.size());
    for (int e = 0; e < d.active.num_elements(); ++e) {
        const auto v = d.element_vertices(e);
        for (int q = d.quad.begin(e); q < d.quad.end(e); ++q) {
            d.quad_bary[q] = barycentric(v, d.quad.points[q]);
            d.quad_feet[q] = surface.closest_point(d.quad.points[q]);
        }
    }
    return d;
}

double CoefficientField::alpha_at(const std::array<int, 4>& dofs, const Eigen::Vector4d& bary) const {
    double a = 0.0;
    for (int i = 0; i < 4; ++i) {
        a += bary[i] * alpha_nodal[dofs[i]];
    }
    return a;
}

Vec3 CoefficientField::beta_at(const std::array<int, 4>& dofs, const Eigen::Vector4d& bary, const Vec3& normal) const {
    Vec3 b = Vec3::Zero();
    for (int i = 0; i < 4; ++i) {
        b += bary[i] * beta_nodal[dofs[i]];
    }
    return b - normal.dot(b) * normal;
}

CoefficientField build_coefficients(const ScalarField& alpha, const VectorField& beta, const ImplicitSurface& surface,
                                    const Discretization& disc) {
    CoefficientField c;
    const int n = disc.num_dofs();
    c.alpha_nodal.resize(n);
    c.beta_nodal.resize(n);
    std::vector<double> normal_component(n);
    double beta_inf = 0.0;
    for (int d = 0; d < n; ++d) {
        // coarse-mesh nodes may sit outside the working band; p is still well defined there
        const ClosestPointResult cp = surface.closest_point(disc.mesh.nodes[disc.active.dof_nodes[d]], BandCheck::Skip);
        c.alpha_nodal[d] = alpha(cp.foot);
        c.beta_nodal[d] = beta(cp.foot);
        normal_component[d] = std::abs(cp.normal.dot(c.beta_nodal[d]));
        beta_inf = std::max(beta_inf, c.beta_nodal[d].norm());
    }
    const double worst = n > 0 ? *std::max_element(normal_component.begin(), normal_component.end()) : 0.0;
    if (worst > 1e-8 * beta_inf) {
        throw Error(ErrorCode::NotTangential,
                    "beta has normal component " + std::to_string(worst) + " at a node foot");
    }
    if (alpha.constant) {
        c.alpha_is_zero = *alpha.constant == 0.0;
    } else {
        c.alpha_is_zero = std::all_of(c.alpha_nodal.begin(), c.alpha_nodal.end(), [](double a) { return a == 0.0; });
    }
    return c;
}

double sample_beta_inf(const Discretization& disc, const VectorField& beta) {
    double m = 0.0;
    for (const ClosestPointResult& cp : disc.quad_feet) {
        m = std::max(m, beta(cp.foot).norm());
    }
    return m;
}

Vector sample_rhs(const Discretization& disc, const ScalarField& f) {
    Vector out(static_cast<Eigen::Index>(disc.quad_feet.size()));
    for (std::size_t q = 0; q < disc.quad_feet.size(); ++q) {
        out[static_cast<Eigen::Index>(q)] = f(disc.quad_feet[q].foot);
    }
    return out;
}

SparseMatrix assemble_ah(const Discretization& disc, const CoefficientField& coeffs, double epsilon) {
    Triplets trips;
    trips.reserve(static_cast<std::size_t>(disc.active.num_elements()) * 16);
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const Vec3& n = disc.cuts.polygons[e].normal;
        const Eigen::Matrix<double, 3, 4> tg = tangential_projector(n) * disc.basis[e].grads;
        Local local = epsilon * disc.cuts.polygons[e].area * (tg.transpose() * tg);
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            const Eigen::Vector4d& lam = disc.quad_bary[q];
            const double w = disc.quad.weights[q];
            const double a = coeffs.alpha_at(dofs, lam);
            const Eigen::Vector4d bg = tg.transpose() * coeffs.beta_at(dofs, lam, n);
            local += w * (lam * bg.transpose() + a * lam * lam.transpose());
        }
        scatter(trips, dofs, local);
    }
    return from_triplets(disc.num_dofs(), trips);
}

SparseMatrix assemble_sh1(const Discretization& disc, const CoefficientField& coeffs, double tau1, double h) {
    Triplets trips;
    trips.reserve(static_cast<std::size_t>(disc.active.num_elements()) * 16);
    const double scale = tau1 * h;
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const Vec3& n = disc.cuts.polygons[e].normal;
        const Eigen::Matrix<double, 3, 4> tg = tangential_projector(n) * disc.basis[e].grads;
        Local local = Local::Zero();
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            const Eigen::Vector4d& lam = disc.quad_bary[q];
            const double w = disc.quad.weights[q];
            const double a = coeffs.alpha_at(dofs, lam);
            const Eigen::Vector4d bg = tg.transpose() * coeffs.beta_at(dofs, lam, n);
            // trial slot carries beta.grad v + alpha v, test slot beta.grad w
            local += w * (bg * (bg + a * lam).transpose());
        }
        scatter(trips, dofs, scale * local);
    }
    return from_triplets(disc.num_dofs(), trips);
}

SparseMatrix assemble_sh2(const Discretization& disc, double tau2, double gamma, double h) {
    Triplets trips;
    trips.reserve(static_cast<std::size_t>(disc.active.num_elements()) * 16);
    const double scale = tau2 * std::pow(h, gamma);
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const Eigen::Vector4d ng = disc.basis[e].grads.transpose() * disc.cuts.polygons[e].normal;
        scatter(trips, disc.active.elem_dofs[e], (scale * disc.basis[e].volume) * (ng * ng.transpose()));
    }
    return from_triplets(disc.num_dofs(), trips);
}

Vector assemble_rhs(const Discretization& disc, const Vector& f_at_quad, const CoefficientField& coeffs, double tau1,
                    double h) {
    Vector rhs = Vector::Zero(disc.num_dofs());
    const double scale = tau1 * h;
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const Vec3& n = disc.cuts.polygons[e].normal;
        const Eigen::Matrix<double, 3, 4> tg = tangential_projector(n) * disc.basis[e].grads;
        Eigen::Vector4d local = Eigen::Vector4d::Zero();
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            const Eigen::Vector4d& lam = disc.quad_bary[q];
            const double wf = disc.quad.weights[q] * f_at_quad[q];
            if (wf == 0.0) {
                continue;
            }
            local += wf * lam;
            if (scale != 0.0) {
                local += (scale * wf) * (tg.transpose() * coeffs.beta_at(dofs, lam, n));
            }
        }
        for (int i = 0; i < 4; ++i) {
            rhs[dofs[i]] += local[i];
        }
    }
    return rhs;
}

Vector assemble_mean_weights(const Discretization& disc) {
    Vector m = Vector::Zero(disc.num_dofs());
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            for (int i = 0; i < 4; ++i) {
                m[dofs[i]] += disc.quad.weights[q] * disc.quad_bary[q][i];
            }
        }
    }
    return m;
}

LinearSystem assemble_system(const Discretization& disc, const CoefficientField& coeffs, const Vector& f_at_quad,
                             const StabilizationParams& params, ConstraintMode mode) {
    LinearSystem sys;
    sys.num_dofs = disc.num_dofs();
    SparseMatrix a = assemble_ah(disc, coeffs, params.epsilon);
    if (params.tau1 != 0.0) {
        a += assemble_sh1(disc, coeffs, params.tau1, params.h);
    }
    a += assemble_sh2(disc, params.tau2, params.gamma, params.h);
    Vector rhs = assemble_rhs(disc, f_at_quad, coeffs, params.tau1, params.h);
    sys.mean_weights = assemble_mean_weights(disc);

    sys.constrained = mode == ConstraintMode::On ||
                      (mode == ConstraintMode::Auto && coeffs.alpha_is_zero && params.epsilon > 0.0);
    if (!sys.constrained) {
        sys.matrix = std::move(a);
        sys.rhs = std::move(rhs);
        return sys;
    }

    const int n = sys.num_dofs;
    Triplets trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * static_cast<std::size_t>(n));
    for (int r = 0; r < a.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            trips.emplace_back(r, static_cast<int>(it.col()), it.value());
        }
    }
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, n, sys.mean_weights[i]);
        trips.emplace_back(n, i, sys.mean_weights[i]);
    }
    sys.matrix = from_triplets(n + 1, trips);
    sys.rhs = Vector::Zero(n + 1);
    sys.rhs.head(n) = rhs;
    return sys;
}

CoefficientDiagnostics coefficient_diagnostics(const Discretization& disc, const CoefficientField& coeffs,
                                               const VectorField& beta) {
    CoefficientDiagnostics out;
    out.min_reaction_margin = std::numeric_limits<double>::infinity();
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const auto& dofs = disc.active.elem_dofs[e];
        const Vec3& n = disc.cuts.polygons[e].normal;
        const Mat3 P = tangential_projector(n);
        // Jacobian of the linear interpolant of the nodal beta values
        Mat3 jac = Mat3::Zero();
        for (int i = 0; i < 4; ++i) {
            jac += coeffs.beta_nodal[dofs[i]] * disc.basis[e].grads.col(i).transpose();
        }
        const double div = (P * jac * P).trace();
        for (int q = disc.quad.begin(e); q < disc.quad.end(e); ++q) {
            const Eigen::Vector4d& lam = disc.quad_bary[q];
            out.max_beta_error =
                std::max(out.max_beta_error, (beta(disc.quad_feet[q].foot) - coeffs.beta_at(dofs, lam, n)).norm());
            out.min_reaction_margin = std::min(out.min_reaction_margin, coeffs.alpha_at(dofs, lam) - 0.5 * div);
        }
    }
    for (const CutEdge& edge : disc.cuts.edges) {
        const int ea = edge.poly_a;
        const int eb = edge.poly_b;
        const auto va = disc.element_vertices(ea);
        const auto vb = disc.element_vertices(eb);
        for (const Vec3& x : {edge.p0, edge.p1, Vec3(0.5 * (edge.p0 + edge.p1))}) {
            const Vec3 ba = coeffs.beta_at(disc.active.elem_dofs[ea], barycentric(va, x), disc.cuts.polygons[ea].normal);
            const Vec3 bb = coeffs.beta_at(disc.active.elem_dofs[eb], barycentric(vb, x), disc.cuts.polygons[eb].normal);
            out.max_beta_jump = std::max(out.max_beta_jump, std::abs(edge.conormal_a.dot(ba) + edge.conormal_b.dot(bb)));
        }
    }
    return out;
}

}  // namespace surfsd

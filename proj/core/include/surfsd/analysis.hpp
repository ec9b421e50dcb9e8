#pragma once

#include "surfsd/fem.hpp"

#include <span>
#include <vector>

namespace surfsd {

/// Errors of u_h against the normal extension u^e, measured on Gamma_h.
struct ErrorReport {
    double h = 0.0;
    int n_dofs = 0;
    double l2_err = 0.0;      ///< ||u^e - u_h||_{K_h}
    double h1t_err = 0.0;     ///< ||grad_{G_h}(u^e - u_h)||_{K_h}
    double sd_err = 0.0;      ///< (tau1 h)^{1/2} ||beta_h . grad_{G_h}(u^e - u_h)||_{K_h}
    double ns_err = 0.0;      ///< (tau2 h^gamma)^{1/2} ||n_h . grad(u^e - u_h)||_{T_h}
    double triple_err = 0.0;  ///< sqrt(l2^2 + eps h1t^2 + sd^2 + ns^2)
};

/// `u_h` holds one value per finite element DOF (a trailing multiplier entry
/// is ignored). Gradients of u^e come from fourth-order differences with step
/// h_fd (non-positive selects default_fd_step()).
ErrorReport compute_errors(const Discretization& disc, const Vector& u_h, const ScalarField& u_exact,
                           const ImplicitSurface& surface, const CoefficientField& coeffs,
                           const StabilizationParams& params, double h_fd = 0.0);

/// Pairwise rates log(e_k / e_{k+1}) / log(h_k / h_{k+1}).
std::vector<double> eoc(std::span<const double> errors, std::span<const double> hs);

struct GeometryDiagnostics {
    double max_rho = 0.0;
    double max_normal_dev = 0.0;
};

/// Distance to Gamma and normal deviation |n o p - n_h| over the quadrature points.
GeometryDiagnostics geometry_diagnostics(const CutSurfaceMesh& cuts, const SurfaceQuadrature& quad,
                                         const ImplicitSurface& surface);

struct OvershootReport {
    double min_u = 0.0;
    double max_u = 0.0;
    double undershoot = 0.0;
    double overshoot = 0.0;

    double oscillation() const { return undershoot + overshoot; }
};

OvershootReport overshoot_report(std::span<const double> u_h, double lo, double hi);

/// P1 values of u_h at the vertices of every cut polygon, in polygon order.
std::vector<double> surface_vertex_values(const Discretization& disc, const Vector& u_h);

/// Symmetric matrix T with v^T T v = |||v|||_h^2.
SparseMatrix triple_norm_matrix(const Discretization& disc, const CoefficientField& coeffs,
                                const StabilizationParams& params);

}  // namespace surfsd

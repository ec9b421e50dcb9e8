#pragma once

#include "surfsd/cut.hpp"
#include "surfsd/geometry.hpp"
#include "surfsd/mesh.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <vector>

namespace surfsd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// tau1 = c_tau * min(1/beta_inf, h/epsilon); the convection branch is taken
/// when beta_inf * h >= epsilon (always when epsilon == 0).
double compute_tau1(double c_tau, double beta_inf, double h, double epsilon);

/// Method dials for one mesh.
struct StabilizationParams {
    double epsilon = 0.0;
    double c_tau = 0.0;
    double beta_inf = 0.0;
    double h = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    double gamma = 1.0;

    /// tau2 == nullopt selects tau2 = 1/tau1. Throws Error(InvalidArgument)
    /// for gamma outside [0, 2), negative dials, or 1/tau1 with tau1 == 0.
    static StabilizationParams make(double epsilon, double c_tau, double beta_inf, double h,
                                    std::optional<double> tau2, double gamma);

    double normal_weight() const;  // tau2 * h^gamma
};

/// Continuous problem data: L u = beta . grad_G u + alpha u - eps lap_G u = f.
struct Problem {
    ImplicitSurface surface;
    ScalarField alpha;
    VectorField beta;
    ScalarField f;
    std::optional<ScalarField> exact;
};

/// Basis data of one active tet.
struct ElementBasis {
    Eigen::Matrix<double, 3, 4> grads;
    double volume = 0.0;
};

/// Everything that depends only on the surface and the background mesh.
struct Discretization {
    BackgroundMesh mesh;
    std::vector<double> level_set;
    CutSurfaceMesh cuts;
    ActiveMesh active;
    SurfaceQuadrature quad;
    std::vector<ElementBasis> basis;
    /// Barycentric coordinates of each quadrature point in its parent tet.
    std::vector<Eigen::Vector4d> quad_bary;
    /// Closest-point data of each quadrature point.
    std::vector<ClosestPointResult> quad_feet;

    double h() const { return mesh.h; }
    int num_dofs() const { return active.num_dofs(); }
    std::array<Vec3, 4> element_vertices(int e) const { return mesh.tet_vertices(active.tet_ids[e]); }
};

Discretization build_discretization(const ImplicitSurface& surface, const Aabb& box, int n);

/// Nodal interpolants of alpha o p and beta o p on the active DOFs. The
/// tangential projection with the element normal is applied on evaluation.
struct CoefficientField {
    std::vector<double> alpha_nodal;
    std::vector<Vec3> beta_nodal;
    bool alpha_is_zero = false;

    double alpha_at(const std::array<int, 4>& dofs, const Eigen::Vector4d& bary) const;
    Vec3 beta_at(const std::array<int, 4>& dofs, const Eigen::Vector4d& bary, const Vec3& normal) const;
};

/// Throws Error(NotTangential) if |n . beta| > 1e-8 beta_inf at a node foot.
CoefficientField build_coefficients(const ScalarField& alpha, const VectorField& beta, const ImplicitSurface& surface,
                                    const Discretization& disc);

/// max |beta o p| over the surface quadrature points.
double sample_beta_inf(const Discretization& disc, const VectorField& beta);

/// f o p at every surface quadrature point.
Vector sample_rhs(const Discretization& disc, const ScalarField& f);

// Matrices use row = test function, column = trial function, i.e.
// M(i, j) = form(phi_j, phi_i).
SparseMatrix assemble_ah(const Discretization& disc, const CoefficientField& coeffs, double epsilon);
SparseMatrix assemble_sh1(const Discretization& disc, const CoefficientField& coeffs, double tau1, double h);
SparseMatrix assemble_sh2(const Discretization& disc, double tau2, double gamma, double h);
Vector assemble_rhs(const Discretization& disc, const Vector& f_at_quad, const CoefficientField& coeffs, double tau1,
                    double h);
/// M_i = integral of phi_i over Gamma_h.
Vector assemble_mean_weights(const Discretization& disc);

enum class ConstraintMode { Auto, On, Off };

struct LinearSystem {
    SparseMatrix matrix;
    Vector rhs;
    /// Number of finite element DOFs (matrix has one more row with a constraint).
    int num_dofs = 0;
    bool constrained = false;
    Vector mean_weights;
};

/// A = a_h + s_h1 + s_h2 and the load L_h. Auto adds the zero-mean
/// Lagrange multiplier when alpha is identically zero and epsilon > 0.
LinearSystem assemble_system(const Discretization& disc, const CoefficientField& coeffs, const Vector& f_at_quad,
                             const StabilizationParams& params, ConstraintMode mode = ConstraintMode::Auto);

struct CoefficientDiagnostics {
    /// max over cut edges of |nu_1 . beta_h + nu_2 . beta_h|
    double max_beta_jump = 0.0;
    /// max over quadrature points of |beta o p - P_h beta_h|
    double max_beta_error = 0.0;
    /// min over quadrature points of alpha_h - div_{Gamma_h}(beta_h) / 2
    double min_reaction_margin = 0.0;
};

CoefficientDiagnostics coefficient_diagnostics(const Discretization& disc, const CoefficientField& coeffs,
                                               const VectorField& beta);

}  // namespace surfsd

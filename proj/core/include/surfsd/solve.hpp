#pragma once

#include "surfsd/error.hpp"
#include "surfsd/fem.hpp"

#include <string_view>

namespace surfsd {

enum class SolveMethod { BiCGStab, DenseLU, SparseLU };

std::string_view to_string(SolveMethod m) noexcept;

struct SolveReport {
    Vector solution;
    int iterations = 0;
    /// ||b - A x|| / ||b||, recomputed from the returned solution.
    double final_residual = 0.0;
    SolveMethod method = SolveMethod::BiCGStab;
};

/// Raised when no method reaches the tolerance; carries the best iterate.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, SolveReport best)
        : Error(ErrorCode::NoConvergence, what), best_(std::move(best)) {}
    const SolveReport& best() const noexcept { return best_; }

private:
    SolveReport best_;
};

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b);

/// Diagonally preconditioned BiCGSTAB. If it stalls, systems with at most
/// 2000 unknowns fall back to dense LU and larger ones to sparse LU.
SolveReport solve(const SparseMatrix& a, const Vector& b, double tol, int max_iter);
SolveReport solve(const LinearSystem& system, double tol, int max_iter);

struct ConditionEstimate {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double kappa = 0.0;
    int iterations = 0;
};

/// 2-norm condition number from power iteration on A^T A (largest singular
/// value) and inverse power iteration with a sparse LU factorization
/// (smallest singular value). `tol` is the target relative accuracy.
ConditionEstimate estimate_condition_number(const SparseMatrix& a, double tol = 1e-3, int max_iter = 50000);

}  // namespace surfsd

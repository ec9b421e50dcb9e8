#include "surfsd/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

namespace surfsd {

namespace {

constexpr Eigen::Index kDenseLimit = 2000;

// Tracks a geometrically converging sequence and estimates the distance to
// its limit from the last two increments.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(double tol) : tol_(tol) {}

    bool update(double value) {
        const double delta = std::abs(value - last_);
        last_ = value;
        bool done = false;
        if (std::isfinite(prev_delta_) && prev_delta_ > 0.0) {
            const double ratio = delta / prev_delta_;
            const double remaining = ratio < 1.0 ? delta * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
            done = delta <= tol_ * std::abs(value) && remaining <= 0.1 * tol_ * std::abs(value);
        }
        if (delta == 0.0 && std::isfinite(prev_delta_)) {
            done = true;
        }
        prev_delta_ = delta;
        return done;
    }

private:
    double tol_;
    double last_ = std::numeric_limits<double>::infinity();
    double prev_delta_ = std::numeric_limits<double>::infinity();
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Vector start_vector(Eigen::Index n) {
    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = dist(rng);
    }
    return x.normalized();
}

}  // namespace

std::string_view to_string(SolveMethod m) noexcept {
    switch (m) {
        case SolveMethod::BiCGStab: return "bicgstab";
        case SolveMethod::DenseLU: return "dense-lu";
        case SolveMethod::SparseLU: return "sparse-lu";
    }
    return "unknown";
}

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
    const double nb = b.norm();
    const double nr = (b - a * x).norm();
    return nb > 0.0 ? nr / nb : nr;
}

SolveReport solve(const SparseMatrix& a, const Vector& b, double tol, int max_iter) {
    if (!(tol > 0.0 && tol < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "solver tolerance must lie in (0, 1)");
    }
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        throw Error(ErrorCode::InvalidArgument, "matrix and right-hand side sizes do not match");
    }
    SolveReport report;
    if (b.norm() == 0.0) {
        report.solution = Vector::Zero(b.size());
        return report;
    }

    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> krylov;
    krylov.setTolerance(tol);
    krylov.setMaxIterations(max_iter);
    krylov.compute(a);
    report.solution = krylov.solve(b);
    report.iterations = static_cast<int>(krylov.iterations());
    report.method = SolveMethod::BiCGStab;
    report.final_residual = relative_residual(a, report.solution, b);
    if (report.solution.allFinite() && report.final_residual <= tol) {
        return report;
    }

    SolveReport best = report;
    if (!best.solution.allFinite()) {
        best.solution = Vector::Zero(b.size());
        best.final_residual = 1.0;
    }
    if (a.rows() <= kDenseLimit) {
        const Eigen::MatrixXd dense(a);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
        if (!(lu.rcond() > std::numeric_limits<double>::epsilon())) {
            throw Error(ErrorCode::SingularSystem, "dense LU pivot breakdown, rcond " + sci(lu.rcond()));
        }
        report.solution = lu.solve(b);
        report.method = SolveMethod::DenseLU;
    } else {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(Eigen::SparseMatrix<double>(a));
        if (lu.info() != Eigen::Success) {
            throw Error(ErrorCode::SingularSystem, "sparse LU factorization failed: " + lu.lastErrorMessage());
        }
        report.solution = lu.solve(b);
        report.method = SolveMethod::SparseLU;
    }
    report.iterations = 1;
    report.final_residual = relative_residual(a, report.solution, b);
    if (!report.solution.allFinite()) {
        throw Error(ErrorCode::SingularSystem, "direct solve produced non-finite values");
    }
    if (report.final_residual > tol) {
        if (report.final_residual < best.final_residual) {
            best = report;
        }
        throw NoConvergenceError("relative residual " + sci(best.final_residual) + " above tolerance " + sci(tol),
                                 best);
    }
    return report;
}

SolveReport solve(const LinearSystem& system, double tol, int max_iter) {
    return solve(system.matrix, system.rhs, tol, max_iter);
}

ConditionEstimate estimate_condition_number(const SparseMatrix& a, double tol, int max_iter) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw Error(ErrorCode::InvalidArgument, "condition number needs a non-empty square matrix");
    }
    ConditionEstimate est;

    Vector x = start_vector(a.rows());
    ConvergenceMonitor top(tol);
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector y = a * x;
        const Vector z = a.transpose() * y;
        est.sigma_max = y.norm();
        ++est.iterations;
        const double zn = z.norm();
        if (zn == 0.0) {
            throw Error(ErrorCode::SingularSystem, "power iteration hit the null space");
        }
        x = z / zn;
        if (top.update(est.sigma_max)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence, "power iteration for the largest singular value");
    }

    const Eigen::SparseMatrix<double> col_major(a);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(col_major);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_t;
    lu_t.compute(Eigen::SparseMatrix<double>(col_major.transpose()));
    if (lu.info() != Eigen::Success || lu_t.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularSystem, "sparse LU factorization failed in inverse iteration");
    }

    x = start_vector(a.rows());
    ConvergenceMonitor bottom(tol);
    converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector y = lu_t.solve(x);
        const Vector z = lu.solve(y);
        const double yn = y.norm();
        if (!std::isfinite(yn) || yn == 0.0) {
            throw Error(ErrorCode::SingularSystem, "inverse iteration diverged");
        }
        est.sigma_min = 1.0 / yn;
        ++est.iterations;
        x = z / z.norm();
        if (bottom.update(est.sigma_min)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence, "inverse iteration for the smallest singular value");
    }
    est.kappa = est.sigma_max / est.sigma_min;
    return est;
}

}  // namespace surfsd

#pragma once

#include "surfsd/analysis.hpp"
#include "surfsd/cli/config.hpp"
#include "surfsd/solve.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace surfsd::cli {

using Progress = std::function<void(const std::string&)>;

/// Everything produced by one solve on one mesh.
struct LevelSolution {
    Discretization disc;
    CoefficientField coeffs;
    StabilizationParams params;
    LinearSystem system;
    SolveReport report;
    std::optional<ErrorReport> errors;
};

StabilizationParams make_params(const MethodSpec& method, double beta_inf, double h);

LevelSolution solve_level(const Problem& problem, const Aabb& box, int n, const MethodSpec& method,
                          const SolverSpec& solver, double fd_step);

struct ConvergenceRow {
    int level = 0;
    LevelSolution solution;
    std::optional<double> eoc_l2;
    std::optional<double> eoc_triple;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// Set when a level failed; rows then holds the levels before it.
    std::optional<std::string> failure;
};

/// Needs at least three levels and an exact solution.
ConvergenceTable convergence_study(const RunConfig& config, const Progress& progress = {});

struct ConditionRow {
    double gamma = 0.0;
    int n = 0;
    double h = 0.0;
    /// 0 for the unshifted surface, 1..K for the random center offsets.
    int offset_id = 0;
    Vec3 offset = Vec3::Zero();
    ConditionEstimate estimate;
};

/// Offsets are uniform in [-h/2, h/2]^3, drawn from condition.seed; the same
/// unit draws are reused for every gamma and level.
std::vector<ConditionRow> condition_study(const RunConfig& config, const Progress& progress = {});

/// Least-squares slope of log(kappa) against log(1/h) over the rows with the
/// given gamma and offset id.
double fitted_slope(const std::vector<ConditionRow>& rows, double gamma, int offset_id = 0);

struct LayerRow {
    LayerRun run;
    StabilizationParams params;
    OvershootReport overshoot;
    /// max |u_h| over the vertices of Gamma_h.
    double peak = 0.0;
    Vector solution;
};

struct LayerStudy {
    Discretization disc;
    std::vector<LayerRow> rows;
    const LayerRow& row(const std::string& name) const;
};

LayerStudy layer_study(const RunConfig& config, const Progress& progress = {});

/// Drivers writing CSV, VTK and manifest.txt into out_dir. On a numerical
/// failure they write what they have, mark the manifest partial and rethrow.
std::vector<std::filesystem::path> run_solve(const RunConfig& config, const std::filesystem::path& out_dir,
                                             const Progress& progress = {});
std::vector<std::filesystem::path> run_convergence(const RunConfig& config, const std::filesystem::path& out_dir,
                                                   const Progress& progress = {});
std::vector<std::filesystem::path> run_condition(const RunConfig& config, const std::filesystem::path& out_dir,
                                                 const Progress& progress = {});
std::vector<std::filesystem::path> run_layer(const RunConfig& config, const std::filesystem::path& out_dir,
                                             const Progress& progress = {});

}  // namespace surfsd::cli

#include "surfsd/cli/drivers.hpp"

#include "surfsd/cli/output.hpp"
#include "surfsd/cli/problems.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace surfsd::cli {

namespace fs = std::filesystem;

namespace {

void report(const Progress& progress, const std::string& msg) {
    if (progress) {
        progress(msg);
    }
}

int require_n(const RunConfig& config) {
    if (!config.n) {
        throw ConfigError("mesh.n", "missing");
    }
    return *config.n;
}

std::string optional_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Manifest: the resolved config (re-readable as is) plus a run section that
// the parser skips.
class Manifest {
public:
    Manifest(const RunConfig& config, std::string_view command) {
        RunConfig resolved = config;
        resolved.surface = resolve_surface(config);
        text_ = to_yaml(resolved);
        text_ += "run:\n";
        text_ += fmt::format("  command: {}\n", command);
    }

    void add(std::string_view key, const std::string& value, int indent = 2) {
        text_ += fmt::format("{:{}}{}: {}\n", "", indent, key, value);
    }
    void add(std::string_view key, double value, int indent = 2) { add(key, format_double(value), indent); }
    void add(std::string_view key, int value, int indent = 2) { add(key, std::to_string(value), indent); }
    void item(int indent = 4) { text_ += fmt::format("{:{}}-\n", "", indent); }

    void add_solution(const LevelSolution& s, int indent) {
        add("n", s.disc.mesh.n, indent);
        add("h", s.disc.h(), indent);
        add("n_dofs", s.disc.num_dofs(), indent);
        add("beta_inf", s.params.beta_inf, indent);
        add("tau1", s.params.tau1, indent);
        add("tau2", s.params.tau2, indent);
        add("constrained", std::string(s.system.constrained ? "true" : "false"), indent);
        add("solver_method", std::string(to_string(s.report.method)), indent);
        add("iterations", s.report.iterations, indent);
        add("residual", s.report.final_residual, indent);
    }

    void finish(const fs::path& dir, const std::optional<std::string>& failure) {
        add("status", std::string(failure ? "partial" : "complete"));
        if (failure) {
            std::string escaped;
            for (char c : *failure) {
                escaped += (c == '"' || c == '\\') ? std::string("\\") + c : std::string(1, c);
            }
            add("error", "\"" + escaped + "\"");
        }
        write_text(dir / "manifest.txt", text_);
    }

private:
    std::string text_;
};

Problem problem_for(const RunConfig& config, const ImplicitSurface& surface) {
    return build_problem(config.problem, surface, config.method.epsilon, config.fd_step);
}

}  // namespace

StabilizationParams make_params(const MethodSpec& method, double beta_inf, double h) {
    return StabilizationParams::make(method.epsilon, method.c_tau, beta_inf, h, method.tau2, method.gamma);
}

LevelSolution solve_level(const Problem& problem, const Aabb& box, int n, const MethodSpec& method,
                          const SolverSpec& solver, double fd_step) {
    LevelSolution s;
    s.disc = build_discretization(problem.surface, box, n);
    s.coeffs = build_coefficients(problem.alpha, problem.beta, problem.surface, s.disc);
    s.params = make_params(method, sample_beta_inf(s.disc, problem.beta), s.disc.h());
    s.system = assemble_system(s.disc, s.coeffs, sample_rhs(s.disc, problem.f), s.params, method.constraint);
    s.report = solve(s.system, solver.tol, solver.max_iter);
    if (problem.exact) {
        s.errors = compute_errors(s.disc, s.report.solution, *problem.exact, problem.surface, s.coeffs, s.params,
                                  fd_step);
    }
    return s;
}

ConvergenceTable convergence_study(const RunConfig& config, const Progress& progress) {
    validate_levels(config.levels, 3, "mesh.levels");
    const ImplicitSurface surface = resolve_surface(config).build();
    const Problem problem = problem_for(config, surface);
    if (!problem.exact) {
        throw ConfigError("problem.u", "a convergence study needs an exact solution");
    }
    ConvergenceTable table;
    for (std::size_t k = 0; k < config.levels.size(); ++k) {
        const int n = config.levels[k];
        report(progress, fmt::format("level {}: n = {}", k, n));
        try {
            ConvergenceRow row;
            row.level = static_cast<int>(k);
            row.solution = solve_level(problem, config.box, n, config.method, config.solver, config.fd_step);
            if (!table.rows.empty()) {
                const ErrorReport& a = *table.rows.back().solution.errors;
                const ErrorReport& b = *row.solution.errors;
                const double hs[] = {a.h, b.h};
                const double l2[] = {a.l2_err, b.l2_err};
                const double tr[] = {a.triple_err, b.triple_err};
                row.eoc_l2 = eoc(l2, hs).front();
                row.eoc_triple = eoc(tr, hs).front();
            }
            table.rows.push_back(std::move(row));
        } catch (const Error& e) {
            table.failure = fmt::format("level {} (n = {}): {}", k, n, e.what());
            break;
        }
    }
    return table;
}

std::vector<ConditionRow> condition_study(const RunConfig& config, const Progress& progress) {
    std::vector<int> levels = config.levels;
    if (levels.empty()) {
        levels.push_back(require_n(config));
    }
    const ConditionSpec spec = config.condition.value_or(ConditionSpec{});
    const std::vector<double> gammas = spec.gammas.empty() ? std::vector<double>{config.method.gamma} : spec.gammas;
    const ImplicitSurface base = resolve_surface(config).build();

    std::vector<Vec3> unit_offsets;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int k = 0; k < spec.offsets; ++k) {
        const double x = dist(rng);
        const double y = dist(rng);
        const double z = dist(rng);
        unit_offsets.emplace_back(x, y, z);
    }

    std::vector<ConditionRow> rows;
    for (double gamma : gammas) {
        MethodSpec method = config.method;
        method.gamma = gamma;
        for (int n : levels) {
            const double h = mesh_size(config.box, n);
            const int count = spec.offsets > 0 ? spec.offsets : 1;
            for (int k = 0; k < count; ++k) {
                ConditionRow row;
                row.gamma = gamma;
                row.n = n;
                row.h = h;
                row.offset_id = spec.offsets > 0 ? k + 1 : 0;
                row.offset = spec.offsets > 0 ? Vec3(h * unit_offsets[k]) : Vec3::Zero();
                const ImplicitSurface surface = base.translated(row.offset);
                const Problem problem = problem_for(config, surface);
                const Discretization disc = build_discretization(surface, config.box, n);
                const CoefficientField coeffs = build_coefficients(problem.alpha, problem.beta, surface, disc);
                const StabilizationParams params = make_params(method, sample_beta_inf(disc, problem.beta), disc.h());
                const LinearSystem sys =
                    assemble_system(disc, coeffs, Vector::Zero(static_cast<Eigen::Index>(disc.quad.points.size())),
                                    params, method.constraint);
                row.estimate = estimate_condition_number(sys.matrix, spec.tol);
                report(progress, fmt::format("gamma {} n {} offset {}: kappa {:.6g}", gamma, n, row.offset_id,
                                             row.estimate.kappa));
                rows.push_back(row);
            }
        }
    }
    return rows;
}

double fitted_slope(const std::vector<ConditionRow>& rows, double gamma, int offset_id) {
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    int m = 0;
    for (const ConditionRow& r : rows) {
        if (r.gamma != gamma || r.offset_id != offset_id) {
            continue;
        }
        const double x = std::log(1.0 / r.h);
        const double y = std::log(r.estimate.kappa);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) {
        throw Error(ErrorCode::DegenerateLevels, "slope fit needs at least two levels");
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

const LayerRow& LayerStudy::row(const std::string& name) const {
    for (const LayerRow& r : rows) {
        if (r.run.name == name) {
            return r;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "no layer run named " + name);
}

LayerStudy layer_study(const RunConfig& config, const Progress& progress) {
    if (!config.layer) {
        throw ConfigError("layer", "missing");
    }
    const int n = require_n(config);
    const ImplicitSurface surface = resolve_surface(config).build();
    const Problem problem = problem_for(config, surface);

    LayerStudy study;
    study.disc = build_discretization(surface, config.box, n);
    const CoefficientField coeffs = build_coefficients(problem.alpha, problem.beta, surface, study.disc);
    const Vector f = sample_rhs(study.disc, problem.f);
    const double beta_inf = sample_beta_inf(study.disc, problem.beta);
    for (const LayerRun& run : config.layer->runs) {
        MethodSpec method = config.method;
        method.c_tau = run.c_tau;
        method.tau2 = run.tau2;
        method.gamma = run.gamma;
        LayerRow row;
        row.run = run;
        row.params = make_params(method, beta_inf, study.disc.h());
        const LinearSystem sys = assemble_system(study.disc, coeffs, f, row.params, method.constraint);
        row.solution = solve(sys, config.solver.tol, config.solver.max_iter).solution;
        const std::vector<double> values = surface_vertex_values(study.disc, row.solution);
        row.overshoot = overshoot_report(values, config.layer->lo, config.layer->hi);
        row.peak = std::max(std::abs(row.overshoot.min_u), std::abs(row.overshoot.max_u));
        report(progress, fmt::format("{}: min {:.4f} max {:.4f} oscillation {:.4f}", run.name, row.overshoot.min_u,
                                     row.overshoot.max_u, row.overshoot.oscillation()));
        study.rows.push_back(std::move(row));
    }
    return study;
}

std::vector<fs::path> run_solve(const RunConfig& config, const fs::path& out_dir, const Progress& progress) {
    const int n = require_n(config);
    const ImplicitSurface surface = resolve_surface(config).build();
    const Problem problem = problem_for(config, surface);
    Manifest manifest(config, "solve");
    report(progress, fmt::format("solve: n = {}", n));
    LevelSolution s;
    try {
        s = solve_level(problem, config.box, n, config.method, config.solver, config.fd_step);
    } catch (const Error& e) {
        manifest.finish(out_dir, std::string(e.what()));
        throw;
    }
    std::vector<fs::path> files;
    const ErrorReport* err = s.errors ? &*s.errors : nullptr;
    auto err_col = [err](double ErrorReport::*field) { return err ? format_double(err->*field) : std::string(); };
    write_csv(out_dir / "solve.csv",
              {"n", "h", "n_dofs", "epsilon", "c_tau", "tau1", "tau2", "gamma", "beta_inf", "constrained",
               "solver_method", "iterations", "residual", "l2_err", "h1t_err", "sd_err", "ns_err", "triple_err"},
              {{std::to_string(n), format_double(s.disc.h()), std::to_string(s.disc.num_dofs()),
                format_double(s.params.epsilon), format_double(s.params.c_tau), format_double(s.params.tau1),
                format_double(s.params.tau2), format_double(s.params.gamma), format_double(s.params.beta_inf),
                s.system.constrained ? "1" : "0", std::string(to_string(s.report.method)),
                std::to_string(s.report.iterations), format_double(s.report.final_residual),
                err_col(&ErrorReport::l2_err), err_col(&ErrorReport::h1t_err), err_col(&ErrorReport::sd_err),
                err_col(&ErrorReport::ns_err), err_col(&ErrorReport::triple_err)}});
    files.push_back(out_dir / "solve.csv");
    if (config.output.vtk) {
        write_surface_vtk(out_dir / "solution.vtk", s.disc, s.report.solution, "surfsd solution");
        files.push_back(out_dir / "solution.vtk");
    }
    manifest.add_solution(s, 2);
    if (err) {
        manifest.add("l2_err", err->l2_err);
        manifest.add("triple_err", err->triple_err);
    }
    manifest.finish(out_dir, std::nullopt);
    files.push_back(out_dir / "manifest.txt");
    return files;
}

std::vector<fs::path> run_convergence(const RunConfig& config, const fs::path& out_dir, const Progress& progress) {
    const ConvergenceTable table = convergence_study(config, progress);
    std::vector<CsvRow> rows;
    Manifest manifest(config, "convergence");
    manifest.add("levels", std::string());
    for (const ConvergenceRow& r : table.rows) {
        const ErrorReport& e = *r.solution.errors;
        rows.push_back({std::to_string(r.level), std::to_string(r.solution.disc.mesh.n), format_double(e.h),
                        std::to_string(e.n_dofs), format_double(e.l2_err), format_double(e.h1t_err),
                        format_double(e.sd_err), format_double(e.triple_err), optional_double(r.eoc_l2),
                        optional_double(r.eoc_triple)});
        manifest.item();
        manifest.add_solution(r.solution, 6);
    }
    write_csv(out_dir / "convergence.csv",
              {"level", "n", "h", "n_dofs", "l2_err", "h1t_err", "sd_err", "triple_err", "eoc_l2", "eoc_triple"},
              rows);
    std::vector<fs::path> files{out_dir / "convergence.csv"};
    if (config.output.vtk && !table.rows.empty()) {
        const LevelSolution& last = table.rows.back().solution;
        write_surface_vtk(out_dir / "solution.vtk", last.disc, last.report.solution,
                          fmt::format("surfsd solution n={}", last.disc.mesh.n));
        files.push_back(out_dir / "solution.vtk");
    }
    manifest.finish(out_dir, table.failure);
    files.push_back(out_dir / "manifest.txt");
    if (table.failure) {
        throw Error(ErrorCode::NoConvergence, "convergence study incomplete: " + *table.failure);
    }
    return files;
}

std::vector<fs::path> run_condition(const RunConfig& config, const fs::path& out_dir, const Progress& progress) {
    Manifest manifest(config, "condition");
    std::vector<ConditionRow> result;
    std::optional<std::string> failure;
    try {
        result = condition_study(config, progress);
    } catch (const Error& e) {
        failure = e.what();
    }
    std::vector<CsvRow> rows;
    for (const ConditionRow& r : result) {
        rows.push_back({format_double(r.gamma), std::to_string(r.n), format_double(r.h), std::to_string(r.offset_id),
                        format_double(r.estimate.kappa), format_double(r.estimate.sigma_max),
                        format_double(r.estimate.sigma_min)});
    }
    write_csv(out_dir / "condition.csv", {"gamma", "n", "h", "offset_id", "kappa", "sigma_max", "sigma_min"}, rows);
    if (!failure && !result.empty() && result.front().offset_id == 0 && config.levels.size() >= 2) {
        manifest.add("slopes", std::string());
        for (double g : config.condition && !config.condition->gammas.empty() ? config.condition->gammas
                                                                               : std::vector<double>{config.method.gamma}) {
            manifest.add(format_double(g), fitted_slope(result, g), 4);
        }
    }
    manifest.finish(out_dir, failure);
    if (failure) {
        throw Error(ErrorCode::NoConvergence, "condition study incomplete: " + *failure);
    }
    return {out_dir / "condition.csv", out_dir / "manifest.txt"};
}

std::vector<fs::path> run_layer(const RunConfig& config, const fs::path& out_dir, const Progress& progress) {
    Manifest manifest(config, "layer");
    LayerStudy study;
    try {
        study = layer_study(config, progress);
    } catch (const Error& e) {
        manifest.finish(out_dir, std::string(e.what()));
        throw;
    }
    const double ref_peak = study.row(config.layer->reference).peak;
    std::vector<CsvRow> rows;
    std::vector<fs::path> files{out_dir / "layer.csv"};
    for (const LayerRow& r : study.rows) {
        rows.push_back({r.run.name, std::to_string(study.disc.mesh.n), format_double(study.disc.h()),
                        format_double(r.params.c_tau), format_double(r.params.tau1), format_double(r.params.tau2),
                        format_double(r.params.gamma), format_double(r.overshoot.min_u),
                        format_double(r.overshoot.max_u), format_double(r.overshoot.undershoot),
                        format_double(r.overshoot.overshoot), format_double(r.overshoot.oscillation()),
                        format_double(r.peak), format_double(r.peak / ref_peak)});
        if (config.output.vtk) {
            const fs::path vtk = out_dir / fmt::format("layer_{}.vtk", r.run.name);
            write_surface_vtk(vtk, study.disc, r.solution, "surfsd layer run " + r.run.name);
            files.push_back(vtk);
        }
    }
    write_csv(out_dir / "layer.csv",
              {"run", "n", "h", "c_tau", "tau1", "tau2", "gamma", "min_u", "max_u", "undershoot", "overshoot",
               "oscillation", "peak", "peak_ratio"},
              rows);
    manifest.add("n_dofs", study.disc.num_dofs());
    manifest.finish(out_dir, std::nullopt);
    files.push_back(out_dir / "manifest.txt");
    return files;
}

}  // namespace surfsd::cli

#include "surfsd/cli/config.hpp"

#include "surfsd/cli/expression.hpp"
#include "surfsd/error.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace surfsd::cli {

namespace {

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) {
        throw ConfigError(path, "expected a mapping");
    }
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(join(path, key), "unknown key");
        }
    }
}

template <class T>
T read(const YAML::Node& node, const std::string& path) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path, "cannot read value '" + YAML::Dump(node) + "'");
    }
}

double read_double(const YAML::Node& node, const std::string& path) {
    const double v = read<double>(node, path);
    if (!std::isfinite(v)) {
        throw ConfigError(path, "must be finite");
    }
    return v;
}

Vec3 read_vec3(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() != 3) {
        throw ConfigError(path, "expected a list of three numbers");
    }
    return {read_double(node[0], path + "[0]"), read_double(node[1], path + "[1]"),
            read_double(node[2], path + "[2]")};
}

std::string read_expression(const YAML::Node& node, const std::string& path) {
    const std::string text = read<std::string>(node, path);
    try {
        Expression::parse(text);
    } catch (const ExpressionError& e) {
        throw ConfigError(path, e.what());
    }
    return text;
}

std::optional<double> read_tau2(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar() && node.Scalar() == "inv-tau1") {
        return std::nullopt;
    }
    const double v = read_double(node, path);
    if (!(v > 0.0)) {
        throw ConfigError(path, "must be positive or \"inv-tau1\"");
    }
    return v;
}

double read_gamma(const YAML::Node& node, const std::string& path) {
    const double g = read_double(node, path);
    if (!(g >= 0.0 && g < 2.0)) {
        throw ConfigError(path, "must lie in [0, 2)");
    }
    return g;
}

SurfaceSpec parse_surface(const YAML::Node& node) {
    check_keys(node, "surface", {"kind", "center", "radius", "r_max", "r_min", "point", "normal"});
    if (!node["kind"]) {
        throw ConfigError("surface.kind", "missing");
    }
    SurfaceSpec s;
    const std::string kind = read<std::string>(node["kind"], "surface.kind");
    auto require = [&](const char* key) {
        if (!node[key]) {
            throw ConfigError(std::string("surface.") + key, "missing for kind " + kind);
        }
        return node[key];
    };
    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* key : keys) {
            if (node[key]) {
                throw ConfigError(std::string("surface.") + key, "not used by kind " + kind);
            }
        }
    };
    if (kind == "sphere") {
        s.kind = SurfaceKind::Sphere;
        forbid({"r_max", "r_min", "point", "normal"});
        s.center = read_vec3(require("center"), "surface.center");
        s.radius = read_double(require("radius"), "surface.radius");
        if (!(s.radius > 0.0)) {
            throw ConfigError("surface.radius", "must be positive");
        }
    } else if (kind == "spheroid") {
        s.kind = SurfaceKind::Spheroid;
        forbid({"radius", "point", "normal"});
        s.center = read_vec3(require("center"), "surface.center");
        s.r_max = read_double(require("r_max"), "surface.r_max");
        s.r_min = read_double(require("r_min"), "surface.r_min");
        if (!(s.r_min > 0.0)) {
            throw ConfigError("surface.r_min", "must be positive");
        }
        if (!(s.r_max >= s.r_min)) {
            throw ConfigError("surface.r_max", "must be at least r_min");
        }
    } else if (kind == "plane") {
        s.kind = SurfaceKind::Plane;
        forbid({"center", "radius", "r_max", "r_min"});
        s.center = read_vec3(require("point"), "surface.point");
        s.normal = read_vec3(require("normal"), "surface.normal");
        if (!(s.normal.norm() > 0.0)) {
            throw ConfigError("surface.normal", "must be non-zero");
        }
    } else {
        throw ConfigError("surface.kind", "expected sphere, spheroid or plane, got '" + kind + "'");
    }
    return s;
}

void parse_mesh(const YAML::Node& node, RunConfig& c) {
    check_keys(node, "mesh", {"box", "n", "levels"});
    if (const YAML::Node box = node["box"]) {
        check_keys(box, "mesh.box", {"lo", "hi"});
        if (!box["lo"] || !box["hi"]) {
            throw ConfigError("mesh.box", "needs both lo and hi");
        }
        c.box.lo = read_vec3(box["lo"], "mesh.box.lo");
        c.box.hi = read_vec3(box["hi"], "mesh.box.hi");
        if (!(c.box.lo.array() < c.box.hi.array()).all()) {
            throw ConfigError("mesh.box", "lo must be below hi in every coordinate");
        }
    }
    if (const YAML::Node n = node["n"]) {
        c.n = read<int>(n, "mesh.n");
        if (*c.n < 1) {
            throw ConfigError("mesh.n", "must be at least 1");
        }
    }
    if (const YAML::Node levels = node["levels"]) {
        if (!levels.IsSequence()) {
            throw ConfigError("mesh.levels", "expected a list of cell counts");
        }
        for (std::size_t k = 0; k < levels.size(); ++k) {
            c.levels.push_back(read<int>(levels[k], fmt::format("mesh.levels[{}]", k)));
        }
        validate_levels(c.levels, 1, "mesh.levels");
    }
}

ProblemSpec parse_problem(const YAML::Node& node, double& fd_step) {
    check_keys(node, "problem", {"name", "u", "f", "alpha", "beta", "fd_step"});
    ProblemSpec p;
    if (const YAML::Node name = node["name"]) {
        const std::string s = read<std::string>(name, "problem.name");
        if (s == "spheroid-smooth") {
            p.name = ProblemName::SpheroidSmooth;
        } else if (s == "spheroid-layer") {
            p.name = ProblemName::SpheroidLayer;
        } else if (s == "custom") {
            p.name = ProblemName::Custom;
        } else {
            throw ConfigError("problem.name",
                              "expected spheroid-smooth, spheroid-layer or custom, got '" + s + "'");
        }
    }
    for (const char* key : {"u", "f", "alpha"}) {
        if (const YAML::Node e = node[key]) {
            const std::string text = read_expression(e, std::string("problem.") + key);
            (key[0] == 'u' ? p.u : key[0] == 'f' ? p.f : p.alpha) = text;
        }
    }
    if (const YAML::Node beta = node["beta"]) {
        if (!beta.IsSequence() || beta.size() != 3) {
            throw ConfigError("problem.beta", "expected a list of three expressions");
        }
        std::array<std::string, 3> b;
        for (std::size_t k = 0; k < 3; ++k) {
            b[k] = read_expression(beta[k], fmt::format("problem.beta[{}]", k));
        }
        p.beta = b;
    }
    if (const YAML::Node h = node["fd_step"]) {
        fd_step = read_double(h, "problem.fd_step");
        if (fd_step < 0.0) {
            throw ConfigError("problem.fd_step", "must be non-negative");
        }
    }
    if (p.name == ProblemName::Custom) {
        if (!p.u && !p.f) {
            throw ConfigError("problem", "a custom problem needs u or f");
        }
        if (!p.beta) {
            throw ConfigError("problem.beta", "missing for a custom problem");
        }
    }
    return p;
}

MethodSpec parse_method(const YAML::Node& node) {
    check_keys(node, "method", {"epsilon", "c_tau", "tau2", "gamma", "constraint"});
    MethodSpec m;
    if (node["epsilon"]) {
        m.epsilon = read_double(node["epsilon"], "method.epsilon");
        if (m.epsilon < 0.0) {
            throw ConfigError("method.epsilon", "must be non-negative");
        }
    }
    if (node["c_tau"]) {
        m.c_tau = read_double(node["c_tau"], "method.c_tau");
        if (m.c_tau < 0.0) {
            throw ConfigError("method.c_tau", "must be non-negative");
        }
    }
    if (node["tau2"]) {
        m.tau2 = read_tau2(node["tau2"], "method.tau2");
    }
    if (node["gamma"]) {
        m.gamma = read_gamma(node["gamma"], "method.gamma");
    }
    if (node["constraint"]) {
        const std::string s = read<std::string>(node["constraint"], "method.constraint");
        if (s == "auto") {
            m.constraint = ConstraintMode::Auto;
        } else if (s == "on") {
            m.constraint = ConstraintMode::On;
        } else if (s == "off") {
            m.constraint = ConstraintMode::Off;
        } else {
            throw ConfigError("method.constraint", "expected auto, on or off, got '" + s + "'");
        }
    }
    return m;
}

SolverSpec parse_solver(const YAML::Node& node) {
    check_keys(node, "solver", {"tol", "max_iter"});
    SolverSpec s;
    if (node["tol"]) {
        s.tol = read_double(node["tol"], "solver.tol");
        if (!(s.tol > 0.0 && s.tol < 1.0)) {
            throw ConfigError("solver.tol", "must lie in (0, 1)");
        }
    }
    if (node["max_iter"]) {
        s.max_iter = read<int>(node["max_iter"], "solver.max_iter");
        if (s.max_iter < 1) {
            throw ConfigError("solver.max_iter", "must be at least 1");
        }
    }
    return s;
}

ConditionSpec parse_condition(const YAML::Node& node) {
    check_keys(node, "condition", {"gammas", "offsets", "seed", "tol"});
    ConditionSpec c;
    if (const YAML::Node g = node["gammas"]) {
        if (!g.IsSequence() || g.size() == 0) {
            throw ConfigError("condition.gammas", "expected a non-empty list");
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            c.gammas.push_back(read_gamma(g[k], fmt::format("condition.gammas[{}]", k)));
        }
    }
    if (node["offsets"]) {
        c.offsets = read<int>(node["offsets"], "condition.offsets");
        if (c.offsets < 0) {
            throw ConfigError("condition.offsets", "must be non-negative");
        }
    }
    if (node["seed"]) {
        c.seed = read<std::uint64_t>(node["seed"], "condition.seed");
    }
    if (node["tol"]) {
        c.tol = read_double(node["tol"], "condition.tol");
        if (!(c.tol > 0.0 && c.tol < 1.0)) {
            throw ConfigError("condition.tol", "must lie in (0, 1)");
        }
    }
    return c;
}

LayerSpec parse_layer(const YAML::Node& node) {
    check_keys(node, "layer", {"range", "runs", "reference"});
    LayerSpec l;
    if (const YAML::Node r = node["range"]) {
        if (!r.IsSequence() || r.size() != 2) {
            throw ConfigError("layer.range", "expected [lo, hi]");
        }
        l.lo = read_double(r[0], "layer.range[0]");
        l.hi = read_double(r[1], "layer.range[1]");
        if (!(l.lo < l.hi)) {
            throw ConfigError("layer.range", "lo must be below hi");
        }
    }
    const YAML::Node runs = node["runs"];
    if (!runs || !runs.IsSequence() || runs.size() == 0) {
        throw ConfigError("layer.runs", "expected a non-empty list");
    }
    std::set<std::string> names;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const std::string path = fmt::format("layer.runs[{}]", k);
        check_keys(runs[k], path, {"name", "c_tau", "tau2", "gamma"});
        LayerRun run;
        run.name = runs[k]["name"] ? read<std::string>(runs[k]["name"], path + ".name") : fmt::format("run{}", k);
        if (run.name.empty() || run.name.find_first_of("/\\ ,") != std::string::npos) {
            throw ConfigError(path + ".name", "must be non-empty without spaces, commas or slashes");
        }
        if (!names.insert(run.name).second) {
            throw ConfigError(path + ".name", "duplicate run name '" + run.name + "'");
        }
        if (runs[k]["c_tau"]) {
            run.c_tau = read_double(runs[k]["c_tau"], path + ".c_tau");
            if (run.c_tau < 0.0) {
                throw ConfigError(path + ".c_tau", "must be non-negative");
            }
        }
        if (runs[k]["tau2"]) {
            run.tau2 = read_tau2(runs[k]["tau2"], path + ".tau2");
        }
        if (!run.tau2 && run.c_tau == 0.0) {
            throw ConfigError(path + ".tau2", "inv-tau1 needs c_tau > 0");
        }
        if (runs[k]["gamma"]) {
            run.gamma = read_gamma(runs[k]["gamma"], path + ".gamma");
        }
        l.runs.push_back(run);
    }
    l.reference = node["reference"] ? read<std::string>(node["reference"], "layer.reference") : l.runs.front().name;
    if (!names.count(l.reference)) {
        throw ConfigError("layer.reference", "no run named '" + l.reference + "'");
    }
    return l;
}

OutputSpec parse_output(const YAML::Node& node) {
    check_keys(node, "output", {"dir", "vtk"});
    OutputSpec o;
    if (node["dir"]) {
        o.dir = read<std::string>(node["dir"], "output.dir");
    }
    if (node["vtk"]) {
        o.vtk = read<bool>(node["vtk"], "output.vtk");
    }
    return o;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string vec(const Vec3& v) { return fmt::format("[{}, {}, {}]", num(v.x()), num(v.y()), num(v.z())); }

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + "\"";
}

std::string tau2_text(const std::optional<double>& t) { return t ? num(*t) : "inv-tau1"; }

}  // namespace

ImplicitSurface SurfaceSpec::build() const {
    switch (kind) {
        case SurfaceKind::Sphere: return ImplicitSurface::sphere(center, radius);
        case SurfaceKind::Spheroid: return ImplicitSurface::spheroid(center, r_max, r_min);
        case SurfaceKind::Plane: return ImplicitSurface::plane(center, normal);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown surface kind");
}

std::string_view to_string(ProblemName name) noexcept {
    switch (name) {
        case ProblemName::SpheroidSmooth: return "spheroid-smooth";
        case ProblemName::SpheroidLayer: return "spheroid-layer";
        case ProblemName::Custom: return "custom";
    }
    return "custom";
}

void validate_levels(const std::vector<int>& levels, std::size_t min_count, const std::string& key) {
    if (levels.size() < min_count) {
        throw InvalidLevels(key, fmt::format("InvalidLevels: need at least {} levels, got {}", min_count,
                                             levels.size()));
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] < 1) {
            throw InvalidLevels(key, fmt::format("InvalidLevels: level {} has n = {}", k, levels[k]));
        }
        if (k > 0 && levels[k] == levels[k - 1]) {
            throw InvalidLevels(key, fmt::format("InvalidLevels: n = {} requested twice", levels[k]));
        }
        if (k > 0 && levels[k] < levels[k - 1]) {
            throw InvalidLevels(key, "InvalidLevels: levels must be increasing");
        }
    }
}

RunConfig parse_config(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("YAML syntax error: ") + e.what());
    }
    if (!root.IsMap()) {
        throw ConfigError("", "top level must be a mapping");
    }
    check_keys(root, "",
               {"surface", "mesh", "problem", "method", "solver", "condition", "layer", "output", "run"});
    RunConfig c;
    if (root["surface"]) {
        c.surface = parse_surface(root["surface"]);
        try {
            c.surface->build();
        } catch (const Error& e) {
            throw ConfigError("surface", e.what());
        }
    }
    if (root["mesh"]) {
        parse_mesh(root["mesh"], c);
    }
    if (!root["problem"]) {
        throw ConfigError("problem", "missing");
    }
    c.problem = parse_problem(root["problem"], c.fd_step);
    if (!c.surface && c.problem.name == ProblemName::Custom) {
        throw ConfigError("surface", "missing for a custom problem");
    }
    if (root["method"]) {
        c.method = parse_method(root["method"]);
    }
    if (!c.method.tau2 && c.method.c_tau == 0.0) {
        throw ConfigError("method.tau2", "inv-tau1 needs c_tau > 0");
    }
    if (root["solver"]) {
        c.solver = parse_solver(root["solver"]);
    }
    if (root["condition"]) {
        c.condition = parse_condition(root["condition"]);
    }
    if (root["layer"]) {
        c.layer = parse_layer(root["layer"]);
    }
    if (root["output"]) {
        c.output = parse_output(root["output"]);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string to_yaml(const RunConfig& c) {
    std::string out;
    auto line = [&out](const std::string& s) { out += s + "\n"; };
    if (c.surface) {
        const SurfaceSpec& s = *c.surface;
        line("surface:");
        switch (s.kind) {
            case SurfaceKind::Sphere:
                line("  kind: sphere");
                line("  center: " + vec(s.center));
                line("  radius: " + num(s.radius));
                break;
            case SurfaceKind::Spheroid:
                line("  kind: spheroid");
                line("  center: " + vec(s.center));
                line("  r_max: " + num(s.r_max));
                line("  r_min: " + num(s.r_min));
                break;
            case SurfaceKind::Plane:
                line("  kind: plane");
                line("  point: " + vec(s.center));
                line("  normal: " + vec(s.normal));
                break;
        }
    }
    line("mesh:");
    line("  box:");
    line("    lo: " + vec(c.box.lo));
    line("    hi: " + vec(c.box.hi));
    if (c.n) {
        line(fmt::format("  n: {}", *c.n));
    }
    if (!c.levels.empty()) {
        line(fmt::format("  levels: [{}]", fmt::join(c.levels, ", ")));
    }
    line("problem:");
    line(fmt::format("  name: {}", to_string(c.problem.name)));
    if (c.problem.u) {
        line("  u: " + quoted(*c.problem.u));
    }
    if (c.problem.f) {
        line("  f: " + quoted(*c.problem.f));
    }
    if (c.problem.alpha) {
        line("  alpha: " + quoted(*c.problem.alpha));
    }
    if (c.problem.beta) {
        const auto& b = *c.problem.beta;
        line(fmt::format("  beta: [{}, {}, {}]", quoted(b[0]), quoted(b[1]), quoted(b[2])));
    }
    line("  fd_step: " + num(c.fd_step));
    line("method:");
    line("  epsilon: " + num(c.method.epsilon));
    line("  c_tau: " + num(c.method.c_tau));
    line("  tau2: " + tau2_text(c.method.tau2));
    line("  gamma: " + num(c.method.gamma));
    line(std::string("  constraint: ") +
         (c.method.constraint == ConstraintMode::On ? "on" : c.method.constraint == ConstraintMode::Off ? "off" : "auto"));
    line("solver:");
    line("  tol: " + num(c.solver.tol));
    line(fmt::format("  max_iter: {}", c.solver.max_iter));
    if (c.condition) {
        line("condition:");
        std::vector<std::string> g;
        for (double v : c.condition->gammas) {
            g.push_back(num(v));
        }
        line(fmt::format("  gammas: [{}]", fmt::join(g, ", ")));
        line(fmt::format("  offsets: {}", c.condition->offsets));
        line(fmt::format("  seed: {}", c.condition->seed));
        line("  tol: " + num(c.condition->tol));
    }
    if (c.layer) {
        line("layer:");
        line(fmt::format("  range: [{}, {}]", num(c.layer->lo), num(c.layer->hi)));
        line("  reference: " + c.layer->reference);
        line("  runs:");
        for (const LayerRun& r : c.layer->runs) {
            line("    - name: " + r.name);
            line("      c_tau: " + num(r.c_tau));
            line("      tau2: " + tau2_text(r.tau2));
            line("      gamma: " + num(r.gamma));
        }
    }
    line("output:");
    line("  dir: " + quoted(c.output.dir));
    line(std::string("  vtk: ") + (c.output.vtk ? "true" : "false"));
    return out;
}

}  // namespace surfsd::cli

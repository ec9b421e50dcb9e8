#pragma once

#include "surfsd/fem.hpp"
#include "surfsd/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace surfsd::cli {

/// Invalid configuration; key() is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Duplicate, unsorted or too few refinement levels.
class InvalidLevels : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct SurfaceSpec {
    SurfaceKind kind = SurfaceKind::Spheroid;
    Vec3 center = Vec3::Constant(0.5);
    double radius = 0.0;
    double r_max = 0.0;
    double r_min = 0.0;
    Vec3 normal = Vec3::UnitZ();

    ImplicitSurface build() const;
};

enum class ProblemName { SpheroidSmooth, SpheroidLayer, Custom };

std::string_view to_string(ProblemName name) noexcept;

/// Named problems fill in everything; any expression given here overrides
/// the corresponding named default.
struct ProblemSpec {
    ProblemName name = ProblemName::Custom;
    std::optional<std::string> u;
    std::optional<std::string> f;
    std::optional<std::string> alpha;
    std::optional<std::array<std::string, 3>> beta;
};

struct MethodSpec {
    double epsilon = 0.0;
    double c_tau = 0.5;
    /// nullopt means tau2 = 1/tau1.
    std::optional<double> tau2;
    double gamma = 1.0;
    ConstraintMode constraint = ConstraintMode::Auto;
};

struct SolverSpec {
    double tol = 1e-10;
    int max_iter = 20000;
};

struct ConditionSpec {
    std::vector<double> gammas;
    int offsets = 0;
    std::uint64_t seed = 2024;
    double tol = 1e-3;
};

struct LayerRun {
    std::string name;
    double c_tau = 0.5;
    std::optional<double> tau2;
    double gamma = 0.0;
};

struct LayerSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<LayerRun> runs;
    /// Run that peak reductions are measured against.
    std::string reference;
};

struct OutputSpec {
    std::string dir = "out";
    bool vtk = true;
};

struct RunConfig {
    std::optional<SurfaceSpec> surface;
    Aabb box{Vec3::Zero(), Vec3::Ones()};
    std::optional<int> n;
    std::vector<int> levels;
    ProblemSpec problem;
    MethodSpec method;
    SolverSpec solver;
    std::optional<ConditionSpec> condition;
    std::optional<LayerSpec> layer;
    OutputSpec output;
    /// Step for finite-difference derivatives of u o p; 0 selects the default.
    double fd_step = 0.0;
};

/// Parses and validates a YAML document. Throws ConfigError.
RunConfig parse_config(std::string_view yaml_text);
RunConfig load_config(const std::filesystem::path& path);

/// Re-readable YAML with every resolved value; doubles keep all 17 digits.
std::string to_yaml(const RunConfig& config);

/// Levels sorted strictly increasing; at least `min_count` of them.
void validate_levels(const std::vector<int>& levels, std::size_t min_count, const std::string& key);

}  // namespace surfsd::cli

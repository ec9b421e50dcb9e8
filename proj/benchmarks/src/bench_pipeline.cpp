#include "surfsd/fem.hpp"
#include "surfsd/solve.hpp"

#include <benchmark/benchmark.h>

using namespace surfsd;

namespace {

const ImplicitSurface kSpheroid = ImplicitSurface::spheroid(Vec3::Constant(0.5), 0.5, 0.25);
const VectorField kRotation{[](const Vec3& x) { return Vec3(0.5 - x.y(), x.x() - 0.5, 0.0); }, true};

void BM_Discretization(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_discretization(kSpheroid, {Vec3::Zero(), Vec3::Ones()}, n));
    }
}
BENCHMARK(BM_Discretization)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

struct Prepared {
    Discretization disc;
    CoefficientField coeffs;
    StabilizationParams params;
    Vector f;
};

Prepared prepare(int n) {
    Discretization d = build_discretization(kSpheroid, {Vec3::Zero(), Vec3::Ones()}, n);
    CoefficientField c = build_coefficients(ScalarField::constant_value(1.0), kRotation, kSpheroid, d);
    const auto p = StabilizationParams::make(1e-3, 0.5, sample_beta_inf(d, kRotation), d.h(), std::nullopt, 1.0);
    const Vector f = Vector::Ones(static_cast<Eigen::Index>(d.quad.points.size()));
    return {std::move(d), std::move(c), p, f};
}

void BM_Assembly(benchmark::State& state) {
    const Prepared p = prepare(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_system(p.disc, p.coeffs, p.f, p.params));
    }
    state.counters["dofs"] = p.disc.num_dofs();
}
BENCHMARK(BM_Assembly)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
    const Prepared p = prepare(static_cast<int>(state.range(0)));
    const LinearSystem sys = assemble_system(p.disc, p.coeffs, p.f, p.params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(sys, 1e-10, 20000));
    }
    state.counters["dofs"] = p.disc.num_dofs();
}
BENCHMARK(BM_Solve)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

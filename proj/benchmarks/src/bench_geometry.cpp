#include "surfsd/cut.hpp"
#include "surfsd/geometry.hpp"
#include "surfsd/mesh.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

using namespace surfsd;

namespace {

std::vector<Vec3> band_points(const ImplicitSurface& s, int count) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vec3> out;
    while (static_cast<int>(out.size()) < count) {
        const Vec3 x = s.center() + 0.6 * Vec3(unit(rng), unit(rng), unit(rng));
        if (std::abs(s.level_set_value(x)) < 0.5 * s.band_half_width()) {
            out.push_back(x);
        }
    }
    return out;
}

void BM_ClosestPointSpheroid(benchmark::State& state) {
    const auto s = ImplicitSurface::spheroid(Vec3::Constant(0.5), 0.5, 0.25);
    const auto pts = band_points(s, 1024);
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.closest_point(pts[k++ % pts.size()]));
    }
}
BENCHMARK(BM_ClosestPointSpheroid);

void BM_CutSurface(benchmark::State& state) {
    const auto s = ImplicitSurface::spheroid(Vec3::Constant(0.5), 0.5, 0.25);
    const BackgroundMesh mesh = build_background_mesh({Vec3::Zero(), Vec3::Ones()}, static_cast<int>(state.range(0)));
    const std::vector<double> values = sample_level_set(mesh, s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_cut_surface(mesh, values));
    }
}
BENCHMARK(BM_CutSurface)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

#pragma once

#include "surfsd/analysis.hpp"
#include "surfsd/fem.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace surfsd::testing {

inline Aabb unit_box() { return {Vec3::Zero(), Vec3::Ones()}; }

inline ImplicitSurface smooth_spheroid() { return ImplicitSurface::spheroid(Vec3::Constant(0.5), 0.5, 0.25); }

/// Rotation about the vertical axis through `c`; tangential on every
/// surface of revolution about that axis.
inline VectorField rotation(const Vec3& c, double speed = 1.0) {
    return {[c, speed](const Vec3& x) { return Vec3(speed * (c.y() - x.y()), speed * (x.x() - c.x()), 0.0); }, true};
}

inline Vector random_vector(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = dist(rng);
    }
    return v;
}

/// Point on the spheroid at polar angle theta and azimuth phi.
inline Vec3 spheroid_point(const Vec3& c, double a, double b, double theta, double phi) {
    return c + Vec3(a * std::sin(theta) * std::cos(phi), a * std::sin(theta) * std::sin(phi), b * std::cos(theta));
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace surfsd::testing

#include "support.hpp"

#include "surfsd/error.hpp"
#include "surfsd/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace surfsd;
using namespace surfsd::testing;

namespace {

const Vec3 kCenter = Vec3::Constant(0.5);

// Brute-force nearest point on the spheroid: dense (theta, phi) sampling
// followed by successive zooms of a local grid around the best sample.
Vec3 brute_force_foot(const Vec3& c, double a, double b, const Vec3& x) {
    const double pi = std::numbers::pi;
    double best_t = 0.0, best_p = 0.0, best = 1e300;
    const int m = 1000;
    for (int i = 0; i <= m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double t = pi * i / m;
            const double p = 2.0 * pi * j / m;
            const double d = (spheroid_point(c, a, b, t, p) - x).squaredNorm();
            if (d < best) {
                best = d;
                best_t = t;
                best_p = p;
            }
        }
    }
    double span = 2.0 * pi / m;
    for (int round = 0; round < 40; ++round) {
        const double t0 = best_t;
        const double p0 = best_p;
        for (int i = -10; i <= 10; ++i) {
            for (int j = -10; j <= 10; ++j) {
                const double t = t0 + span * i / 10.0;
                const double p = p0 + span * j / 10.0;
                const double d = (spheroid_point(c, a, b, t, p) - x).squaredNorm();
                if (d < best) {
                    best = d;
                    best_t = t;
                    best_p = p;
                }
            }
        }
        span *= 0.5;
    }
    return spheroid_point(c, a, b, best_t, best_p);
}

// Surface calculus on the spheroid in closed form, from the quadratic level
// set phi = (x-c)^T D (x-c) - 1:
//   n = D(x-c)/|D(x-c)|, H = (tr D - n^T D n) / |D(x-c)|,
//   grad_G u = P grad u, lap_G u = lap u - n^T Hess(u) n - H n . grad u.
struct SurfaceCalculus {
    Vec3 grad;
    double lap;
};

SurfaceCalculus spheroid_calculus(const Vec3& c, double a, double b, const Vec3& q, const Vec3& grad_u,
                                  const Mat3& hess_u) {
    const Mat3 D = Vec3(1.0 / (a * a), 1.0 / (a * a), 1.0 / (b * b)).asDiagonal();
    const Vec3 g = D * (q - c);
    const Vec3 n = g.normalized();
    const double H = (D.trace() - n.dot(D * n)) / g.norm();
    const Mat3 P = Mat3::Identity() - n * n.transpose();
    return {P * grad_u, hess_u.trace() - n.dot(hess_u * n) - H * n.dot(grad_u)};
}

double smooth_u(const Vec3& x) { return 100.0 * (x - kCenter).prod(); }

Vec3 smooth_grad(const Vec3& x) {
    const Vec3 d = x - kCenter;
    return 100.0 * Vec3(d.y() * d.z(), d.x() * d.z(), d.x() * d.y());
}

Mat3 smooth_hess(const Vec3& x) {
    const Vec3 d = x - kCenter;
    Mat3 h;
    h << 0.0, d.z(), d.y(), d.z(), 0.0, d.x(), d.y(), d.x(), 0.0;
    return 100.0 * h;
}

double smooth_rhs_oracle(const Vec3& q, double eps) {
    const SurfaceCalculus s = spheroid_calculus(kCenter, 0.5, 0.25, q, smooth_grad(q), smooth_hess(q));
    const Vec3 beta(0.5 - q.y(), q.x() - 0.5, 0.0);
    return beta.dot(s.grad) - eps * s.lap;
}

}  // namespace

TEST(LevelSet, SphereValueIsSignedDistance) {
    const auto s = ImplicitSurface::sphere(kCenter, 0.5);
    EXPECT_NEAR(s.level_set_value({1.0, 0.5, 0.5}), 0.0, 1e-15);
    EXPECT_NEAR(s.level_set_value(kCenter), -0.5, 1e-15);
}

TEST(LevelSet, SpheroidExteriorAxisPointIsPositive) {
    EXPECT_GT(smooth_spheroid().level_set_value({0.5, 0.5, 0.85}), 0.0);
}

TEST(LevelSet, GradientNonzeroInBand) {
    const auto s = smooth_spheroid();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const Vec3 q = spheroid_point(kCenter, 0.5, 0.25, angle(rng), 2.0 * angle(rng));
        const ClosestPointResult cp = s.closest_point(q);
        const Vec3 x = cp.foot + off(rng) * s.band_half_width() * cp.normal;
        EXPECT_GT(s.level_set_gradient(x).norm(), 0.0);
    }
}

TEST(ClosestPoint, SphereRadialProjection) {
    const auto s = ImplicitSurface::sphere(kCenter, 0.5);
    const ClosestPointResult cp = s.closest_point({1.5, 0.5, 0.5}, BandCheck::Skip);
    EXPECT_NEAR((cp.foot - Vec3(1.0, 0.5, 0.5)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(cp.signed_distance, 0.5, 1e-15);
}

TEST(ClosestPoint, SpheroidAxisPointMapsToPole) {
    // 0.10 lies outside the working band of this spheroid (its reach is
    // r_min^2 / r_max = 0.125), so the band check is skipped here.
    const auto s = smooth_spheroid();
    const ClosestPointResult cp = s.closest_point({0.5, 0.5, 0.85}, BandCheck::Skip);
    EXPECT_NEAR((cp.foot - Vec3(0.5, 0.5, 0.75)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(cp.signed_distance, 0.10, 1e-12);
}

TEST(ClosestPoint, OutsideBandIsRejected) {
    const auto s = smooth_spheroid();
    EXPECT_DOUBLE_EQ(s.band_half_width(), 0.0625);
    try {
        s.closest_point({0.5, 0.5, 0.85});
        FAIL() << "expected OutsideBand";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutsideBand);
    }
    EXPECT_NO_THROW(s.closest_point({0.5, 0.5, 0.80}));
}

TEST(ClosestPoint, SpheroidMatchesBruteForce) {
    const auto s = smooth_spheroid();
    const Vec3 x(0.9, 0.5, 0.6);
    const ClosestPointResult cp = s.closest_point(x);
    const Vec3 oracle = brute_force_foot(kCenter, 0.5, 0.25, x);
    EXPECT_LT((cp.foot - oracle).norm(), 1e-6);
    EXPECT_NEAR(std::abs(cp.signed_distance), (x - oracle).norm(), 1e-6);
}

TEST(ClosestPoint, SpheroidMatchesBruteForceOffAxisPlane) {
    const auto s = ImplicitSurface::spheroid(Vec3(0.1, -0.2, 0.3), 0.5, 0.45);
    const Vec3 x = Vec3(0.1, -0.2, 0.3) + Vec3(0.21, -0.33, 0.17);
    const ClosestPointResult cp = s.closest_point(x);
    const Vec3 oracle = brute_force_foot(Vec3(0.1, -0.2, 0.3), 0.5, 0.45, x);
    EXPECT_LT((cp.foot - oracle).norm(), 1e-6);
}

TEST(ClosestPoint, EllipseAxisCases) {
    const EllipseFoot on_major = ellipse_closest_point(2.0, 1.0, 3.0, 0.0);
    EXPECT_NEAR(on_major.x0, 2.0, 1e-14);
    EXPECT_NEAR(on_major.x1, 0.0, 1e-14);
    const EllipseFoot on_minor = ellipse_closest_point(2.0, 1.0, 0.0, 0.4);
    EXPECT_NEAR(on_minor.x0, 0.0, 1e-14);
    EXPECT_NEAR(on_minor.x1, 1.0, 1e-14);
    // inside near the major-axis end, past the curvature center: foot leaves the axis
    const EllipseFoot inner = ellipse_closest_point(2.0, 1.0, 1.0, 0.0);
    EXPECT_NEAR(inner.x0 * inner.x0 / 4.0 + inner.x1 * inner.x1, 1.0, 1e-12);
    EXPECT_GT(inner.x1, 0.0);
}

TEST(ClosestPoint, EllipseNearlyOnMajorAxis) {
    // continuity with the y1 = 0 branch for minute minor coordinates
    for (double y1 : {1e-16, 1e-13, 1e-10, 1e-7}) {
        for (double y0 : {0.5 - 1e-13, 0.5, 0.52, 0.7}) {
            const EllipseFoot f = ellipse_closest_point(0.5, 0.25, y0, y1);
            const EllipseFoot axis = ellipse_closest_point(0.5, 0.25, y0, 0.0);
            EXPECT_NEAR(f.x0, axis.x0, 1e-9) << y0 << " " << y1;
            EXPECT_NEAR(f.x1, axis.x1, 1e-6) << y0 << " " << y1;
        }
    }
    const auto s = smooth_spheroid();
    const ClosestPointResult r = s.closest_point(Vec3(1.0, 0.5, 0.5 + 1e-13));
    EXPECT_NEAR(r.signed_distance, 0.0, 1e-12);
    EXPECT_NEAR((r.foot - Vec3(1.0, 0.5, 0.5)).norm(), 0.0, 1e-10);
}

TEST(ClosestPoint, PlaneIsExact) {
    const auto s = ImplicitSurface::plane({0.0, 0.0, 0.5}, {0.0, 0.0, 2.0});
    const ClosestPointResult cp = s.closest_point({0.3, 0.7, 0.9});
    EXPECT_NEAR((cp.foot - Vec3(0.3, 0.7, 0.5)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(cp.signed_distance, 0.4, 1e-15);
}

class ClosestPointProperties : public ::testing::TestWithParam<int> {};

TEST_P(ClosestPointProperties, FootIdempotenceSignAndUnitNormal) {
    const ImplicitSurface s = GetParam() == 0   ? ImplicitSurface::sphere(kCenter, 0.5)
                              : GetParam() == 1 ? smooth_spheroid()
                                                : ImplicitSurface::spheroid(kCenter, 0.5, 0.45);
    const double diam = s.diameter();
    std::mt19937_64 rng(11 + GetParam());
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        const Vec3 q = spheroid_point(kCenter, s.r_max(), s.r_min(), angle(rng), 2.0 * angle(rng));
        const Vec3 n0 = s.closest_point(q).normal;
        const Vec3 x = q + 0.99 * off(rng) * s.band_half_width() * n0;
        const ClosestPointResult cp = s.closest_point(x);
        EXPECT_NEAR(cp.normal.norm(), 1.0, 1e-12);
        EXPECT_LT((cp.foot - (x - cp.signed_distance * cp.normal)).norm(), 1e-12 * diam);
        const double phi = s.level_set_value(x);
        if (std::abs(phi) > 1e-12) {
            EXPECT_EQ(std::signbit(cp.signed_distance), std::signbit(phi));
        }
        const ClosestPointResult again = s.closest_point(cp.foot);
        EXPECT_LT((again.foot - cp.foot).norm(), 1e-10 * diam);
        EXPECT_LT(std::abs(again.signed_distance), 1e-10 * diam);
    }
}

INSTANTIATE_TEST_SUITE_P(Surfaces, ClosestPointProperties, ::testing::Values(0, 1, 2));

TEST(NormalExtension, ConstantField) {
    const auto s = smooth_spheroid();
    const ScalarField one = ScalarField::constant_value(1.0);
    EXPECT_EQ(normal_extension(s, one, {0.5, 0.5, 0.8}), 1.0);
}

TEST(NormalExtension, ConstantAlongNormalRay) {
    const auto s = ImplicitSurface::sphere(kCenter, 0.5);
    const ScalarField z{[](const Vec3& x) { return x.z(); }, std::nullopt};
    const Vec3 q = kCenter + 0.5 * Vec3(0.6, 0.0, 0.8);
    const Vec3 x = q + 0.1 * Vec3(0.6, 0.0, 0.8);
    EXPECT_NEAR(normal_extension(s, z, x), q.z(), 1e-15);
}

TEST(NormalExtension, SmoothSolutionVanishesAtPole) {
    const ScalarField u{smooth_u, std::nullopt};
    EXPECT_NEAR(normal_extension(smooth_spheroid(), u, {0.5, 0.5, 0.85}, BandCheck::Skip), 0.0, 1e-14);
}

TEST(NormalExtension, ConstancyOnRandomFeet) {
    const auto s = smooth_spheroid();
    const ScalarField u{smooth_u, std::nullopt};
    // max of |u| on the spheroid: 100 r_max^2 r_min / (3 sqrt 3)
    const double u_inf = 100.0 * 0.25 * 0.25 / (3.0 * std::sqrt(3.0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const Vec3 q = spheroid_point(kCenter, 0.5, 0.25, angle(rng), 2.0 * angle(rng));
        const ClosestPointResult cp = s.closest_point(q);
        const double t = off(rng) * s.band_half_width();
        EXPECT_LE(std::abs(normal_extension(s, u, cp.foot + t * cp.normal) - u(cp.foot)), 1e-10 * u_inf);
    }
}

TEST(ManufacturedRhs, ConstantSolutionWithUnitReaction) {
    const auto s = smooth_spheroid();
    const ScalarField one = ScalarField::constant_value(1.0);
    const Vec3 q = spheroid_point(kCenter, 0.5, 0.25, 0.7, 1.1);
    EXPECT_NEAR(manufactured_rhs(s, one, rotation(kCenter), one, 0.3, q), 1.0, 1e-12);
}

TEST(ManufacturedRhs, SphericalHarmonicDegreeOne) {
    const auto s = ImplicitSurface::sphere(Vec3::Zero(), 1.0);
    const ScalarField z{[](const Vec3& x) { return x.z(); }, std::nullopt};
    const ScalarField zero = ScalarField::constant_value(0.0);
    for (double theta : {0.3, 1.0, 2.2}) {
        const Vec3 q = spheroid_point(Vec3::Zero(), 1.0, 1.0, theta, 0.4);
        EXPECT_NEAR(manufactured_rhs(s, z, VectorField::zero(), zero, 1.0, q), 2.0 * q.z(), 1e-8);
    }
}

TEST(ManufacturedRhs, MatchesClosedFormOnSpheroid) {
    const auto s = smooth_spheroid();
    const ScalarField u{smooth_u, std::nullopt};
    const ScalarField zero = ScalarField::constant_value(0.0);
    for (double theta : {0.4, 1.2, 1.5707963, 2.5}) {
        for (double phi : {0.3, 2.0, 4.4}) {
            const Vec3 q = spheroid_point(kCenter, 0.5, 0.25, theta, phi);
            const double oracle = smooth_rhs_oracle(q, 1e-3);
            const double f = manufactured_rhs(s, u, rotation(kCenter), zero, 1e-3, q);
            EXPECT_NEAR(f, oracle, 1e-6 * std::max(1.0, std::abs(oracle))) << theta << " " << phi;
        }
    }
}

TEST(ManufacturedRhs, FourthOrderInStep) {
    const auto s = smooth_spheroid();
    const ScalarField u{smooth_u, std::nullopt};
    const ScalarField zero = ScalarField::constant_value(0.0);
    const Vec3 q = spheroid_point(kCenter, 0.5, 0.25, 1.0, 0.8);
    // eps = 1 puts the weight on the Laplacian, the most step-sensitive part
    const double oracle = smooth_rhs_oracle(q, 1.0);
    const double coarse = std::abs(manufactured_rhs(s, u, rotation(kCenter), zero, 1.0, q, 0.05) - oracle);
    const double fine = std::abs(manufactured_rhs(s, u, rotation(kCenter), zero, 1.0, q, 0.025) - oracle);
    EXPECT_GE(coarse / fine, 8.0) << coarse << " " << fine;
}

TEST(Surface, BoundingBoxAndTranslation) {
    const auto s = smooth_spheroid().translated({0.1, 0.0, -0.1});
    const Aabb b = *s.bounding_box();
    EXPECT_NEAR((b.lo - Vec3(0.1, 0.0, 0.15)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((b.hi - Vec3(1.1, 1.0, 0.65)).norm(), 0.0, 1e-15);
    EXPECT_FALSE(ImplicitSurface::plane(kCenter, Vec3::UnitZ()).bounding_box());
}

TEST(Surface, InvalidRadiiRejected) {
    EXPECT_THROW(ImplicitSurface::sphere(kCenter, 0.0), Error);
    EXPECT_THROW(ImplicitSurface::spheroid(kCenter, 0.5, -1.0), Error);
    EXPECT_THROW(ImplicitSurface::plane(kCenter, Vec3::Zero()), Error);
}

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace surfsd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Aabb {
    Vec3 lo;
    Vec3 hi;

    bool contains(const Aabb& other) const {
        return (lo.array() <= other.lo.array()).all() && (other.hi.array() <= hi.array()).all();
    }
};

enum class SurfaceKind { Sphere, Spheroid, Plane };

struct ClosestPointResult {
    Vec3 foot;
    double signed_distance = 0.0;
    Vec3 normal;
};

/// Whether closest_point rejects points farther than the working band half-width.
enum class BandCheck { Enforce, Skip };

/// Closed analytic surface given as the zero set of a level-set function.
///
/// Sphere and plane use the signed distance itself as level set. The
/// spheroid (symmetry axis parallel to z) uses the quadratic form
///   ((x-cx)^2 + (y-cy)^2) / r_max^2 + (z-cz)^2 / r_min^2 - 1,
/// and obtains the distance through closest_point. Negative inside.
class ImplicitSurface {
public:
    static ImplicitSurface sphere(const Vec3& center, double radius);
    /// r_max is the equatorial semi-axis, r_min the semi-axis along z.
    static ImplicitSurface spheroid(const Vec3& center, double r_max, double r_min);
    static ImplicitSurface plane(const Vec3& point, const Vec3& normal);

    SurfaceKind kind() const noexcept { return kind_; }
    /// Center for sphere/spheroid, anchor point for the plane.
    const Vec3& center() const noexcept { return center_; }
    double r_max() const noexcept { return r_max_; }
    double r_min() const noexcept { return r_min_; }
    const Vec3& plane_normal() const noexcept { return plane_normal_; }

    double level_set_value(const Vec3& x) const;
    Vec3 level_set_gradient(const Vec3& x) const;

    /// Nearest point on the surface. Throws Error(OutsideBand) when the
    /// check is enforced and |distance| exceeds band_half_width(), and
    /// Error(NoConvergence) if the spheroid projection fails.
    ClosestPointResult closest_point(const Vec3& x, BandCheck check = BandCheck::Enforce) const;

    /// Working band half-width: min(smallest semi-axis, reach) / 2.
    double band_half_width() const noexcept;
    /// Characteristic length (surface diameter; 1 for planes).
    double diameter() const noexcept;
    std::optional<Aabb> bounding_box() const;

    ImplicitSurface translated(const Vec3& offset) const;

private:
    ImplicitSurface(SurfaceKind kind, const Vec3& center, double r_max, double r_min, const Vec3& normal)
        : kind_(kind), center_(center), r_max_(r_max), r_min_(r_min), plane_normal_(normal) {}

    ClosestPointResult spheroid_closest_point(const Vec3& x) const;

    SurfaceKind kind_;
    Vec3 center_;
    double r_max_;
    double r_min_;
    Vec3 plane_normal_;
};

/// Nearest point on the ellipse (x0/e0)^2 + (x1/e1)^2 = 1 for a query in the
/// first quadrant. Requires e0 >= e1 > 0 and y0, y1 >= 0. Safeguarded Newton
/// on the projection parameter with bisection fallback.
struct EllipseFoot {
    double x0;
    double x1;
    int iterations;
};
EllipseFoot ellipse_closest_point(double e0, double e1, double y0, double y1);

/// Scalar function of a point in R^3. `constant` is set when the field is
/// known to be identically constant (used to detect alpha == 0).
struct ScalarField {
    std::function<double(const Vec3&)> fn;
    std::optional<double> constant;

    double operator()(const Vec3& x) const { return fn(x); }

    static ScalarField constant_value(double c) {
        return {[c](const Vec3&) { return c; }, c};
    }
};

struct VectorField {
    std::function<Vec3(const Vec3&)> fn;
    /// True when the field is tangential on the surface by construction.
    bool tangential = true;

    Vec3 operator()(const Vec3& x) const { return fn(x); }

    static VectorField zero() {
        return {[](const Vec3&) { return Vec3::Zero().eval(); }, true};
    }
};

/// u^e(x) = u(p(x)).
double normal_extension(const ImplicitSurface& surface, const ScalarField& u, const Vec3& x,
                        BandCheck check = BandCheck::Enforce);

struct ExtensionDerivatives {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();
    double laplacian = 0.0;
};

/// Value, ambient gradient and ambient Laplacian of u o p at x by fourth-order
/// central differences with step h_fd.
ExtensionDerivatives extension_derivatives(const ImplicitSurface& surface, const ScalarField& u,
                                           const Vec3& x, double h_fd);

/// Default finite-difference step: 1e-3 times the surface diameter.
double default_fd_step(const ImplicitSurface& surface) noexcept;

/// f(q) = beta . grad_G u + alpha u - eps lap_G u at a surface point q.
/// A non-positive h_fd selects default_fd_step().
double manufactured_rhs(const ImplicitSurface& surface, const ScalarField& u, const VectorField& beta,
                        const ScalarField& alpha, double epsilon, const Vec3& q, double h_fd = 0.0);

}  // namespace surfsd

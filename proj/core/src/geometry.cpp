#include "surfsd/geometry.hpp"

#include "surfsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace surfsd {

namespace {

constexpr double kProjectionTol = 1e-12;
constexpr double kResidualTol = 1e-12;
constexpr int kProjectionMaxIter = 100;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
    }
}

}  // namespace

ImplicitSurface ImplicitSurface::sphere(const Vec3& center, double radius) {
    require_positive(radius, "sphere radius");
    return ImplicitSurface(SurfaceKind::Sphere, center, radius, radius, Vec3::Zero());
}

ImplicitSurface ImplicitSurface::spheroid(const Vec3& center, double r_max, double r_min) {
    require_positive(r_max, "spheroid r_max");
    require_positive(r_min, "spheroid r_min");
    return ImplicitSurface(SurfaceKind::Spheroid, center, r_max, r_min, Vec3::Zero());
}

ImplicitSurface ImplicitSurface::plane(const Vec3& point, const Vec3& normal) {
    const double len = normal.norm();
    require_positive(len, "plane normal length");
    return ImplicitSurface(SurfaceKind::Plane, point, 0.0, 0.0, normal / len);
}

double ImplicitSurface::level_set_value(const Vec3& x) const {
    const Vec3 d = x - center_;
    switch (kind_) {
        case SurfaceKind::Sphere:
            return d.norm() - r_max_;
        case SurfaceKind::Spheroid:
            return (d.x() * d.x() + d.y() * d.y()) / (r_max_ * r_max_) + d.z() * d.z() / (r_min_ * r_min_) - 1.0;
        case SurfaceKind::Plane:
            return d.dot(plane_normal_);
    }
    return 0.0;
}

Vec3 ImplicitSurface::level_set_gradient(const Vec3& x) const {
    const Vec3 d = x - center_;
    switch (kind_) {
        case SurfaceKind::Sphere: {
            const double r = d.norm();
            return r > 0.0 ? Vec3(d / r) : Vec3(0.0, 0.0, 1.0);
        }
        case SurfaceKind::Spheroid:
            return {2.0 * d.x() / (r_max_ * r_max_), 2.0 * d.y() / (r_max_ * r_max_), 2.0 * d.z() / (r_min_ * r_min_)};
        case SurfaceKind::Plane:
            return plane_normal_;
    }
    return Vec3::Zero();
}

double ImplicitSurface::band_half_width() const noexcept {
    switch (kind_) {
        case SurfaceKind::Sphere:
            return 0.5 * r_max_;
        case SurfaceKind::Spheroid: {
            const double a = r_max_;
            const double b = r_min_;
            // smallest principal radius of curvature
            const double reach = std::min(a * a / b, b * b / a);
            return 0.5 * std::min({a, b, reach});
        }
        case SurfaceKind::Plane:
            return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double ImplicitSurface::diameter() const noexcept {
    switch (kind_) {
        case SurfaceKind::Sphere: return 2.0 * r_max_;
        case SurfaceKind::Spheroid: return 2.0 * std::max(r_max_, r_min_);
        case SurfaceKind::Plane: return 1.0;
    }
    return 1.0;
}

std::optional<Aabb> ImplicitSurface::bounding_box() const {
    switch (kind_) {
        case SurfaceKind::Sphere:
        case SurfaceKind::Spheroid: {
            const Vec3 ext(r_max_, r_max_, r_min_);
            return Aabb{center_ - ext, center_ + ext};
        }
        case SurfaceKind::Plane:
            return std::nullopt;
    }
    return std::nullopt;
}

ImplicitSurface ImplicitSurface::translated(const Vec3& offset) const {
    ImplicitSurface s = *this;
    s.center_ += offset;
    return s;
}

EllipseFoot ellipse_closest_point(double e0, double e1, double y0, double y1) {
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            const double z0 = y0 / e0;
            const double z1 = y1 / e1;
            const double g = z0 * z0 + z1 * z1 - 1.0;
            if (g == 0.0) {
                return {y0, y1, 0};
            }
            const double r0 = (e0 / e1) * (e0 / e1);
            const double n0 = r0 * z0;
            auto G = [&](double s) {
                const double a = n0 / (s + r0);
                const double b = z1 / (s + 1.0);
                return a * a + b * b - 1.0;
            };
            auto dG = [&](double s) {
                const double a = n0 / (s + r0);
                const double b = z1 / (s + 1.0);
                return -2.0 * a * a / (s + r0) - 2.0 * b * b / (s + 1.0);
            };
            // G is convex and decreasing on (-1, inf); the root is bracketed below.
            double lo = z1 - 1.0;
            double hi = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
            double s = g < 0.0 ? lo : hi;
            double step_old = hi - lo;
            double step = step_old;
            double f = G(s);
            double df = dG(s);
            for (int it = 1; it <= kProjectionMaxIter; ++it) {
                const bool newton_leaves = ((s - hi) * df - f) * ((s - lo) * df - f) > 0.0;
                const bool too_slow = std::abs(2.0 * f) > std::abs(step_old * df);
                step_old = step;
                if (newton_leaves || too_slow) {
                    step = 0.5 * (hi - lo);
                    s = lo + step;
                } else {
                    step = f / df;
                    s -= step;
                }
                f = G(s);
                df = dG(s);
                if (f > 0.0) {
                    lo = s;
                } else if (f < 0.0) {
                    hi = s;
                }
                // A tiny Newton step alone is not enough: near the major axis
                // |dG| blows up at the lower bracket and the step vanishes far
                // from the root.
                const bool small_step = std::abs(step) <= kProjectionTol * (1.0 + std::abs(s));
                if (f == 0.0 || (small_step && std::abs(f) <= kResidualTol) ||
                    hi - lo <= kProjectionTol * (1.0 + std::abs(s))) {
                    return {r0 * y0 / (s + r0), y1 / (s + 1.0), it};
                }
            }
            throw Error(ErrorCode::NoConvergence, "ellipse projection did not reach tolerance");
        }
        return {0.0, e1, 0};
    }
    const double numer = e0 * y0;
    const double denom = e0 * e0 - e1 * e1;
    if (numer < denom) {
        const double t = numer / denom;
        return {e0 * t, e1 * std::sqrt(std::max(0.0, 1.0 - t * t)), 0};
    }
    return {e0, 0.0, 0};
}

ClosestPointResult ImplicitSurface::spheroid_closest_point(const Vec3& x) const {
    const Vec3 d = x - center_;
    const double rho = std::hypot(d.x(), d.y());
    const double az = std::abs(d.z());
    const double a = r_max_;
    const double b = r_min_;

    double foot_r = 0.0;
    double foot_z = 0.0;
    if (a >= b) {
        const EllipseFoot e = ellipse_closest_point(a, b, rho, az);
        foot_r = e.x0;
        foot_z = e.x1;
    } else {
        const EllipseFoot e = ellipse_closest_point(b, a, az, rho);
        foot_r = e.x1;
        foot_z = e.x0;
    }
    double ux = 1.0;
    double uy = 0.0;
    if (rho > 0.0) {
        ux = d.x() / rho;
        uy = d.y() / rho;
    }
    const double sz = d.z() < 0.0 ? -1.0 : 1.0;
    ClosestPointResult out;
    out.foot = center_ + Vec3(foot_r * ux, foot_r * uy, sz * foot_z);
    out.normal = level_set_gradient(out.foot).normalized();
    out.signed_distance = (x - out.foot).dot(out.normal);
    return out;
}

ClosestPointResult ImplicitSurface::closest_point(const Vec3& x, BandCheck check) const {
    ClosestPointResult out;
    switch (kind_) {
        case SurfaceKind::Sphere: {
            const Vec3 d = x - center_;
            const double r = d.norm();
            out.normal = r > 0.0 ? Vec3(d / r) : Vec3(0.0, 0.0, 1.0);
            out.foot = center_ + r_max_ * out.normal;
            out.signed_distance = r - r_max_;
            break;
        }
        case SurfaceKind::Spheroid:
            out = spheroid_closest_point(x);
            break;
        case SurfaceKind::Plane: {
            out.normal = plane_normal_;
            out.signed_distance = (x - center_).dot(plane_normal_);
            out.foot = x - out.signed_distance * plane_normal_;
            break;
        }
    }
    if (check == BandCheck::Enforce && std::abs(out.signed_distance) > band_half_width()) {
        throw Error(ErrorCode::OutsideBand, "point at distance " + std::to_string(out.signed_distance) +
                                                " exceeds band half-width " + std::to_string(band_half_width()));
    }
    return out;
}

double normal_extension(const ImplicitSurface& surface, const ScalarField& u, const Vec3& x, BandCheck check) {
    return u(surface.closest_point(x, check).foot);
}

double default_fd_step(const ImplicitSurface& surface) noexcept { return 1e-3 * surface.diameter(); }

ExtensionDerivatives extension_derivatives(const ImplicitSurface& surface, const ScalarField& u, const Vec3& x,
                                           double h_fd) {
    auto ue = [&](const Vec3& p) { return u(surface.closest_point(p, BandCheck::Skip).foot); };
    ExtensionDerivatives out;
    out.value = ue(x);
    const double h = h_fd;
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        const double fp1 = ue(x + e);
        const double fm1 = ue(x - e);
        const double fp2 = ue(x + 2.0 * e);
        const double fm2 = ue(x - 2.0 * e);
        out.gradient[k] = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
        out.laplacian += (-fp2 + 16.0 * fp1 - 30.0 * out.value + 16.0 * fm1 - fm2) / (12.0 * h * h);
    }
    return out;
}

double manufactured_rhs(const ImplicitSurface& surface, const ScalarField& u, const VectorField& beta,
                        const ScalarField& alpha, double epsilon, const Vec3& q, double h_fd) {
    const ClosestPointResult cp = surface.closest_point(q);
    const double h = h_fd > 0.0 ? h_fd : default_fd_step(surface);
    const ExtensionDerivatives d = extension_derivatives(surface, u, cp.foot, h);
    return beta(cp.foot).dot(d.gradient) + alpha(cp.foot) * d.value - epsilon * d.laplacian;
}

}  // namespace surfsd

#include "surfsd/cli/problems.hpp"

#include "surfsd/cli/expression.hpp"

namespace surfsd::cli {

SurfaceSpec default_surface(ProblemName name) {
    SurfaceSpec s;
    s.kind = SurfaceKind::Spheroid;
    s.center = Vec3::Constant(0.5);
    s.r_max = 0.5;
    s.r_min = name == ProblemName::SpheroidLayer ? 0.45 : 0.25;
    return s;
}

SurfaceSpec resolve_surface(const RunConfig& config) {
    return config.surface ? *config.surface : default_surface(config.problem.name);
}

Problem build_problem(const ProblemSpec& spec, const ImplicitSurface& surface, double epsilon, double fd_step) {
    const Vec3 c = surface.center();
    std::optional<ScalarField> exact;
    std::optional<ScalarField> f;
    ScalarField alpha = ScalarField::constant_value(0.0);
    VectorField beta = VectorField::zero();

    switch (spec.name) {
        case ProblemName::SpheroidSmooth:
            beta = {[c](const Vec3& x) { return Vec3(c.y() - x.y(), x.x() - c.x(), 0.0); }, true};
            exact = ScalarField{[c](const Vec3& x) { return 100.0 * (x - c).prod(); }, std::nullopt};
            break;
        case ProblemName::SpheroidLayer:
            beta = {[c](const Vec3& x) { return Vec3(10.0 * (c.y() - x.y()), 10.0 * (x.x() - c.x()), 0.0); },
                    true};
            alpha = ScalarField::constant_value(1.0);
            f = ScalarField{[zc = c.z() + 0.05](const Vec3& x) { return x.z() > zc ? 1.0 : 0.0; }, std::nullopt};
            break;
        case ProblemName::Custom: break;
    }

    if (spec.u) {
        exact = Expression::parse(*spec.u).as_field();
    }
    if (spec.alpha) {
        alpha = Expression::parse(*spec.alpha).as_field();
    }
    if (spec.beta) {
        const auto& b = *spec.beta;
        beta = make_vector_field(Expression::parse(b[0]), Expression::parse(b[1]), Expression::parse(b[2]));
    }
    if (spec.f) {
        f = Expression::parse(*spec.f).as_field();
    } else if (exact) {
        f = ScalarField{[surface, u = *exact, beta, alpha, epsilon, fd_step](const Vec3& q) {
                            return manufactured_rhs(surface, u, beta, alpha, epsilon, q, fd_step);
                        },
                        std::nullopt};
    }
    return Problem{surface, alpha, beta, *f, exact};
}

}  // namespace surfsd::cli

#pragma once

#include "surfsd/cli/config.hpp"
#include "surfsd/fem.hpp"

namespace surfsd::cli {

/// Surface used when the config has no surface section.
///   spheroid-smooth: spheroid at (1/2, 1/2, 1/2), r_max 1/2, r_min 1/4
///   spheroid-layer:  spheroid at (1/2, 1/2, 1/2), r_max 1/2, r_min 0.45
SurfaceSpec default_surface(ProblemName name);

/// The surface the config describes (explicit or the named default).
SurfaceSpec resolve_surface(const RunConfig& config);

/// Coefficients and data on `surface`, with (cx, cy, cz) its center:
///   spheroid-smooth: beta = (cy - y, x - cx, 0), alpha = 0,
///                    u = 100 (x - cx)(y - cy)(z - cz), f manufactured from u
///   spheroid-layer:  beta = (10 (cy - y), 10 (x - cx), 0), alpha = 1,
///                    f = 1 where z > cz + 0.05 and 0 elsewhere, no exact solution
/// Expressions set in the problem section override the named defaults. When u is known and
/// f is not given, f is manufactured with the method's epsilon.
Problem build_problem(const ProblemSpec& spec, const ImplicitSurface& surface, double epsilon, double fd_step);

}  // namespace surfsd::cli

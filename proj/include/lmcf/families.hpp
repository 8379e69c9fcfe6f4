#pragma once

#include <memory>

#include "lmcf/immersion.hpp"

namespace lmcf {

// Analytic initial immersions used by the scenarios and the tests. Every
// family is parametrized over the periodic grid u ∈ [0,1)^n.

using SpacePtr = std::shared_ptr<const AmbientSpace>;

/// Straight line F(u) = (u·P, 0) in a flat 2-torus with x-period P.
Immersion straight_line(SpacePtr flat, int resolution);

/// Graph curve F(u) = (u·P, a sin 2πku) in a flat 2-torus.
Immersion graph_curve(SpacePtr flat, int resolution, double amplitude, int mode);

/// Contractible round circle of the given radius in a flat 2-torus.
Immersion flat_circle(SpacePtr flat, int resolution, double radius, double cx = 0.5, double cy = 0.5);

/// The real plane {y1 = y2 = 0} of flat C², i.e. the identity on [0,1)².
Immersion flat_identity_torus(SpacePtr flat2, int resolution);

/// Centered circle |x| = chart_radius in the stereographic chart of a round
/// sphere; chart_radius = 1 is the equator (a great circle).
Immersion sphere_circle(SpacePtr sphere, int resolution, double chart_radius = 1.0);

/// Chart radius r* at which the discretized centered circle has zero discrete
/// mean curvature (r* = 1 + O(Δu²)).
double discrete_equator_radius(SpacePtr sphere, int resolution);

/// Discretely minimal equator rotated about the x-axis of R³ by `tilt`.
Immersion tilted_great_circle(SpacePtr sphere, int resolution, double tilt);

/// Discretely minimal equator with a normal perturbation of the given
/// amplitude and mode m. For m ≥ 2 the chart radius is ρ(1 + a cos 2πmu) and
/// the base radius is tuned so that α_H is exact. For m = 1, whose first-order normal perturbation is an infinitesimal
/// rotation, the equator is rotated rigidly by the angle a instead.
Immersion perturbed_great_circle(SpacePtr sphere, int resolution, double amplitude, int mode);

/// Clifford torus (w1, w2) = (ρ e^{2πi u0}, ρ e^{2πi u1}) in the affine chart of CP².
Immersion clifford_torus(SpacePtr cp2, int resolution, double modulus = 1.0);

/// Modulus ρ* at which the discretized Clifford torus has zero discrete mean
/// curvature (ρ* = 1 + O(Δu²)).
double discrete_clifford_modulus(SpacePtr cp2, int resolution);

/// Curve ρ(s) = a cos(2π m u), s = ℓu around the core of a hyperbolic cylinder.
Immersion cylinder_curve(SpacePtr cylinder, int resolution, double amplitude, int mode);

}  // namespace lmcf

#pragma once

#include <memory>
#include <numbers>

#include "lmcf/ambient.hpp"
#include "lmcf/families.hpp"

namespace lmcf::test {

inline constexpr double kPi = std::numbers::pi;

inline SpacePtr flat(int complex_dim = 1) {
  return std::make_shared<const AmbientSpace>(AmbientSpace::flat_torus(complex_dim));
}
inline SpacePtr sphere() { return std::make_shared<const AmbientSpace>(AmbientSpace::round_sphere(1.0)); }
inline SpacePtr cp2() { return std::make_shared<const AmbientSpace>(AmbientSpace::fubini_study_cp2(4.0)); }
inline SpacePtr cylinder() {
  return std::make_shared<const AmbientSpace>(AmbientSpace::hyperbolic_cylinder(2.0 * kPi));
}

inline Immersion great_circle(int n) {
  auto s = sphere();
  return sphere_circle(s, n, discrete_equator_radius(s, n));
}
inline Immersion minimal_clifford(int n) {
  auto c = cp2();
  return clifford_torus(c, n, discrete_clifford_modulus(c, n));
}

}  // namespace lmcf::test

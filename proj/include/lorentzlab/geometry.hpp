#pragma once

#include <optional>

#include "lorentzlab/vec2.hpp"

namespace lorentzlab::geom {

// Tolerance ladder used throughout the geometry layer.
inline constexpr double kUnitTol = 1e-12;      // unit-norm checks
inline constexpr double kBoundaryTol = 1e-10;  // ray/boundary residuals
inline constexpr double kPointTol = 1e-9;      // per-step position residuals
inline constexpr double kTangencyTol = 1e-12;  // monic discriminant window treated as a miss

struct Disk {
  Vec2 center;
  double radius = 0.0;  // > 0
};

// First intersection parameter t > 0 of the ray origin + t*direction with the
// disk boundary, or nullopt when the ray misses.  direction must be unit
// length (within 1e-12) and the origin strictly outside the disk; an origin
// inside the disk signals corrupted state upstream and throws GeometryError.
// Near-tangent contacts (monic discriminant within +-1e-12) count as misses.
std::optional<double> ray_disk_intersection(Vec2 origin, Vec2 direction, const Disk& disk);

// Specular reflection v - 2(v.n)n.  v and n must be unit length within 1e-12
// and the contact must be transversal (v.n < 0); grazing or separating input
// throws GeometryError.
Vec2 reflect(Vec2 v, Vec2 unit_normal);

}  // namespace lorentzlab::geom

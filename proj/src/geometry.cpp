#include "lorentzlab/geometry.hpp"

#include <cmath>

#include "lorentzlab/errors.hpp"

namespace lorentzlab::geom {

std::optional<double> ray_disk_intersection(Vec2 origin, Vec2 direction, const Disk& disk) {
  if (!is_finite(origin) || !is_finite(direction)) {
    throw GeometryError("ray_disk_intersection: non-finite ray");
  }
  if (std::abs(norm(direction) - 1.0) > kUnitTol) {
    throw GeometryError("ray_disk_intersection: direction is not unit length");
  }
  if (!(disk.radius > 0.0)) {
    throw GeometryError("ray_disk_intersection: non-positive disk radius");
  }

  const Vec2 oc = origin - disk.center;
  const double c = norm2(oc) - disk.radius * disk.radius;
  if (c < 0.0) {
    throw GeometryError("ray_disk_intersection: ray origin inside disk (corrupted state)");
  }
  const double b = dot(direction, oc);

  // Monic quadratic t^2 + 2bt + c; near-tangent discriminants are misses.
  const double disc = b * b - c;
  if (disc <= kTangencyTol) return std::nullopt;

  // Stable smaller root: roots have product c >= 0, so if the smaller root is
  // not positive the disk lies behind the origin.
  const double sq = std::sqrt(disc);
  const double t = -b - sq;
  if (t <= 0.0) return std::nullopt;
  return t;
}

Vec2 reflect(Vec2 v, Vec2 unit_normal) {
  if (std::abs(norm(v) - 1.0) > kUnitTol) {
    throw GeometryError("reflect: velocity is not unit length");
  }
  if (std::abs(norm(unit_normal) - 1.0) > kUnitTol) {
    throw GeometryError("reflect: normal is not unit length");
  }
  const double vn = dot(v, unit_normal);
  if (!(vn < 0.0)) {
    throw GeometryError("reflect: contact is grazing or separating (v.n >= 0)");
  }
  return v - (2.0 * vn) * unit_normal;
}

}  // namespace lorentzlab::geom

#include "lorentzlab/collision.hpp"

#include <cmath>
#include <limits>

#include "lorentzlab/errors.hpp"

namespace lorentzlab::lorentz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Meaningfully-inside threshold for the corrupted-state check; contact points
// sit on boundaries within ~1e-13, far from this.
constexpr double kInsideSlack = 1e-9;

}  // namespace

NextCollision next_collision(Vec2 position, Vec2 direction, const ScattererTable& table,
                             double max_flight, std::optional<DiskId> exclude) {
  if (!geom::is_finite(position) || !geom::is_finite(direction)) {
    throw GeometryError("next_collision: non-finite phase point");
  }
  if (std::abs(geom::norm(direction) - 1.0) > geom::kUnitTol) {
    throw GeometryError("next_collision: direction is not unit length");
  }
  if (!(max_flight > 0.0)) {
    throw GeometryError("next_collision: max_flight must be positive");
  }

  double best_t = kInf;
  DiskId best_id;
  Vec2 best_center;
  double best_radius = 0.0;

  auto consider = [&](const Disk& d, const DiskId& id) {
    if (exclude && id == *exclude) return;
    const Vec2 oc = position - d.center;
    const double c = geom::norm2(oc) - d.radius * d.radius;
    if (c < -kInsideSlack) {
      throw GeometryError("next_collision: position inside a scatterer (corrupted state)");
    }
    const double b = geom::dot(direction, oc);
    const double disc = b * b - c;
    if (disc <= geom::kTangencyTol) return;
    const double t = -b - std::sqrt(disc);
    if (t <= 0.0 || t > max_flight || t >= best_t) return;
    best_t = t;
    best_id = id;
    best_center = d.center;
    best_radius = d.radius;
  };

  // Cell walk along the ray.  Every disk whose boundary the ray can touch at
  // parameter t has its center within max_radius of the ray point at t, hence
  // inside the halo of some visited cell; the stop margin accounts for that
  // same back-protrusion.
  const int halo = static_cast<int>(std::floor(table.max_radius())) + 1;
  std::int32_t cx = static_cast<std::int32_t>(std::floor(position.x));
  std::int32_t cy = static_cast<std::int32_t>(std::floor(position.y));

  const int step_x = direction.x > 0.0 ? 1 : (direction.x < 0.0 ? -1 : 0);
  const int step_y = direction.y > 0.0 ? 1 : (direction.y < 0.0 ? -1 : 0);
  const double t_delta_x = step_x != 0 ? std::abs(1.0 / direction.x) : kInf;
  const double t_delta_y = step_y != 0 ? std::abs(1.0 / direction.y) : kInf;
  double t_max_x = kInf;
  double t_max_y = kInf;
  if (step_x > 0) t_max_x = (static_cast<double>(cx) + 1.0 - position.x) / direction.x;
  if (step_x < 0) t_max_x = (static_cast<double>(cx) - position.x) / direction.x;
  if (step_y > 0) t_max_y = (static_cast<double>(cy) + 1.0 - position.y) / direction.y;
  if (step_y < 0) t_max_y = (static_cast<double>(cy) - position.y) / direction.y;

  double t_entry = 0.0;
  const double margin = table.max_radius() + 1.0;
  while (true) {
    for (int dx = -halo; dx <= halo; ++dx) {
      for (int dy = -halo; dy <= halo; ++dy) {
        table.for_each_disk_in_cell(cx + dx, cy + dy, consider);
      }
    }
    const double stop_t = std::min(best_t, max_flight) + margin;
    if (t_entry > stop_t) break;
    if (t_max_x < t_max_y) {
      t_entry = t_max_x;
      t_max_x += t_delta_x;
      cx += step_x;
    } else {
      t_entry = t_max_y;
      t_max_y += t_delta_y;
      cy += step_y;
    }
    if (t_entry > stop_t) break;
  }

  if (best_t > max_flight || best_t == kInf) return FreeFlight{max_flight};

  CollisionEvent ev;
  ev.time = best_t;
  ev.point = position + best_t * direction;
  Vec2 n = (ev.point - best_center) / best_radius;
  // One Newton-style renormalization keeps the normal unit length even after
  // long flights where the absolute position magnitude eats precision.
  ev.normal = n / geom::norm(n);
  ev.disk_id = best_id;
  return ev;
}

}  // namespace lorentzlab::lorentz

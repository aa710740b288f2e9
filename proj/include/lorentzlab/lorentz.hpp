#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lorentzlab/collision.hpp"
#include "lorentzlab/errors.hpp"
#include "lorentzlab/geometry.hpp"
#include "lorentzlab/rng.hpp"
#include "lorentzlab/scatterer_table.hpp"

namespace lorentzlab::lorentz {

// Billiard state: position in absolute plane coordinates (never wrapped into
// the unit cell) and unit velocity.
struct PhasePoint {
  Vec2 q;
  Vec2 v;
};

// One recorded collision: contact point q, outgoing velocity v after the
// reflection there, and the length of the flight that arrived at q.
struct TrajectoryEvent {
  Vec2 q;
  Vec2 v;
  double flight_length = 0.0;
};

// Collision-indexed trajectory.  points() is (q_0, q_1, ..., q_k) with q_0
// the initial position and q_j the j-th contact point; consecutive points
// satisfy q_{j+1} = q_j + flight * v_j.  When a flight exceeds the horizon
// cap the trajectory is truncated and carries the marker instead of further
// events.
struct CollisionTrajectory {
  PhasePoint initial;
  std::vector<TrajectoryEvent> events;
  bool truncated = false;
  double truncated_flight = 0.0;

  std::vector<Vec2> points() const {
    std::vector<Vec2> pts;
    pts.reserve(events.size() + 1);
    pts.push_back(initial.q);
    for (const TrajectoryEvent& e : events) pts.push_back(e.q);
    return pts;
  }
};

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

inline constexpr std::uint64_t kMaxSampleAttempts = 1000000;
inline constexpr double kDefaultMaxFlight = 1e4;

// Uniform phase point: position uniform on the region minus the scatterers
// (rejection sampling, at most 1e6 attempts), velocity uniform on the unit
// circle.  Degenerate regions and fully covered regions raise SamplingError.
PhasePoint sample_initial(const ScattererTable& table, const Box& region, Rng& rng);

// Runs the billiard flow for up to n_collisions collisions, calling
// on_event(j, event) with j = 1, 2, ... for each resolved collision.  Returns
// the length of the censored flight if the trajectory was truncated by
// max_flight, nullopt otherwise.  `exclude_first` suppresses one scatterer
// for the first flight, for launches off that scatterer's boundary.
// Outgoing velocities are renormalized to unit length at every reflection,
// so chains of any length stay within the collision search's unit gate.
template <class OnEvent>
std::optional<double> lorentz_flow(const PhasePoint& initial, const ScattererTable& table,
                                   std::uint64_t n_collisions, double max_flight,
                                   OnEvent&& on_event,
                                   std::optional<DiskId> exclude_first = std::nullopt) {
  if (std::abs(geom::norm(initial.v) - 1.0) > geom::kUnitTol) {
    throw GeometryError("lorentz flow: initial velocity is not unit length");
  }
  Vec2 q = initial.q;
  Vec2 v = initial.v;
  std::optional<DiskId> exclude = exclude_first;
  for (std::uint64_t j = 1; j <= n_collisions; ++j) {
    NextCollision res = next_collision(q, v, table, max_flight, exclude);
    if (std::holds_alternative<FreeFlight>(res)) {
      return std::get<FreeFlight>(res).max_flight;
    }
    const CollisionEvent& ev = std::get<CollisionEvent>(res);
    TrajectoryEvent out;
    out.q = ev.point;
    out.v = geom::reflect(v, ev.normal);
    // Reflection keeps the speed only to rounding and the error compounds
    // linearly along the chain; restore the unit invariant every bounce.
    out.v = out.v / geom::norm(out.v);
    out.flight_length = ev.time;
    on_event(j, out);
    q = out.q;
    v = out.v;
    exclude = ev.disk_id;
  }
  return std::nullopt;
}

// Materialized variant of lorentz_flow.
CollisionTrajectory simulate_lorentz(const PhasePoint& initial, const ScattererTable& table,
                                     std::uint64_t n_collisions,
                                     double max_flight = kDefaultMaxFlight,
                                     std::optional<DiskId> exclude_first = std::nullopt);

}  // namespace lorentzlab::lorentz

#include "lorentzlab/lorentz.hpp"

#include <cmath>

namespace lorentzlab::lorentz {

PhasePoint sample_initial(const ScattererTable& table, const Box& region, Rng& rng) {
  if (!(region.width() > 0.0) || !(region.height() > 0.0)) {
    throw SamplingError("sample_initial: degenerate sampling region");
  }
  for (std::uint64_t attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    Vec2 q{region.x0 + rng.uniform() * region.width(),
           region.y0 + rng.uniform() * region.height()};
    if (table.point_blocked(q)) continue;
    const double a = 6.283185307179586476925286766559 * rng.uniform();
    return PhasePoint{q, Vec2{std::cos(a), std::sin(a)}};
  }
  throw SamplingError("sample_initial: rejection sampling exhausted (region fully covered?)");
}

CollisionTrajectory simulate_lorentz(const PhasePoint& initial, const ScattererTable& table,
                                     std::uint64_t n_collisions, double max_flight,
                                     std::optional<DiskId> exclude_first) {
  CollisionTrajectory traj;
  traj.initial = initial;
  traj.events.reserve(n_collisions);
  auto censored = lorentz_flow(
      initial, table, n_collisions, max_flight,
      [&](std::uint64_t, const TrajectoryEvent& e) { traj.events.push_back(e); }, exclude_first);
  if (censored) {
    traj.truncated = true;
    traj.truncated_flight = *censored;
  }
  return traj;
}

}  // namespace lorentzlab::lorentz

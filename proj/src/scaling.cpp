#include "lorentzlab/scaling.hpp"

#include <cmath>

namespace lorentzlab::scaling {

ScaledPath diffusive_scale(const std::vector<geom::Vec2>& points,
                           std::uint64_t N) {
  if (N < 1) throw StatsError("diffusive_scale: N must be >= 1");
  if (points.size() < N + 1) {
    throw StatsError("diffusive_scale: path too short (need N + 1 points)");
  }
  ScaledPath sp;
  sp.N = N;
  sp.scale = std::sqrt(static_cast<double>(N));
  sp.nodes.reserve(N + 1);
  for (std::uint64_t j = 0; j <= N; ++j) {
    sp.nodes.push_back(points[j] / sp.scale);
  }
  return sp;
}

ScaledPath superdiffusive_scale(const std::vector<geom::Vec2>& points,
                                std::uint64_t N) {
  if (N < 2) throw StatsError("superdiffusive_scale: N must be >= 2");
  ScaledPath sp = diffusive_scale(points, N);
  const double root_log = std::sqrt(std::log(static_cast<double>(N)));
  for (auto& node : sp.nodes) node = node / root_log;
  sp.scale *= root_log;
  return sp;
}

geom::Vec2 evaluate(const ScaledPath& sp, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw StatsError("evaluate: t must lie in [0, 1]");
  }
  const double u = t * static_cast<double>(sp.N);
  const double snapped = std::nearbyint(u);
  // Node times must return the node exactly despite t = j/N rounding.
  if (std::abs(u - snapped) < 1e-9 && snapped >= 0.0 &&
      snapped <= static_cast<double>(sp.N)) {
    return sp.nodes[static_cast<std::size_t>(snapped)];
  }
  const auto j = static_cast<std::size_t>(u);
  const double frac = u - static_cast<double>(j);
  return sp.nodes[j] + frac * (sp.nodes[j + 1] - sp.nodes[j]);
}

}  // namespace lorentzlab::scaling

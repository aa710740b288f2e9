#pragma once

#include <cstdint>
#include <vector>

#include "lorentzlab/errors.hpp"
#include "lorentzlab/vec2.hpp"

namespace lorentzlab::scaling {

// A trajectory rescaled onto [0, 1]: nodes[j] is the value at t = j/N.
struct ScaledPath {
  std::uint64_t N = 1;
  std::vector<geom::Vec2> nodes;  // N + 1 entries
  double scale = 1.0;             // divisor applied to the raw points
};

// nodes[j] = points[j] / sqrt(N).  Needs at least N + 1 points; extras are
// ignored.
ScaledPath diffusive_scale(const std::vector<geom::Vec2>& points,
                           std::uint64_t N);

// nodes[j] = points[j] / sqrt(N ln N), natural log, N >= 2.  Built as the
// diffusive nodes divided by sqrt(ln N), so the two scalings agree bitwise up
// to that single factor.
ScaledPath superdiffusive_scale(const std::vector<geom::Vec2>& points,
                                std::uint64_t N);

// Piecewise-linear interpolation between nodes; exact at node times t = j/N.
geom::Vec2 evaluate(const ScaledPath& sp, double t);

}  // namespace lorentzlab::scaling

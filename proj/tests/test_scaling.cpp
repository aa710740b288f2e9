#include <cmath>
#include <vector>

#include "doctest.h"
#include "lorentzlab/errors.hpp"
#include "lorentzlab/scaling.hpp"
#include "lorentzlab/vec2.hpp"

using namespace lorentzlab;
using geom::Vec2;

namespace {

std::vector<Vec2> ramp_points(std::size_t count) {
  std::vector<Vec2> pts;
  pts.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    pts.push_back(Vec2{0.5 * double(j), -1.25 * double(j) + 0.125});
  }
  return pts;
}

}  // namespace

TEST_CASE("diffusive scaling divides every node by sqrt(N) exactly") {
  const auto pts = ramp_points(12);
  const scaling::ScaledPath sp = scaling::diffusive_scale(pts, 8);
  REQUIRE(sp.nodes.size() == 9);
  CHECK(sp.N == 8);
  CHECK(sp.scale == std::sqrt(8.0));
  for (std::size_t j = 0; j < sp.nodes.size(); ++j) {
    // bitwise: the implementation must divide, not multiply by a reciprocal
    CHECK(sp.nodes[j].x == pts[j].x / std::sqrt(8.0));
    CHECK(sp.nodes[j].y == pts[j].y / std::sqrt(8.0));
  }
}

TEST_CASE("scaling hand values") {
  // endpoint (2, 0) at N = 2: diffusive node (sqrt(2), 0); superdiffusive
  // divides by sqrt(2 ln 2) so the endpoint lands at about 1.69865
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {2, 0}};
  const scaling::ScaledPath d = scaling::diffusive_scale(pts, 2);
  CHECK(d.nodes[2].x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(d.nodes[2].y == 0.0);
  const scaling::ScaledPath s = scaling::superdiffusive_scale(pts, 2);
  CHECK(s.nodes[2].x == doctest::Approx(1.6986436005760381).epsilon(1e-12));

  const auto longer = ramp_points(9);
  const scaling::ScaledPath s8 = scaling::superdiffusive_scale(longer, 8);
  CHECK(s8.scale == doctest::Approx(4.078667960675236).epsilon(1e-12));
}

TEST_CASE("superdiffusive nodes equal diffusive nodes over sqrt(log N) bitwise") {
  const auto pts = ramp_points(40);
  const std::uint64_t N = 32;
  const scaling::ScaledPath d = scaling::diffusive_scale(pts, N);
  const scaling::ScaledPath s = scaling::superdiffusive_scale(pts, N);
  REQUIRE(s.nodes.size() == d.nodes.size());
  const double f = std::sqrt(std::log(double(N)));
  CHECK(s.scale == doctest::Approx(std::sqrt(double(N) * std::log(double(N)))).epsilon(1e-15));
  for (std::size_t j = 0; j < s.nodes.size(); ++j) {
    CHECK(s.nodes[j].x == d.nodes[j].x / f);
    CHECK(s.nodes[j].y == d.nodes[j].y / f);
  }
}

TEST_CASE("scaling input validation") {
  const auto pts = ramp_points(5);
  CHECK_THROWS_AS(scaling::diffusive_scale(pts, 0), StatsError);
  CHECK_THROWS_AS(scaling::diffusive_scale(pts, 5), StatsError);  // needs N+1 points
  CHECK_NOTHROW(scaling::diffusive_scale(pts, 4));
  CHECK_THROWS_AS(scaling::superdiffusive_scale(pts, 1), StatsError);  // ln 1 = 0
  CHECK_NOTHROW(scaling::superdiffusive_scale(pts, 2));
}

TEST_CASE("evaluate is exact at nodes and linear between them") {
  const std::vector<Vec2> pts{{0, 0}, {2, -2}, {2, 4}, {8, 0}, {0, 8}};
  const scaling::ScaledPath sp = scaling::diffusive_scale(pts, 4);
  for (std::size_t j = 0; j <= 4; ++j) {
    const Vec2 v = scaling::evaluate(sp, double(j) / 4.0);
    CHECK(v.x == sp.nodes[j].x);
    CHECK(v.y == sp.nodes[j].y);
  }
  // midpoint of segment 1 -> 2 at t = 3/8
  const Vec2 mid = scaling::evaluate(sp, 0.375);
  CHECK(mid.x == doctest::Approx(0.5 * (sp.nodes[1].x + sp.nodes[2].x)).epsilon(1e-15));
  CHECK(mid.y == doctest::Approx(0.5 * (sp.nodes[1].y + sp.nodes[2].y)).epsilon(1e-15));
  // quarter point of the last segment
  const Vec2 q = scaling::evaluate(sp, 0.75 + 0.25 * 0.25);
  CHECK(q.x == doctest::Approx(0.75 * sp.nodes[3].x + 0.25 * sp.nodes[4].x).epsilon(1e-14));
  CHECK(q.y == doctest::Approx(0.75 * sp.nodes[3].y + 0.25 * sp.nodes[4].y).epsilon(1e-14));

  CHECK_THROWS_AS(scaling::evaluate(sp, -0.01), StatsError);
  CHECK_THROWS_AS(scaling::evaluate(sp, 1.01), StatsError);
  CHECK_NOTHROW(scaling::evaluate(sp, 0.0));
  CHECK_NOTHROW(scaling::evaluate(sp, 1.0));
}

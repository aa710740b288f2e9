#include <cmath>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "doctest.h"
#include "lorentzlab/collision.hpp"
#include "lorentzlab/errors.hpp"
#include "lorentzlab/geometry.hpp"
#include "lorentzlab/scatterer_table.hpp"
#include "oracles.hpp"

using namespace lorentzlab;
using geom::Disk;
using geom::Vec2;
using lorentz::DiskId;
using lorentz::NextCollision;
using lorentz::ScattererTable;

namespace {

// Random 2-disk unit cell whose periodic copies stay separated.
std::vector<Disk> random_cell(std::mt19937& gen) {
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::uniform_real_distribution<double> rad(0.08, 0.3);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Disk a{Vec2{pos(gen), pos(gen)}, rad(gen)};
    Disk b{Vec2{pos(gen), pos(gen)}, rad(gen)};
    // radii stay below 0.5, so same-disk periodic copies are always clear;
    // only a-vs-b can collide, and only across the 3x3 neighbor shifts
    bool ok = true;
    for (int zx = -1; zx <= 1 && ok; ++zx) {
      for (int zy = -1; zy <= 1 && ok; ++zy) {
        const Vec2 shift{static_cast<double>(zx), static_cast<double>(zy)};
        if (geom::norm(a.center + shift - b.center) < a.radius + b.radius + 0.02) ok = false;
      }
    }
    if (ok) return {a, b};
  }
  throw std::runtime_error("random_cell: no separated configuration found");
}

Vec2 random_free_point(const oracle::Scene& sc, std::mt19937& gen, double lo, double hi) {
  std::uniform_real_distribution<double> pos(lo, hi);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vec2 p{pos(gen), pos(gen)};
    if (sc.distance(p) > 1e-5) return p;
  }
  throw std::runtime_error("random_free_point: region looks covered");
}

Vec2 random_direction(std::mt19937& gen) {
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  const double a = ang(gen);
  return Vec2{std::cos(a), std::sin(a)};
}

// Geometric identity: the effective disk named by the library id equals the
// oracle's disk.
void check_same_disk(const ScattererTable& table, const DiskId& lib_id,
                     const oracle::Scene& sc, std::size_t oracle_idx) {
  const Disk lib_disk = table.effective_disk(lib_id);
  const Disk& od = sc.disks[oracle_idx];
  CHECK(std::abs(lib_disk.center.x - od.center.x) < 1e-9);
  CHECK(std::abs(lib_disk.center.y - od.center.y) < 1e-9);
  CHECK(lib_disk.radius == doctest::Approx(od.radius).epsilon(1e-12));
}

}  // namespace

TEST_CASE("single-disk lattice: exact axis hit") {
  const ScattererTable table = lorentz::single_disk_table(0.25);
  const NextCollision res =
      lorentz::next_collision(Vec2{0.5, 0.0}, Vec2{1.0, 0.0}, table, 10.0);
  REQUIRE(std::holds_alternative<lorentz::CollisionEvent>(res));
  const auto& ev = std::get<lorentz::CollisionEvent>(res);
  CHECK(ev.time == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(ev.point.x == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(ev.point.y == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ev.disk_id.kind == DiskId::Kind::periodic);
  CHECK(ev.disk_id.cell_x == 1);
  CHECK(ev.disk_id.cell_y == 0);
  // outward normal at the contact points back toward the ray origin side
  CHECK(ev.normal.x == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("free flight is reported when nothing is reachable") {
  const ScattererTable table = lorentz::single_disk_table(0.25);
  const NextCollision res =
      lorentz::next_collision(Vec2{0.5, 0.0}, Vec2{1.0, 0.0}, table, 0.2);
  REQUIRE(std::holds_alternative<lorentz::FreeFlight>(res));
  CHECK(std::get<lorentz::FreeFlight>(res).max_flight == doctest::Approx(0.2));
}

TEST_CASE("corridor ray in an infinite-horizon table never collides") {
  const ScattererTable table = lorentz::single_disk_table(0.3);
  // the line y = 0.5 clears every disk by 0.2
  const NextCollision res =
      lorentz::next_collision(Vec2{0.25, 0.5}, Vec2{1.0, 0.0}, table, 500.0);
  REQUIRE(std::holds_alternative<lorentz::FreeFlight>(res));
}

TEST_CASE("position strictly inside a scatterer throws") {
  const ScattererTable table = lorentz::single_disk_table(0.25);
  CHECK_THROWS_AS(
      lorentz::next_collision(Vec2{0.1, 0.0}, Vec2{1.0, 0.0}, table, 10.0),
      GeometryError);
}

TEST_CASE("integer lattice shifts leave collision times invariant") {
  const ScattererTable table = lorentz::finite_horizon_pair_table(0.4, 0.25);
  std::mt19937 gen(991);
  const oracle::Scene sc = oracle::periodic_scene(table.cell_disks(), 4);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p = random_free_point(sc, gen, 0.0, 1.0);
    const Vec2 v = random_direction(gen);
    const NextCollision a = lorentz::next_collision(p, v, table, 5.0);
    const NextCollision b =
        lorentz::next_collision(p + Vec2{7.0, -3.0}, v, table, 5.0);
    REQUIRE(a.index() == b.index());
    if (std::holds_alternative<lorentz::CollisionEvent>(a)) {
      const auto& ea = std::get<lorentz::CollisionEvent>(a);
      const auto& eb = std::get<lorentz::CollisionEvent>(b);
      CHECK(ea.time == doctest::Approx(eb.time).epsilon(1e-12));
      CHECK(eb.disk_id.cell_x - ea.disk_id.cell_x == 7);
      CHECK(eb.disk_id.cell_y - ea.disk_id.cell_y == -3);
      CHECK(eb.disk_id.index == ea.disk_id.index);
    }
  }
}

TEST_CASE("random cells: event-driven search agrees with the marching oracle") {
  std::mt19937 gen(20250819);
  int hits = 0;
  int misses = 0;
  for (int table_i = 0; table_i < 25; ++table_i) {
    const std::vector<Disk> cell = random_cell(gen);
    const ScattererTable table{cell};
    const oracle::Scene sc = oracle::periodic_scene(cell, 14);
    for (int trial = 0; trial < 40; ++trial) {
      const Vec2 p = random_free_point(sc, gen, -2.0, 3.0);
      const Vec2 v = random_direction(gen);
      const double t_max = 6.0;
      const NextCollision lib = lorentz::next_collision(p, v, table, t_max);
      const auto ora = oracle::first_hit(sc, p, v, t_max);
      if (std::holds_alternative<lorentz::CollisionEvent>(lib)) {
        const auto& ev = std::get<lorentz::CollisionEvent>(lib);
        REQUIRE_MESSAGE(ora.has_value(), "library hit but oracle missed at t=" << ev.time);
        CHECK(std::abs(ev.time - ora->t) < 1e-9);
        check_same_disk(table, ev.disk_id, sc, ora->index);
        ++hits;
      } else {
        REQUIRE_MESSAGE(!ora.has_value(),
                        "library missed but oracle hit at t=" << ora->t);
        ++misses;
      }
    }
  }
  // the battery must exercise both outcomes
  CHECK(hits > 300);
  CHECK(misses > 20);
}

TEST_CASE("chained flights with exclusion agree with the oracle") {
  std::mt19937 gen(777);
  for (int table_i = 0; table_i < 6; ++table_i) {
    const std::vector<Disk> cell = random_cell(gen);
    const ScattererTable table{cell};
    const oracle::Scene sc = oracle::periodic_scene(cell, 22);

    Vec2 p = random_free_point(sc, gen, 0.0, 1.0);
    Vec2 v = random_direction(gen);
    std::optional<DiskId> exclude;
    std::optional<std::size_t> oracle_exclude;
    for (int step = 0; step < 60; ++step) {
      const NextCollision lib = lorentz::next_collision(p, v, table, 8.0, exclude);
      const auto ora = oracle::first_hit(sc, p, v, 8.0, oracle_exclude);
      if (!std::holds_alternative<lorentz::CollisionEvent>(lib)) {
        CHECK(!ora.has_value());
        break;
      }
      const auto& ev = std::get<lorentz::CollisionEvent>(lib);
      REQUIRE(ora.has_value());
      REQUIRE(std::abs(ev.time - ora->t) < 1e-9);
      check_same_disk(table, ev.disk_id, sc, ora->index);
      // the kept trajectory state comes from the library; the oracle follows
      p = ev.point;
      v = geom::reflect(v, ev.normal);
      exclude = ev.disk_id;
      oracle_exclude = ora->index;
      // stay inside the replicated scene
      if (std::abs(p.x) > 12.0 || std::abs(p.y) > 12.0) break;
    }
  }
}

TEST_CASE("excluded scatterer is transparent for the whole flight") {
  const ScattererTable table = lorentz::single_disk_table(0.25);
  // sitting on the boundary of the disk in cell (0,0), firing through it
  const Vec2 p{0.25, 0.0};
  const Vec2 v{1.0, 0.0};
  const DiskId self{DiskId::Kind::periodic, 0, 0, 0};
  const NextCollision res = lorentz::next_collision(p, v, table, 10.0, self);
  REQUIRE(std::holds_alternative<lorentz::CollisionEvent>(res));
  const auto& ev = std::get<lorentz::CollisionEvent>(res);
  CHECK(ev.disk_id.cell_x == 1);
  CHECK(ev.time == doctest::Approx(0.5).epsilon(1e-13));
}

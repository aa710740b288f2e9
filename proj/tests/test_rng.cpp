#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "lorentzlab/rng.hpp"

using namespace lorentzlab;

TEST_CASE("splitmix64 matches the reference sequence from state 0") {
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(s) == 0x06c45d188009454fULL);
}

TEST_CASE("splitmix64 is a bijection of the counter: no collisions nearby") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 4096; ++i) {
    std::uint64_t s = i;
    seen.insert(splitmix64(s));
  }
  CHECK(seen.size() == 4096);
}

TEST_CASE("trajectory streams are deterministic and pairwise distinct") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const std::uint64_t k = trajectory_stream(20250819, i);
    CHECK(k == trajectory_stream(20250819, i));
    keys.insert(k);
  }
  CHECK(keys.size() == 10000);
  CHECK(trajectory_stream(1, 0) != trajectory_stream(2, 0));
}

TEST_CASE("auxiliary streams do not collide with trajectory streams") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(trajectory_stream(7, i));
  for (std::uint64_t t = 0; t < 16; ++t) {
    CHECK(keys.count(auxiliary_stream(7, t)) == 0);
  }
}

TEST_CASE("uniform lies in [0,1) and uniform_pos in (0,1]") {
  Rng rng(123);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("identical keys give identical draw sequences") {
  Rng a(987654321);
  Rng b(987654321);
  for (int i = 0; i < 1000; ++i) CHECK(a.raw() == b.raw());
}

TEST_CASE("uniform has 53-bit resolution: top bits map to value") {
  // (x >> 11) * 2^-53 never reaches 1 and hits 0 only for tiny raws.
  Rng rng(5);
  double max_seen = 0.0;
  for (int i = 0; i < 200000; ++i) max_seen = std::max(max_seen, rng.uniform());
  CHECK(max_seen > 0.99999);
  CHECK(max_seen < 1.0);
}

TEST_CASE("normal_pair has standard moments") {
  Rng rng(4242);
  const int n = 200000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    auto [x, y] = rng.normal_pair();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double inv = 1.0 / n;
  // 5 sigma bands for n = 2e5 standard normal samples
  CHECK(std::abs(sx * inv) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(sy * inv) < 5.0 / std::sqrt(double(n)));
  CHECK(sxx * inv == doctest::Approx(1.0).epsilon(0.03));
  CHECK(syy * inv == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(sxy * inv) < 0.02);
}

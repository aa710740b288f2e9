#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace lorentzlab {

// splitmix64 step; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream splitting: one generator stream per trajectory.
//
// The stream key for trajectory i under master seed s is obtained by running
// splitmix64 twice from s + (i+1)*GOLDEN, where GOLDEN is the splitmix64
// increment.  The offset map i -> s + (i+1)*GOLDEN is injective mod 2^64
// (GOLDEN is odd) and splitmix64 is a bijection, so distinct trajectory
// indices always receive distinct, well-mixed keys.  This one-way mix means
// neighbouring indices share no state.
inline std::uint64_t trajectory_stream(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t s = master_seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  (void)splitmix64(s);
  return splitmix64(s);
}

// Auxiliary streams (direct sampler draws, calibration harnesses) are keyed
// far away from trajectory indices by salting with a tag word first.
inline std::uint64_t auxiliary_stream(std::uint64_t master_seed, std::uint64_t tag) {
  std::uint64_t s = master_seed ^ (0xa5a5a5a5a5a5a5a5ULL + tag);
  (void)splitmix64(s);
  (void)splitmix64(s);
  return splitmix64(s);
}

// Deterministic random stream: std::mt19937_64 (whose output sequence is
// pinned by the standard) plus hand-rolled distributions, so that identical
// keys give identical draws on any conforming implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : eng_(key) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe under log().
  double uniform_pos() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal pair via Box-Muller.
  std::pair<double, double> normal_pair() {
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lorentzlab

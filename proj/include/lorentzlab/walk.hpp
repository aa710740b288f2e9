#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lorentzlab/errors.hpp"
#include "lorentzlab/jump_law.hpp"
#include "lorentzlab/rng.hpp"

namespace lorentzlab::walk {

// Cube side schedule.  constant: side a forever.  power: side at step n is
// max(1, ceil(n^alpha)), n counted from 1.
struct Schedule {
  enum class Kind : std::uint8_t { constant, power };
  Kind kind = Kind::constant;
  double a = 1.0;
  double alpha = 0.0;

  static Schedule constant_side(double a);
  static Schedule power(double alpha);
  double side_at(std::uint64_t n) const;
};

// Amortized-O(1) schedule evaluation for nondecreasing step indices: caches
// the current side and the last step index it stays valid for.
class ScheduleCursor {
 public:
  explicit ScheduleCursor(const Schedule& s) : sched_(s) {}

  double side(std::uint64_t n) {
    if (n <= valid_until_) return side_;
    return advance(n);
  }

 private:
  double advance(std::uint64_t n);

  Schedule sched_;
  std::uint64_t valid_until_ = 0;
  double side_ = 0.0;
};

// Site s lies in the origin-centered cube of side a iff 2*max(|x|,|y|) <= a.
inline bool in_cube(Site s, double side) {
  return 2.0 * static_cast<double>(linf(s)) <= side;
}

// Rule assigning a nearest-neighbor law to every lattice site: each
// coordinate's step toward the origin gets probability 1/4 + beta/2 and the
// step away 1/4 - beta/2 (unbiased in a zero coordinate), every entry clamped
// to stay >= delta.  At the origin the law is uniform.
class PatchFamily {
 public:
  PatchFamily(double beta, double delta);

  // Probabilities in canonical order +e1, -e1, +e2, -e2.
  std::array<double, 4> probabilities(Site s) const;
  JumpLaw law_at(Site s) const;

  Site sample(Site s, Rng& rng) const {
    const auto p = probabilities(s);
    const double u = rng.uniform();
    if (u < p[0]) return Site{1, 0};
    if (u < p[0] + p[1]) return Site{-1, 0};
    if (u < p[0] + p[1] + p[2]) return Site{0, 1};
    return Site{0, -1};
  }

  double beta() const { return beta_; }
  double delta() const { return delta_; }

 private:
  double beta_ = 0.0;
  double delta_ = 1e-3;
};

struct PatchEntry {
  Site site;
  JumpLaw law;
};

// A walk model: translation-invariant background law plus a perturbation
// confined to the schedule's cube.  Explicit per-site laws take precedence
// over the family rule; sites in the cube with neither fall back to the
// background.
struct WalkSpec {
  JumpLaw background;
  std::vector<PatchEntry> patch;
  std::optional<PatchFamily> family;
  Schedule schedule = Schedule::constant_side(1.0);
  double delta = 1e-3;

  bool has_perturbation() const { return !patch.empty() || family.has_value(); }
};

inline constexpr double kDefaultDelta = 1e-3;

// Simple symmetric walk: the four unit jumps at probability 1/4 each.
WalkSpec make_ssrw();

// The canonical uniform nearest-neighbor law (also the SSRW background).
JumpLaw uniform_nn_law();

// Background SSRW with the given law at the origin only.  The law must be a
// finite table with every probability >= delta.
WalkSpec make_lpsrw(JumpLaw origin_law, double delta = kDefaultDelta);

// Inverse-cube axis background with the given law at the origin only
// (uniform nearest-neighbor by default).
WalkSpec make_heavy_axis_walk(JumpLaw origin_law, double delta = kDefaultDelta);
WalkSpec make_heavy_axis_walk();

// Growing-cube perturbation: at step n the family rule applies on the cube of
// side max(1, ceil(n^alpha)).  For bounded-jump backgrounds the admissible
// regime is alpha < 1/2; for the heavy axis background alpha <= 1/2 (the cube
// then still grows slower than the sqrt(n log n) displacement scale).  Values
// outside the regime are rejected unless allow_alpha_override is set.
WalkSpec make_strongly_perturbed(JumpLaw background, double alpha,
                                 PatchFamily family,
                                 bool allow_alpha_override = false);

struct LatticePath {
  std::vector<Site> sites;  // S_0 = origin, ..., S_n
};

// Core driver: evolves n_steps jumps from the origin, calling
// on_step(step_index, site) after each step (step_index from 1).  Returns the
// final site.  Exactly one uniform draw per finite-table step and two per
// heavy-axis step, so paths are reproducible from the stream alone.
template <typename OnStep>
Site walk_evolve(const WalkSpec& spec, std::uint64_t n_steps, Rng& rng,
                 OnStep&& on_step) {
  ScheduleCursor cursor(spec.schedule);
  const bool perturbed = spec.has_perturbation();
  Site s{0, 0};
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    Site jump;
    bool handled = false;
    if (perturbed && in_cube(s, cursor.side(k))) {
      const PatchEntry* hit = nullptr;
      for (const auto& e : spec.patch) {
        if (e.site == s) {
          hit = &e;
          break;
        }
      }
      if (hit != nullptr) {
        jump = hit->law.sample(rng);
        handled = true;
      } else if (spec.family) {
        jump = spec.family->sample(s, rng);
        handled = true;
      }
    }
    if (!handled) jump = spec.background.sample(rng);
    s.x += jump.x;
    s.y += jump.y;
    on_step(k, s);
  }
  return s;
}

// Materializing wrapper: the full site sequence S_0..S_n for one seed.
LatticePath simulate_walk(const WalkSpec& spec, std::uint64_t n,
                          std::uint64_t seed);

}  // namespace lorentzlab::walk

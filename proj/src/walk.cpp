#include "lorentzlab/walk.hpp"

#include <cmath>

namespace lorentzlab::walk {

Schedule Schedule::constant_side(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw ConfigError("schedule: cube side must be finite and >= 0");
  }
  Schedule s;
  s.kind = Kind::constant;
  s.a = a;
  return s;
}

Schedule Schedule::power(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("schedule: exponent must be finite and >= 0");
  }
  Schedule s;
  s.kind = Kind::power;
  s.alpha = alpha;
  return s;
}

double Schedule::side_at(std::uint64_t n) const {
  if (kind == Kind::constant) return a;
  if (n == 0) return 1.0;
  if (alpha == 0.0) return 1.0;
  return std::max(1.0, std::ceil(std::pow(static_cast<double>(n), alpha)));
}

double ScheduleCursor::advance(std::uint64_t n) {
  side_ = sched_.side_at(n);
  if (sched_.kind == Schedule::Kind::constant || sched_.alpha == 0.0) {
    valid_until_ = ~std::uint64_t{0};
    return side_;
  }
  // side_at is a nondecreasing step function of n; find the last index that
  // still evaluates to side_, seeding the search with the analytic inverse
  // side^(1/alpha) and correcting for pow rounding by direct checks.
  const double inv = std::pow(side_, 1.0 / sched_.alpha);
  std::uint64_t cand = n;
  if (inv > static_cast<double>(n) && inv < 9e18) {
    cand = static_cast<std::uint64_t>(inv);
  }
  while (cand > n && sched_.side_at(cand) > side_) --cand;
  while (sched_.side_at(cand + 1) <= side_) ++cand;
  valid_until_ = cand;
  return side_;
}

PatchFamily::PatchFamily(double beta, double delta)
    : beta_(beta), delta_(delta) {
  if (!(delta > 0.0) || delta > 0.25) {
    throw ConfigError("patch family: delta must lie in (0, 0.25]");
  }
  if (!(beta >= 0.0) || beta > 0.5 - 2.0 * delta) {
    throw ConfigError("patch family: beta must lie in [0, 0.5 - 2*delta]");
  }
}

std::array<double, 4> PatchFamily::probabilities(Site s) const {
  // Shift mass within each coordinate pair so the total stays 1 exactly.
  std::array<double, 4> p{0.25, 0.25, 0.25, 0.25};
  const double h = beta_ / 2.0;
  if (s.x > 0) {
    p[0] -= h;
    p[1] += h;
  } else if (s.x < 0) {
    p[0] += h;
    p[1] -= h;
  }
  if (s.y > 0) {
    p[2] -= h;
    p[3] += h;
  } else if (s.y < 0) {
    p[2] += h;
    p[3] -= h;
  }
  return p;
}

JumpLaw PatchFamily::law_at(Site s) const {
  const auto p = probabilities(s);
  return JumpLaw::finite({{Site{1, 0}, p[0]},
                          {Site{-1, 0}, p[1]},
                          {Site{0, 1}, p[2]},
                          {Site{0, -1}, p[3]}});
}

JumpLaw uniform_nn_law() {
  return JumpLaw::finite({{Site{1, 0}, 0.25},
                          {Site{-1, 0}, 0.25},
                          {Site{0, 1}, 0.25},
                          {Site{0, -1}, 0.25}});
}

WalkSpec make_ssrw() {
  WalkSpec spec;
  spec.background = uniform_nn_law();
  spec.schedule = Schedule::constant_side(1.0);
  return spec;
}

namespace {

void validate_patch_law(const JumpLaw& law, double delta) {
  if (law.kind() != JumpLaw::Kind::finite_table) {
    throw ConfigError("patch law must be a finite table");
  }
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (law.min_probability() < delta) {
    throw ConfigError("patch law has an entry below the delta floor " +
                      std::to_string(delta));
  }
}

}  // namespace

WalkSpec make_lpsrw(JumpLaw origin_law, double delta) {
  validate_patch_law(origin_law, delta);
  WalkSpec spec;
  spec.background = uniform_nn_law();
  spec.patch.push_back({Site{0, 0}, std::move(origin_law)});
  spec.schedule = Schedule::constant_side(1.0);
  spec.delta = delta;
  return spec;
}

WalkSpec make_heavy_axis_walk(JumpLaw origin_law, double delta) {
  validate_patch_law(origin_law, delta);
  WalkSpec spec;
  spec.background = JumpLaw::heavy_axis();
  spec.patch.push_back({Site{0, 0}, std::move(origin_law)});
  spec.schedule = Schedule::constant_side(1.0);
  spec.delta = delta;
  return spec;
}

WalkSpec make_heavy_axis_walk() {
  return make_heavy_axis_walk(uniform_nn_law(), kDefaultDelta);
}

WalkSpec make_strongly_perturbed(JumpLaw background, double alpha,
                                 PatchFamily family,
                                 bool allow_alpha_override) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("strongly perturbed walk: alpha must be finite, >= 0");
  }
  const bool bounded = background.kind() == JumpLaw::Kind::finite_table;
  const bool admissible = bounded ? (alpha < 0.5) : (alpha <= 0.5);
  if (!admissible && !allow_alpha_override) {
    throw ConfigError(
        bounded
            ? "alpha >= 1/2 breaks the o(sqrt(n)) cube-growth regime for "
              "bounded jumps; pass the override flag to force it"
            : "alpha > 1/2 breaks the o(sqrt(n log n)) cube-growth regime for "
              "the heavy axis law; pass the override flag to force it");
  }
  WalkSpec spec;
  spec.background = std::move(background);
  spec.family = family;
  spec.schedule = Schedule::power(alpha);
  spec.delta = family.delta();
  return spec;
}

LatticePath simulate_walk(const WalkSpec& spec, std::uint64_t n,
                          std::uint64_t seed) {
  LatticePath path;
  path.sites.reserve(n + 1);
  path.sites.push_back(Site{0, 0});
  Rng rng(seed);
  walk_evolve(spec, n, rng,
              [&](std::uint64_t, Site s) { path.sites.push_back(s); });
  return path;
}

}  // namespace lorentzlab::walk

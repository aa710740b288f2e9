#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "lorentzlab/errors.hpp"
#include "lorentzlab/rng.hpp"

namespace lorentzlab::walk {

struct Site {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

inline bool operator==(Site a, Site b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(Site a, Site b) { return !(a == b); }
inline std::int64_t linf(Site s) { return std::max(std::abs(s.x), std::abs(s.y)); }

// Apery's constant, zeta(3), by partial sums plus an Euler-Maclaurin tail;
// accurate to ~1e-15.
double zeta3();

// Normalization of the inverse-cube axis law P(jump = +/- m e_i) = c / m^3:
// c = 1 / (4 zeta(3)), so the four magnitude families have mass 1/4 each.
double heavy_axis_c();

// P(|jump| = m) restricted to one signed axis family, i.e. c / m^3.
double heavy_axis_pmf(std::int64_t m);

// P(|jump| >= m) across all families (= survival of the magnitude law).
double heavy_axis_survival(std::int64_t m);

// Distribution of one walk increment.  Either an explicit finite table of
// (jump, probability) entries, or the inverse-cube axis law above.
class JumpLaw {
 public:
  enum class Kind : std::uint8_t { finite_table, heavy_axis };

  struct Entry {
    Site jump;
    double p = 0.0;
  };

  // Finite table; probabilities must be positive and sum to 1 within 1e-12.
  // Sampling order follows entry order, so two identically built tables give
  // identical draw sequences.
  static JumpLaw finite(std::vector<Entry> entries);

  // Inverse-cube axis law.  Magnitudes are drawn by exact inverse transform
  // on precomputed tail sums up to 1e6 and by the asymptotic inverse
  // m ~ 1/sqrt(2 zeta(3) u) beyond (residual mass ~4e-13, per-step bias
  // below 1e-12).
  static JumpLaw heavy_axis();

  Kind kind() const { return kind_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool bounded() const { return kind_ == Kind::finite_table; }
  std::int64_t support_radius() const;  // max |jump|_inf (finite tables only)
  double min_probability() const;       // finite tables only

  Site sample(Rng& rng) const {
    if (kind_ == Kind::finite_table) {
      const double u = rng.uniform();
      for (std::size_t i = 0; i + 1 < cdf_.size(); ++i) {
        if (u < cdf_[i]) return entries_[i].jump;
      }
      return entries_.back().jump;
    }
    // Heavy axis: one draw picks the signed axis, one draws the magnitude.
    const double ud = rng.uniform();
    const std::int64_t m = sample_heavy_magnitude(rng.uniform());
    switch (static_cast<int>(ud * 4.0)) {
      case 0: return Site{m, 0};
      case 1: return Site{-m, 0};
      case 2: return Site{0, m};
      default: return Site{0, -m};
    }
  }

  static std::int64_t sample_heavy_magnitude(double u);

  // Default-constructed laws are empty placeholders: assign a factory-built
  // law before sampling.
  JumpLaw() = default;

 private:
  Kind kind_ = Kind::finite_table;
  std::vector<Entry> entries_;
  std::vector<double> cdf_;
};

inline Site sample_jump(const JumpLaw& law, Rng& rng) { return law.sample(rng); }

}  // namespace lorentzlab::walk

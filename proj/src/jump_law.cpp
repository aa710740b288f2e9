#include "lorentzlab/jump_law.hpp"

#include <cmath>
#include <mutex>

namespace lorentzlab::walk {
namespace {

constexpr std::int64_t kHeavyTableMax = 1000000;  // exact inverse-CDF range

double compute_zeta3() {
  // Partial sum to N plus Euler-Maclaurin tail:
  //   sum_{m>N} m^-3 = 1/(2N^2) - 1/(2N^3) + 1/(4N^4) - 1/(12N^6) + O(N^-8)
  const int N = 2000;
  double s = 0.0;
  for (int m = N; m >= 1; --m) {
    const double dm = static_cast<double>(m);
    s += 1.0 / (dm * dm * dm);
  }
  const double n = static_cast<double>(N);
  const double n2 = n * n;
  s += 1.0 / (2.0 * n2) - 1.0 / (2.0 * n2 * n) + 1.0 / (4.0 * n2 * n2) -
       1.0 / (12.0 * n2 * n2 * n2);
  return s;
}

// survival[m] = sum_{k>=m} k^-3 for m in [1, kHeavyTableMax], summed backward
// so each entry is accurate to a few ulps.
const std::vector<double>& heavy_survival_table() {
  static std::vector<double> table;
  static std::once_flag once;
  std::call_once(once, [] {
    table.assign(static_cast<std::size_t>(kHeavyTableMax) + 2, 0.0);
    const double n = static_cast<double>(kHeavyTableMax);
    const double n2 = n * n;
    // Tail beyond the table, same Euler-Maclaurin expansion as above.
    double tail = 1.0 / (2.0 * n2) - 1.0 / (2.0 * n2 * n) +
                  1.0 / (4.0 * n2 * n2) - 1.0 / (12.0 * n2 * n2 * n2);
    table[static_cast<std::size_t>(kHeavyTableMax) + 1] = tail;
    for (std::int64_t m = kHeavyTableMax; m >= 1; --m) {
      const double dm = static_cast<double>(m);
      table[static_cast<std::size_t>(m)] =
          table[static_cast<std::size_t>(m) + 1] + 1.0 / (dm * dm * dm);
    }
  });
  return table;
}

}  // namespace

double zeta3() {
  static const double z = compute_zeta3();
  return z;
}

double heavy_axis_c() { return 0.25 / zeta3(); }

double heavy_axis_pmf(std::int64_t m) {
  if (m < 1) throw StatsError("heavy_axis_pmf: magnitude must be >= 1");
  const double dm = static_cast<double>(m);
  return heavy_axis_c() / (dm * dm * dm);
}

double heavy_axis_survival(std::int64_t m) {
  if (m < 1) return 1.0;
  const auto& table = heavy_survival_table();
  if (m <= kHeavyTableMax) {
    return table[static_cast<std::size_t>(m)] / zeta3();
  }
  const double n = static_cast<double>(m);
  const double n2 = n * n;
  const double tail = 1.0 / (2.0 * n2) - 1.0 / (2.0 * n2 * n) +
                      1.0 / (4.0 * n2 * n2);
  return tail / zeta3();
}

JumpLaw JumpLaw::finite(std::vector<Entry> entries) {
  if (entries.empty()) throw ConfigError("jump law needs at least one entry");
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.p > 0.0)) throw ConfigError("jump probabilities must be positive");
    total += e.p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("jump probabilities must sum to 1 (got " +
                      std::to_string(total) + ")");
  }
  JumpLaw law;
  law.kind_ = Kind::finite_table;
  law.entries_ = std::move(entries);
  law.cdf_.reserve(law.entries_.size());
  double acc = 0.0;
  for (const auto& e : law.entries_) {
    acc += e.p;
    law.cdf_.push_back(acc);
  }
  law.cdf_.back() = 1.0;
  return law;
}

JumpLaw JumpLaw::heavy_axis() {
  heavy_survival_table();  // build eagerly so first sample is cheap
  JumpLaw law;
  law.kind_ = Kind::heavy_axis;
  return law;
}

std::int64_t JumpLaw::support_radius() const {
  if (kind_ != Kind::finite_table) {
    throw StatsError("support_radius: law has unbounded support");
  }
  std::int64_t r = 0;
  for (const auto& e : entries_) r = std::max(r, linf(e.jump));
  return r;
}

double JumpLaw::min_probability() const {
  if (kind_ != Kind::finite_table) {
    throw StatsError("min_probability: law has unbounded support");
  }
  double p = entries_.front().p;
  for (const auto& e : entries_) p = std::min(p, e.p);
  return p;
}

std::int64_t JumpLaw::sample_heavy_magnitude(double u) {
  // Inverse transform on P(M >= m) = survival(m): the sampled magnitude is
  // the largest m with survival(m) > u, i.e. m such that
  // survival(m+1) <= u < survival(m).
  const auto& table = heavy_survival_table();
  const double z3 = zeta3();
  const double target = u * z3;  // unnormalized
  // The head holds almost all mass (P(M <= 8) ~ 0.997); scan it linearly.
  if (target >= table[9]) {
    std::int64_t m = 1;
    while (table[static_cast<std::size_t>(m) + 1] > target) ++m;
    return m;
  }
  if (target > table[static_cast<std::size_t>(kHeavyTableMax) + 1]) {
    // Binary search over the decreasing table for the largest index lo with
    // table[lo] > target; that index is the magnitude.
    std::size_t lo = 9, hi = static_cast<std::size_t>(kHeavyTableMax) + 1;
    while (lo + 1 < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (table[mid] > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return static_cast<std::int64_t>(lo);
  }
  // Beyond the table (mass ~4e-13): survival(m) ~ 1/(2 m^2), invert.
  const double m = std::min(std::sqrt(0.5 / std::max(target, 1e-300)), 1e15);
  return std::max<std::int64_t>(kHeavyTableMax + 1,
                                static_cast<std::int64_t>(std::llround(m)));
}

}  // namespace lorentzlab::walk

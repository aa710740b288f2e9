#include "lorentzlab/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "lorentzlab/errors.hpp"

namespace lorentzlab::lorentz {

namespace {

constexpr double kCoverTol = 1e-12;  // gaps below this are tangency artifacts, not corridors

struct Interval {
  double lo;
  double hi;
};

// Gaps left on the circle R/(period Z) by the union of intervals.
std::vector<Interval> circle_gaps(std::vector<Interval> iv, double period) {
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> gaps;
  const double start = iv.front().lo;
  double covered_to = iv.front().hi;
  for (std::size_t i = 1; i < iv.size(); ++i) {
    if (iv[i].lo > covered_to + kCoverTol) {
      gaps.push_back({covered_to, iv[i].lo});
    }
    covered_to = std::max(covered_to, iv[i].hi);
    if (covered_to >= start + period) break;
  }
  if (covered_to < start + period - kCoverTol) {
    gaps.push_back({covered_to, start + period});
  }
  return gaps;
}

}  // namespace

HorizonReport horizon_check(const ScattererTable& table, int max_denominator) {
  if (table.has_patch()) {
    throw ConfigError("horizon_check: certificate is defined for the unpatched periodic table");
  }
  if (max_denominator < 1) {
    throw ConfigError("horizon_check: max_denominator must be at least 1");
  }

  HorizonReport report;
  report.max_denominator = max_denominator;

  // Canonical coprime directions: (1, 0), then q >= 1 with |p| <= D.
  std::vector<std::pair<int, int>> directions;
  directions.emplace_back(1, 0);
  for (int q = 1; q <= max_denominator; ++q) {
    for (int p = -max_denominator; p <= max_denominator; ++p) {
      if (std::gcd(std::abs(p), q) == 1) directions.emplace_back(p, q);
    }
  }

  for (auto [p, q] : directions) {
    const double len = std::sqrt(static_cast<double>(p) * p + static_cast<double>(q) * q);
    const double period = 1.0 / len;
    const Vec2 w{-q / len, p / len};

    bool covered_by_one = false;
    std::vector<Interval> intervals;
    for (const Disk& d : table.cell_disks()) {
      if (2.0 * d.radius >= period - kCoverTol) {
        covered_by_one = true;
        break;
      }
      // Normalize the interval's *low* endpoint into [0, period) and
      // duplicate one period up: every circle point in the sweep window
      // [min lo, min lo + period) then sees each covering interval through
      // one of its two copies.
      double lo = std::fmod(geom::dot(d.center, w) - d.radius, period);
      if (lo < 0.0) lo += period;
      intervals.push_back({lo, lo + 2.0 * d.radius});
      intervals.push_back({lo + period, lo + 2.0 * d.radius + period});
    }
    if (covered_by_one) continue;

    for (const Interval& gap : circle_gaps(intervals, period)) {
      Corridor c;
      c.p = p;
      c.q = q;
      c.width = gap.hi - gap.lo;
      double mid = std::fmod(0.5 * (gap.lo + gap.hi), period);
      if (mid < 0.0) mid += period;
      c.offset = mid;
      report.corridors.push_back(c);
    }
  }

  report.finite = report.corridors.empty();
  return report;
}

double direction_coverage_slack(const ScattererTable& table, int p, int q) {
  if (table.has_patch()) {
    throw ConfigError("direction_coverage_slack: unpatched tables only");
  }
  if (p == 0 && q == 0) {
    throw ConfigError("direction_coverage_slack: zero direction");
  }
  if (std::gcd(std::abs(p), std::abs(q)) != 1) {
    throw ConfigError("direction_coverage_slack: direction must be coprime");
  }
  const double len = std::sqrt(static_cast<double>(p) * p + static_cast<double>(q) * q);
  const double period = 1.0 / len;
  const Vec2 w{-q / len, p / len};

  // Tent functions on the offset circle: tent i has peak radius_i at the
  // projected center s_i and slopes -1/+1.  The coverage slack is the minimum
  // of their upper envelope; with slopes +-1 that minimum sits either at a
  // descending/ascending crossing of two tents or at the antipode of a tent
  // that covers the whole circle, so evaluating the envelope at every
  // crossing candidate (plus antipodes) is exact.
  struct Tent {
    double s;
    double r;
  };
  std::vector<Tent> tents;
  for (const Disk& d : table.cell_disks()) {
    double s = std::fmod(geom::dot(d.center, w), period);
    if (s < 0.0) s += period;
    tents.push_back({s, d.radius});
  }
  const auto circ_dist = [&](double a, double b) {
    double diff = std::fmod(std::abs(a - b), period);
    return std::min(diff, period - diff);
  };
  const auto envelope = [&](double x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Tent& t : tents) best = std::max(best, t.r - circ_dist(x, t.s));
    return best;
  };
  std::vector<double> candidates;
  for (const Tent& a : tents) {
    candidates.push_back(a.s + 0.5 * period);
    candidates.push_back(a.s - a.r);
    candidates.push_back(a.s + a.r);
    for (const Tent& b : tents) {
      // Crossing of a's descending edge with b's ascending edge, both
      // branches of the circular offset between the peaks.
      candidates.push_back(0.5 * (a.s + b.s + a.r - b.r));
      candidates.push_back(0.5 * (a.s + b.s + period + a.r - b.r));
    }
  }
  double slack = std::numeric_limits<double>::infinity();
  for (double c : candidates) slack = std::min(slack, envelope(c));
  return slack;
}

std::optional<double> certified_flight_bound(const ScattererTable& table,
                                             int max_denominator_cap) {
  if (table.has_patch()) {
    throw ConfigError("certified_flight_bound: unpatched tables only");
  }
  // A free segment of length L and any direction u: Dirichlet approximation
  // yields a coprime d = (p, q), max(|p|,|q|) <= D, with |sin angle(u, d)| <=
  // 1/(D |d|).  If direction d is covered with slack sigma(d), copies of the
  // blocking disk recur every |d| along the line, so once L >= 2 (|d| + 1)
  // (reach, with angle margin) while the transverse drift L/(D |d|) stays <=
  // sigma/2, the segment must hit a disk.  Requiring
  //   sigma(d) >= 4 (|d| + 1) / (D |d|)   for every d in the family
  // makes the drift condition hold up to L = 2 (|d| + 1), hence no free
  // segment reaches length 2 (sqrt(2) D + 1).
  for (int d_cap : {25, 50, 100, 150, 200, 300, 400, 600, 800}) {
    if (d_cap > max_denominator_cap) break;
    bool ok = true;
    std::vector<std::pair<int, int>> directions;
    directions.emplace_back(1, 0);
    for (int q = 1; q <= d_cap && ok; ++q) {
      for (int p = -d_cap; p <= d_cap; ++p) {
        if (std::gcd(std::abs(p), q) != 1) continue;
        directions.emplace_back(p, q);
      }
    }
    for (auto [p, q] : directions) {
      const double len =
          std::sqrt(static_cast<double>(p) * p + static_cast<double>(q) * q);
      const double need = 4.0 * (len + 1.0) / (static_cast<double>(d_cap) * len);
      if (direction_coverage_slack(table, p, q) < need) {
        ok = false;
        break;
      }
    }
    if (ok) {
      return 2.0 * (std::sqrt(2.0) * static_cast<double>(d_cap) + 1.0);
    }
  }
  return std::nullopt;
}

}  // namespace lorentzlab::lorentz

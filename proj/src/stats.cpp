#include "lorentzlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace lorentzlab::stats {

CovarianceMatrix endpoint_covariance(const EnsembleSummary& summary) {
  return summary.endpoint.covariance();
}

std::vector<double> exact_return_law(const walk::JumpLaw& law,
                                     std::uint64_t n_max) {
  if (law.kind() != walk::JumpLaw::Kind::finite_table) {
    throw StatsError("exact_return_law: law must have finite support");
  }
  const std::int64_t r = law.support_radius();
  if (r < 1) throw StatsError("exact_return_law: law never moves");
  if (n_max * static_cast<std::uint64_t>(r) > 4096) {
    throw StatsError(
        "exact_return_law: memory guard n_max * support_radius <= 4096");
  }
  const std::int64_t K = static_cast<std::int64_t>(n_max) * r;
  const std::int64_t W = 2 * K + 1;
  if (W * W > 26'000'000) {
    throw StatsError("exact_return_law: reachable box exceeds memory guard");
  }
  std::vector<double> cur(static_cast<std::size_t>(W * W), 0.0);
  std::vector<double> next(static_cast<std::size_t>(W * W), 0.0);
  const auto idx = [&](std::int64_t x, std::int64_t y) {
    return static_cast<std::size_t>((y + K) * W + (x + K));
  };
  cur[idx(0, 0)] = 1.0;
  std::vector<double> out(n_max + 1, 0.0);
  out[0] = 1.0;
  std::int64_t reach = 0;
  for (std::uint64_t k = 1; k <= n_max; ++k) {
    const std::int64_t next_reach = std::min<std::int64_t>(reach + r, K);
    for (std::int64_t y = -next_reach; y <= next_reach; ++y) {
      std::fill(next.begin() + idx(-next_reach, y),
                next.begin() + idx(next_reach, y) + 1, 0.0);
    }
    for (const auto& e : law.entries()) {
      for (std::int64_t y = -reach; y <= reach; ++y) {
        const std::size_t row = idx(-reach, y);
        const std::size_t dst = idx(-reach + e.jump.x, y + e.jump.y);
        for (std::int64_t i = 0; i <= 2 * reach; ++i) {
          next[dst + static_cast<std::size_t>(i)] +=
              e.p * cur[row + static_cast<std::size_t>(i)];
        }
      }
    }
    reach = next_reach;
    out[k] = next[idx(0, 0)];
    cur.swap(next);
  }
  return out;
}

std::vector<double> ssrw_return_law(std::uint64_t n_max) {
  std::vector<double> out(n_max + 1, 0.0);
  out[0] = 1.0;
  double q = 1.0;  // C(2m, m) 2^-2m
  for (std::uint64_t m = 1; 2 * m <= n_max; ++m) {
    const double dm = static_cast<double>(m);
    q *= (2.0 * dm - 1.0) / (2.0 * dm);
    out[2 * m] = q * q;
  }
  return out;
}

double one_d_central_probability(std::uint64_t n) {
  if (n % 2 == 1) return 0.0;
  double q = 1.0;
  for (std::uint64_t m = 1; 2 * m <= n; ++m) {
    const double dm = static_cast<double>(m);
    q *= (2.0 * dm - 1.0) / (2.0 * dm);
  }
  return q;
}

std::vector<double> truncated_green(const std::vector<double>& return_law) {
  std::vector<double> out(return_law.size(), 0.0);
  Kahan acc;
  for (std::size_t i = 0; i < return_law.size(); ++i) {
    acc.add(return_law[i]);
    out[i] = acc.value();
  }
  return out;
}

double least_squares_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw StatsError("least_squares_slope: need >= 2 paired points");
  }
  const double n = static_cast<double>(xs.size());
  Kahan sx, sy, sxx, sxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx.add(xs[i]);
    sy.add(ys[i]);
    sxx.add(xs[i] * xs[i]);
    sxy.add(xs[i] * ys[i]);
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  const double denom = sxx.value() - n * mx * mx;
  if (!(denom > 0.0)) throw StatsError("least_squares_slope: degenerate xs");
  return (sxy.value() - n * mx * my) / denom;
}

double green_log_slope(const std::vector<double>& green, std::uint64_t n_lo,
                       std::uint64_t n_hi) {
  if (n_hi >= green.size() || n_lo >= n_hi) {
    throw StatsError("green_log_slope: range outside the computed law");
  }
  std::vector<double> xs, ys;
  for (std::uint64_t n = n_lo + (n_lo % 2); n <= n_hi; n += 2) {
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(green[n]);
  }
  return least_squares_slope(xs, ys);
}

double green_increment_sum_3d(std::uint64_t n_lo, std::uint64_t n_hi) {
  Kahan acc;
  double q = 1.0;
  for (std::uint64_t m = 1; 2 * m <= n_hi; ++m) {
    const double dm = static_cast<double>(m);
    q *= (2.0 * dm - 1.0) / (2.0 * dm);
    if (2 * m >= n_lo) acc.add(q * q * q);
  }
  return acc.value();
}

namespace {

template <typename State, typename InsideFn>
ReturnStats count_reentries(const State& states, InsideFn inside) {
  ReturnStats rs;
  if (states.empty()) return rs;
  bool prev_inside = inside(states[0]);
  for (std::size_t j = 1; j < states.size(); ++j) {
    const bool now = inside(states[j]);
    if (now && !prev_inside) {
      ++rs.returns;
      if (!rs.first_return) rs.first_return = static_cast<std::uint64_t>(j);
    }
    prev_inside = now;
  }
  return rs;
}

}  // namespace

ReturnStats return_statistics(const std::vector<walk::Site>& path) {
  return count_reentries(
      path, [](walk::Site s) { return s.x == 0 && s.y == 0; });
}

ReturnStats return_statistics(const std::vector<geom::Vec2>& points,
                              double ball_radius) {
  if (!(ball_radius > 0.0)) {
    throw StatsError("return_statistics: continuous paths need radius > 0");
  }
  const double r2 = ball_radius * ball_radius;
  return count_reentries(
      points, [r2](geom::Vec2 p) { return geom::norm2(p) <= r2; });
}

KsResult gaussian_marginal_test(std::vector<double> samples, double variance) {
  if (samples.size() < 1000) {
    throw StatsError("gaussian_marginal_test: need >= 1e3 samples");
  }
  if (!(variance > 0.0)) {
    throw StatsError("gaussian_marginal_test: degenerate variance");
  }
  std::sort(samples.begin(), samples.end());
  const double sd = std::sqrt(variance);
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = normal_cdf(samples[i] / sd);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  KsResult r;
  r.statistic = d;
  r.threshold = 1.628 / std::sqrt(n);
  r.pass = d < r.threshold;
  r.count = samples.size();
  return r;
}

double llt_origin_estimate(std::uint64_t at_origin, std::uint64_t count,
                           std::uint64_t time, bool require_even) {
  if (require_even && time % 2 == 1) {
    throw StatsError("llt_origin_estimate: parity violation (odd time)");
  }
  if (count < 100'000) {
    throw StatsError("llt_origin_estimate: ensemble too small (need 1e5)");
  }
  return static_cast<double>(time) * static_cast<double>(at_origin) /
         static_cast<double>(count);
}

HillResult hill_tail_index(std::vector<double> magnitudes,
                           double top_fraction) {
  if (magnitudes.size() < 10'000) {
    throw StatsError("hill_tail_index: need >= 1e4 samples");
  }
  if (!(top_fraction > 0.0) || top_fraction > 0.05) {
    throw StatsError("hill_tail_index: top_fraction must lie in (0, 0.05]");
  }
  const auto k = static_cast<std::size_t>(
      static_cast<double>(magnitudes.size()) * top_fraction);
  if (k < 2 || k + 1 > magnitudes.size()) {
    throw StatsError("hill_tail_index: insufficient tail data");
  }
  std::partial_sort(magnitudes.begin(), magnitudes.begin() + k + 1,
                    magnitudes.end(), std::greater<double>());
  const double xk1 = magnitudes[k];
  if (!(xk1 > 0.0)) throw StatsError("hill_tail_index: nonpositive magnitude");
  Kahan acc;
  for (std::size_t i = 0; i < k; ++i) acc.add(std::log(magnitudes[i] / xk1));
  HillResult hr;
  hr.k = k;
  hr.order_threshold = xk1;
  const double s = acc.value();
  hr.alpha = s > 0.0 ? static_cast<double>(k) / s
                     : std::numeric_limits<double>::infinity();
  hr.non_heavy_warning = !(hr.alpha <= 3.0);
  return hr;
}

FddResult fdd_covariance(const EnsembleSummary& summary, double scale) {
  if (!summary.plan.cross) {
    throw StatsError("fdd_covariance: summary lacks a cross-moment block");
  }
  if (!(scale > 0.0)) throw StatsError("fdd_covariance: scale must be > 0");
  const Snapshot* lo = nullptr;
  const Snapshot* hi = nullptr;
  for (const auto& s : summary.snapshots) {
    if (s.time == summary.plan.cross_lo) lo = &s;
    if (s.time == summary.plan.cross_hi) hi = &s;
  }
  if (lo == nullptr || hi == nullptr) {
    throw StatsError("fdd_covariance: cross times missing from snapshots");
  }
  const std::uint64_t n = summary.cross.n;
  if (n < 2 || lo->moments.n != n || hi->moments.n != n) {
    throw StatsError("fdd_covariance: insufficient or inconsistent data");
  }
  const double dn = static_cast<double>(n);
  const double s2 = scale * scale;
  const geom::Vec2 mlo = lo->moments.mean();
  const geom::Vec2 mhi = hi->moments.mean();
  FddResult r;
  r.time_lo = summary.plan.cross_lo;
  r.time_hi = summary.plan.cross_hi;
  const auto unbias = [&](double raw_sum, double ma, double mb) {
    return (raw_sum - dn * ma * mb) / (dn - 1.0) / s2;
  };
  r.cross.xx = unbias(summary.cross.xx.value(), mlo.x, mhi.x);
  r.cross.xy = unbias(summary.cross.xy.value(), mlo.x, mhi.y);
  r.cross.yx = unbias(summary.cross.yx.value(), mlo.y, mhi.x);
  r.cross.yy = unbias(summary.cross.yy.value(), mlo.y, mhi.y);
  SymMat2 clo = lo->moments.covariance();
  SymMat2 chi = hi->moments.covariance();
  r.cov_lo = {clo.xx / s2, clo.xy / s2, clo.yy / s2};
  r.cov_hi = {chi.xx / s2, chi.xy / s2, chi.yy / s2};
  return r;
}

Chi2Result chi2_gof(const std::vector<std::uint64_t>& observed,
                    const std::vector<double>& probs) {
  if (observed.size() != probs.size() || observed.size() < 2) {
    throw StatsError("chi2_gof: need matching cell counts and probabilities");
  }
  double psum = 0.0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw StatsError("chi2_gof: negative probability");
    psum += probs[i];
    total += observed[i];
  }
  if (std::abs(psum - 1.0) > 1e-9) {
    throw StatsError("chi2_gof: cell probabilities must sum to 1");
  }
  if (total == 0) throw StatsError("chi2_gof: no observations");
  Kahan stat;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double e = probs[i] * static_cast<double>(total);
    if (e == 0.0) {
      if (observed[i] > 0) {
        return {std::numeric_limits<double>::infinity(),
                observed.size() - 1, 0.0};
      }
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    stat.add(d * d / e);
  }
  Chi2Result r;
  r.statistic = stat.value();
  r.dof = observed.size() - 1;
  r.p_value = gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw StatsError("gamma_q: need a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Lower series: P(a,x) = x^a e^-x / Gamma(a) * sum x^k / (a)_k+1.
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
      term *= x / (a + static_cast<double>(k));
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  // Upper continued fraction (modified Lentz).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefix) * h;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double pareto2_deviate(double u) {
  if (!(u >= 0.0) || !(u < 1.0)) {
    throw StatsError("pareto2_deviate: u must lie in [0, 1)");
  }
  return 1.0 / std::sqrt(1.0 - u);
}

}  // namespace lorentzlab::stats

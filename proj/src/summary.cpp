#include "lorentzlab/summary.hpp"

#include <cmath>

namespace lorentzlab::stats {

std::pair<double, double> SymMat2::eigenvalues() const {
  const double half_tr = 0.5 * (xx + yy);
  const double half_diff = 0.5 * (xx - yy);
  const double r = std::sqrt(half_diff * half_diff + xy * xy);
  return {half_tr - r, half_tr + r};
}

geom::Vec2 Moments2D::mean() const {
  if (n == 0) throw StatsError("mean: no samples");
  const double dn = static_cast<double>(n);
  return {sx.value() / dn, sy.value() / dn};
}

SymMat2 Moments2D::covariance() const {
  if (n < 2) throw StatsError("covariance: insufficient data (n < 2)");
  const double dn = static_cast<double>(n);
  const double mx = sx.value() / dn;
  const double my = sy.value() / dn;
  SymMat2 c;
  c.xx = (sxx.value() - dn * mx * mx) / (dn - 1.0);
  c.xy = (sxy.value() - dn * mx * my) / (dn - 1.0);
  c.yy = (syy.value() - dn * my * my) / (dn - 1.0);
  return c;
}

EnsembleSummary::EnsembleSummary(SummaryPlan p) : plan(std::move(p)) {
  snapshots.reserve(plan.snapshot_times.size());
  for (std::uint64_t t : plan.snapshot_times) {
    Snapshot s;
    s.time = t;
    snapshots.push_back(s);
  }
  if (plan.track_returns) {
    first_return_hist.assign(plan.first_return_cap + 1, 0);
  }
}

void EnsembleSummary::merge(const EnsembleSummary& o) {
  if (!(plan == o.plan)) {
    throw StatsError("summary merge: layouts differ");
  }
  count += o.count;
  complete += o.complete;
  truncated += o.truncated;
  endpoint.merge(o.endpoint);
  endpoints.insert(endpoints.end(), o.endpoints.begin(), o.endpoints.end());
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    snapshots[i].moments.merge(o.snapshots[i].moments);
    snapshots[i].at_origin += o.snapshots[i].at_origin;
  }
  cross.merge(o.cross);
  total_returns += o.total_returns;
  for (std::size_t i = 0; i < first_return_hist.size(); ++i) {
    first_return_hist[i] += o.first_return_hist[i];
  }
  first_return_overflow += o.first_return_overflow;
  no_return += o.no_return;
  for (std::size_t i = 0; i < magnitude_log2.size(); ++i) {
    magnitude_log2[i] += o.magnitude_log2[i];
  }
  total_events += o.total_events;
  if (o.max_length > max_length) max_length = o.max_length;
  tail_values.insert(tail_values.end(), o.tail_values.begin(),
                     o.tail_values.end());
  tail5_count += o.tail5_count;
  tail5_axis += o.tail5_axis;
}

}  // namespace lorentzlab::stats

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lorentzlab/errors.hpp"
#include "lorentzlab/vec2.hpp"

namespace lorentzlab::stats {

// Neumaier-compensated running sum; merging two sums feeds both the sum and
// its compensation through the same error-free transform, so parallel and
// serial aggregation agree to within reassociation error.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  void merge(const Kahan& o) {
    add(o.sum);
    add(o.comp);
  }
  double value() const { return sum + comp; }
};

struct SymMat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * xy; }
  // Ascending eigenvalue pair of the symmetric matrix.
  std::pair<double, double> eigenvalues() const;
};

// First and second moments of a planar sample, compensated.
struct Moments2D {
  std::uint64_t n = 0;
  Kahan sx, sy, sxx, sxy, syy;

  void add(double x, double y) {
    ++n;
    sx.add(x);
    sy.add(y);
    sxx.add(x * x);
    sxy.add(x * y);
    syy.add(y * y);
  }
  void merge(const Moments2D& o) {
    n += o.n;
    sx.merge(o.sx);
    sy.merge(o.sy);
    sxx.merge(o.sxx);
    sxy.merge(o.sxy);
    syy.merge(o.syy);
  }
  geom::Vec2 mean() const;
  SymMat2 covariance() const;  // unbiased; needs n >= 2
};

// Raw cross products between two snapshot times (lo, hi) of the same
// trajectory, for finite-dimensional covariance estimates.
struct CrossMoments {
  std::uint64_t n = 0;
  Kahan xx, xy, yx, yy;  // sums of lo_x*hi_x, lo_x*hi_y, lo_y*hi_x, lo_y*hi_y

  void add(geom::Vec2 lo, geom::Vec2 hi) {
    ++n;
    xx.add(lo.x * hi.x);
    xy.add(lo.x * hi.y);
    yx.add(lo.y * hi.x);
    yy.add(lo.y * hi.y);
  }
  void merge(const CrossMoments& o) {
    n += o.n;
    xx.merge(o.xx);
    xy.merge(o.xy);
    yx.merge(o.yx);
    yy.merge(o.yy);
  }
};

// What a run records.  Two summaries merge only if their plans are identical.
struct SummaryPlan {
  std::vector<std::uint64_t> snapshot_times;  // sorted, unique
  bool cross = false;
  std::uint64_t cross_lo = 0, cross_hi = 0;  // both must be snapshot times
  bool track_returns = false;
  double return_radius = 0.0;           // 0 = exact lattice origin
  std::uint64_t first_return_cap = 1024;
  bool magnitude_hist = false;
  double tail_threshold = -1.0;  // >= 0: record event lengths above it
  bool store_endpoints = false;  // keep raw endpoints (order = merge order)

  bool operator==(const SummaryPlan&) const = default;
};

struct Snapshot {
  std::uint64_t time = 0;
  Moments2D moments;
  std::uint64_t at_origin = 0;  // exact lattice hits (walks)
};

// Mergeable per-ensemble accumulator: endpoint moments, snapshot moments,
// origin returns, magnitude histogram, and the heavy tail of event lengths.
// Merging is associative and commutative field-wise (floating reassociation
// aside); tail_values concatenate in call order, so a fixed merge order keeps
// them deterministic.
struct EnsembleSummary {
  SummaryPlan plan;

  std::uint64_t count = 0;     // trajectories accumulated
  std::uint64_t complete = 0;  // trajectories contributing endpoint moments
  std::uint64_t truncated = 0;
  Moments2D endpoint;
  std::vector<geom::Vec2> endpoints;  // raw values, only if plan.store_endpoints
  std::vector<Snapshot> snapshots;
  CrossMoments cross;

  std::uint64_t total_returns = 0;
  std::vector<std::uint64_t> first_return_hist;  // index = first return step
  std::uint64_t first_return_overflow = 0;
  std::uint64_t no_return = 0;

  // Event-length histogram: bin 32 + floor(log2(value)), clamped.
  std::array<std::uint64_t, 64> magnitude_log2{};
  std::uint64_t total_events = 0;
  double max_length = 0.0;

  std::vector<double> tail_values;
  std::uint64_t tail5_count = 0;  // events with length > 5
  std::uint64_t tail5_axis = 0;   // of those, direction within 0.1 rad of axis

  explicit EnsembleSummary(SummaryPlan p);
  EnsembleSummary() = default;

  void merge(const EnsembleSummary& o);

  void record_event_length(double value) {
    ++total_events;
    if (value > max_length) max_length = value;
    if (plan.magnitude_hist) {
      int b = 32 + static_cast<int>(std::floor(std::log2(value)));
      if (b < 0) b = 0;
      if (b > 63) b = 63;
      ++magnitude_log2[static_cast<std::size_t>(b)];
    }
    if (plan.tail_threshold >= 0.0 && value > plan.tail_threshold) {
      tail_values.push_back(value);
    }
  }

  // Flight variant: also classifies lengths > 5 by direction, counting those
  // within 0.1 rad of a coordinate axis.  `direction` must be unit length.
  void record_flight(double value, geom::Vec2 direction) {
    record_event_length(value);
    if (value > 5.0) {
      ++tail5_count;
      const double ax = std::abs(direction.x);
      const double ay = std::abs(direction.y);
      const double off = std::atan2(std::min(ax, ay), std::max(ax, ay));
      if (off <= 0.1) ++tail5_axis;
    }
  }
};

}  // namespace lorentzlab::stats

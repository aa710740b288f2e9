#include "lorentzlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lorentzlab/horizon.hpp"
#include "lorentzlab/io_util.hpp"
#include "lorentzlab/lorentz.hpp"
#include "lorentzlab/stats.hpp"
#include "lorentzlab/version.hpp"
#include "lorentzlab/walk.hpp"

namespace lorentzlab::harness {

namespace {

using nlohmann::json;

constexpr std::uint64_t kBlock = 64;
constexpr double kInvPi = 0.31830988618379067;

const stats::Snapshot& snapshot_at(const stats::EnsembleSummary& s, std::uint64_t t) {
  for (const auto& snap : s.snapshots) {
    if (snap.time == t) return snap;
  }
  throw StatsError("no snapshot recorded at time " + std::to_string(t));
}

// Streams one walk trajectory into a summary; identical call sequence for
// live simulation and dump replay, so both produce bit-identical summaries.
class WalkFeed {
 public:
  WalkFeed(const stats::SummaryPlan& plan, stats::EnsembleSummary& out)
      : plan_(plan), out_(out) {
    record_events_ = plan.magnitude_hist || plan.tail_threshold >= 0.0;
  }

  void step(std::uint64_t k, walk::Site s) {
    if (record_events_) {
      const double dx = static_cast<double>(s.x - prev_.x);
      const double dy = static_cast<double>(s.y - prev_.y);
      out_.record_event_length(std::sqrt(dx * dx + dy * dy));
    }
    const bool at_origin = s.x == 0 && s.y == 0;
    if (plan_.track_returns) {
      if (at_origin && !was_inside_) {
        ++out_.total_returns;
        if (!returned_) {
          returned_ = true;
          first_return_ = k;
        }
      }
      was_inside_ = at_origin;
    }
    while (snap_idx_ < plan_.snapshot_times.size() && plan_.snapshot_times[snap_idx_] == k) {
      auto& snap = out_.snapshots[snap_idx_];
      const double x = static_cast<double>(s.x);
      const double y = static_cast<double>(s.y);
      snap.moments.add(x, y);
      if (at_origin) ++snap.at_origin;
      if (plan_.cross && k == plan_.cross_lo) cross_lo_ = {x, y};
      if (plan_.cross && k == plan_.cross_hi) cross_hi_ = {x, y};
      ++snap_idx_;
    }
    prev_ = s;
  }

  void finish() {
    ++out_.count;
    ++out_.complete;
    const double x = static_cast<double>(prev_.x);
    const double y = static_cast<double>(prev_.y);
    out_.endpoint.add(x, y);
    if (plan_.store_endpoints) out_.endpoints.push_back({x, y});
    if (plan_.cross) out_.cross.add(cross_lo_, cross_hi_);
    if (plan_.track_returns) {
      if (!returned_) {
        ++out_.no_return;
      } else if (first_return_ <= plan_.first_return_cap) {
        ++out_.first_return_hist[first_return_];
      } else {
        ++out_.first_return_overflow;
      }
    }
  }

 private:
  const stats::SummaryPlan& plan_;
  stats::EnsembleSummary& out_;
  bool record_events_ = false;
  walk::Site prev_{0, 0};
  std::size_t snap_idx_ = 0;
  bool was_inside_ = true;
  bool returned_ = false;
  std::uint64_t first_return_ = 0;
  geom::Vec2 cross_lo_{0, 0}, cross_hi_{0, 0};
};

// Lorentz counterpart of WalkFeed, indexed by collision number.
class LorentzFeed {
 public:
  LorentzFeed(const stats::SummaryPlan& plan, stats::EnsembleSummary& out)
      : plan_(plan), out_(out) {}

  void start(const lorentz::PhasePoint& init) {
    q0_ = init.q;
    incoming_ = init.v;
    last_q_ = init.q;
    if (plan_.track_returns) was_inside_ = geom::norm(init.q) <= plan_.return_radius;
  }

  void event(std::uint64_t j, const lorentz::TrajectoryEvent& e) {
    out_.record_flight(e.flight_length, incoming_);
    incoming_ = e.v;
    last_q_ = e.q;
    if (plan_.track_returns) {
      const bool inside = geom::norm(e.q) <= plan_.return_radius;
      if (inside && !was_inside_) {
        ++out_.total_returns;
        if (!returned_) {
          returned_ = true;
          first_return_ = j;
        }
      }
      was_inside_ = inside;
    }
    while (snap_idx_ < plan_.snapshot_times.size() && plan_.snapshot_times[snap_idx_] == j) {
      auto& snap = out_.snapshots[snap_idx_];
      const double x = e.q.x - q0_.x;
      const double y = e.q.y - q0_.y;
      snap.moments.add(x, y);
      if (plan_.cross && j == plan_.cross_lo) cross_lo_ = {x, y};
      if (plan_.cross && j == plan_.cross_hi) cross_hi_ = {x, y};
      ++snap_idx_;
    }
  }

  void finish(bool truncated, double censored_flight) {
    ++out_.count;
    if (truncated) {
      // The censored flight is a real flight at least this long.
      out_.record_flight(censored_flight, incoming_);
      ++out_.truncated;
    } else {
      ++out_.complete;
      const double x = last_q_.x - q0_.x;
      const double y = last_q_.y - q0_.y;
      out_.endpoint.add(x, y);
      if (plan_.store_endpoints) out_.endpoints.push_back({x, y});
      if (plan_.cross) out_.cross.add(cross_lo_, cross_hi_);
    }
    if (plan_.track_returns) {
      if (!returned_) {
        ++out_.no_return;
      } else if (first_return_ <= plan_.first_return_cap) {
        ++out_.first_return_hist[first_return_];
      } else {
        ++out_.first_return_overflow;
      }
    }
  }

 private:
  const stats::SummaryPlan& plan_;
  stats::EnsembleSummary& out_;
  geom::Vec2 q0_{0, 0};
  geom::Vec2 incoming_{1, 0};
  geom::Vec2 last_q_{0, 0};
  std::size_t snap_idx_ = 0;
  bool was_inside_ = false;
  bool returned_ = false;
  std::uint64_t first_return_ = 0;
  geom::Vec2 cross_lo_{0, 0}, cross_hi_{0, 0};
};

std::string walk_dump_line(std::uint64_t traj, std::uint64_t k, walk::Site s) {
  json j;
  j["traj"] = traj;
  j["k"] = k;
  j["x"] = s.x;
  j["y"] = s.y;
  return j.dump() + "\n";
}

std::string lorentz_dump_line(std::uint64_t traj, std::uint64_t idx, geom::Vec2 q, geom::Vec2 v,
                              double flight) {
  json j;
  j["traj"] = traj;
  j["j"] = idx;
  j["qx"] = q.x;
  j["qy"] = q.y;
  j["vx"] = v.x;
  j["vy"] = v.y;
  j["flight"] = flight;
  return j.dump() + "\n";
}

struct TrajectoryContext {
  const ExperimentConfig* cfg = nullptr;
  const stats::SummaryPlan* plan = nullptr;
  const walk::WalkSpec* walk_spec = nullptr;
  const lorentz::ScattererTable* table = nullptr;
};

void run_one_trajectory(const TrajectoryContext& ctx, std::uint64_t i,
                        stats::EnsembleSummary& out, std::string* dump) {
  const ExperimentConfig& cfg = *ctx.cfg;
  Rng rng(trajectory_stream(cfg.seed, i));
  if (cfg.is_walk()) {
    WalkFeed feed(*ctx.plan, out);
    if (dump) *dump += walk_dump_line(i, 0, walk::Site{0, 0});
    walk::walk_evolve(*ctx.walk_spec, cfg.length, rng, [&](std::uint64_t k, walk::Site s) {
      feed.step(k, s);
      if (dump) *dump += walk_dump_line(i, k, s);
    });
    feed.finish();
  } else {
    const LorentzModel& lm = cfg.lorentz_model();
    const lorentz::PhasePoint init = lorentz::sample_initial(*ctx.table, lm.region, rng);
    LorentzFeed feed(*ctx.plan, out);
    feed.start(init);
    if (dump) *dump += lorentz_dump_line(i, 0, init.q, init.v, 0.0);
    std::optional<double> censored = lorentz::lorentz_flow(
        init, *ctx.table, cfg.length, lm.max_flight,
        [&](std::uint64_t j, const lorentz::TrajectoryEvent& e) {
          feed.event(j, e);
          if (dump) *dump += lorentz_dump_line(i, j, e.q, e.v, e.flight_length);
        });
    feed.finish(censored.has_value(), censored.value_or(0.0));
    if (dump && censored.has_value()) {
      json j;
      j["traj"] = i;
      j["censored"] = *censored;
      *dump += j.dump() + "\n";
    }
  }
}

// Scaled covariance helper.
stats::SymMat2 scaled(stats::SymMat2 m, double scale) {
  const double s2 = scale * scale;
  m.xx /= s2;
  m.xy /= s2;
  m.yy /= s2;
  return m;
}

void push(AnalysisOutcome& o, const std::string& k, double v) { o.values.emplace_back(k, v); }

void note(AnalysisOutcome& o, const std::string& k, const std::string& v) {
  o.notes.emplace_back(k, v);
}

AnalysisOutcome eval_endpoint_covariance(const ExperimentConfig& cfg, const AnalysisSpec& a,
                                         const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "endpoint_covariance";
  if (s.complete < 2) {
    o.checked = true;
    o.pass = false;
    note(o, "error", "fewer than 2 complete trajectories");
    return o;
  }
  const stats::SymMat2 cov = scaled(stats::endpoint_covariance(s), cfg.scale_factor());
  const auto eig = cov.eigenvalues();
  push(o, "cov_xx", cov.xx);
  push(o, "cov_xy", cov.xy);
  push(o, "cov_yy", cov.yy);
  push(o, "eigen_lo", eig.first);
  push(o, "eigen_hi", eig.second);
  push(o, "complete", static_cast<double>(s.complete));
  o.checked = a.has_expect || a.offdiag_tol > 0.0;
  if (a.has_expect) {
    const bool okx = std::abs(cov.xx - a.expect_a) <= a.rel_tol * a.expect_a;
    const bool oky = std::abs(cov.yy - a.expect_b) <= a.rel_tol * a.expect_b;
    push(o, "target_xx", a.expect_a);
    push(o, "target_yy", a.expect_b);
    push(o, "rel_tol", a.rel_tol);
    if (!(okx && oky)) o.pass = false;
  }
  if (a.offdiag_tol > 0.0) {
    const double ref = a.has_expect ? 0.5 * (a.expect_a + a.expect_b) : 0.5 * (cov.xx + cov.yy);
    push(o, "offdiag_limit", a.offdiag_tol * ref);
    if (!(std::abs(cov.xy) <= a.offdiag_tol * ref)) o.pass = false;
  }
  return o;
}

AnalysisOutcome eval_endpoint_mean(const ExperimentConfig& cfg, const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "endpoint_mean";
  if (s.complete == 0) {
    note(o, "error", "no complete trajectories");
    return o;
  }
  const geom::Vec2 m = s.endpoint.mean();
  const double scale = cfg.scale_factor();
  push(o, "mean_x", m.x / scale);
  push(o, "mean_y", m.y / scale);
  return o;
}

AnalysisOutcome eval_gaussian_marginal(const ExperimentConfig& cfg, const AnalysisSpec& a,
                                       const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "gaussian_marginal";
  o.checked = true;
  const double scale = cfg.scale_factor();
  std::vector<double> samples;
  samples.reserve(s.endpoints.size());
  for (const auto& p : s.endpoints) {
    samples.push_back((a.component == 'x' ? p.x : p.y) / scale);
  }
  const stats::KsResult ks = stats::gaussian_marginal_test(std::move(samples), a.variance);
  push(o, "ks_statistic", ks.statistic);
  push(o, "ks_threshold", ks.threshold);
  push(o, "count", static_cast<double>(ks.count));
  push(o, "variance", a.variance);
  note(o, "component", std::string(1, a.component));
  o.pass = ks.pass;
  return o;
}

AnalysisOutcome eval_green_slope(const AnalysisSpec& a) {
  AnalysisOutcome o;
  o.type = "green_slope";
  o.checked = true;
  const std::vector<double> law = stats::ssrw_return_law(a.n_hi);
  const std::vector<double> green = stats::truncated_green(law);
  const double slope = stats::green_log_slope(green, a.n_lo, a.n_hi);
  push(o, "slope", slope);
  push(o, "target", kInvPi);
  push(o, "band", a.band);
  o.pass = std::abs(slope - kInvPi) <= a.band * kInvPi;
  return o;
}

AnalysisOutcome eval_return_law_check(const AnalysisSpec& a, const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "return_law_check";
  o.checked = true;
  const std::uint64_t t_max = *std::max_element(a.times.begin(), a.times.end());
  const std::vector<double> law = stats::ssrw_return_law(t_max);
  for (std::uint64_t t : a.times) {
    const auto& snap = snapshot_at(s, t);
    const double exact = law[t];
    const double emp =
        static_cast<double>(snap.at_origin) / static_cast<double>(snap.moments.n);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(snap.moments.n));
    const std::string suffix = "_" + std::to_string(t);
    push(o, "exact" + suffix, exact);
    push(o, "empirical" + suffix, emp);
    push(o, "limit" + suffix, a.sigma * se);
    if (!(std::abs(emp - exact) <= a.sigma * se)) o.pass = false;
  }
  push(o, "sigma", a.sigma);
  return o;
}

AnalysisOutcome eval_llt_origin(const ExperimentConfig& cfg, const AnalysisSpec& a,
                                const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "llt_origin";
  const auto& snap = snapshot_at(s, a.time);
  const bool even_only = !cfg.walk_model().heavy_jumps();
  const double est =
      stats::llt_origin_estimate(snap.at_origin, snap.moments.n, a.time, even_only);
  push(o, "estimate", est);
  push(o, "time", static_cast<double>(a.time));
  push(o, "at_origin", static_cast<double>(snap.at_origin));
  if (a.has_expect) {
    o.checked = true;
    push(o, "target", a.expect_a);
    push(o, "rel_tol", a.rel_tol);
    o.pass = std::abs(est - a.expect_a) <= a.rel_tol * a.expect_a;
  }
  return o;
}

AnalysisOutcome eval_jump_law_check(const ExperimentConfig& cfg, const AnalysisSpec& a) {
  AnalysisOutcome o;
  o.type = "jump_law_check";
  o.checked = true;
  const walk::WalkSpec spec = cfg.walk_model().build();
  const walk::JumpLaw& law = spec.background;
  Rng rng(auxiliary_stream(cfg.seed, 1));

  const bool heavy = law.kind() == walk::JumpLaw::Kind::heavy_axis;
  double unit_expected = 0.0;
  std::vector<double> probs;
  std::vector<std::uint64_t> counts;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> cell_of;

  if (heavy) {
    // Cells: magnitude 1..8 plus the tail; exact masses from the law.
    unit_expected = 4.0 * walk::heavy_axis_pmf(1);
    for (std::int64_t m = 1; m <= 8; ++m) probs.push_back(4.0 * walk::heavy_axis_pmf(m));
    probs.push_back(walk::heavy_axis_survival(9));
    counts.assign(probs.size(), 0);
  } else {
    const auto& entries = law.entries();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      probs.push_back(entries[e].p);
      cell_of[{entries[e].jump.x, entries[e].jump.y}] = e;
      const double n2 = static_cast<double>(entries[e].jump.x * entries[e].jump.x +
                                            entries[e].jump.y * entries[e].jump.y);
      if (n2 == 1.0) unit_expected += entries[e].p;
    }
    counts.assign(probs.size(), 0);
  }

  std::uint64_t unit = 0;
  for (std::uint64_t i = 0; i < a.samples; ++i) {
    const walk::Site j = law.sample(rng);
    const std::int64_t m = walk::linf(j);
    if (m == 1 && (j.x == 0 || j.y == 0)) ++unit;
    if (heavy) {
      ++counts[static_cast<std::size_t>(std::min<std::int64_t>(m, 9) - 1)];
    } else {
      auto it = cell_of.find({j.x, j.y});
      if (it == cell_of.end()) throw StatsError("sample outside the law's support");
      ++counts[it->second];
    }
  }

  const double n = static_cast<double>(a.samples);
  const double freq = static_cast<double>(unit) / n;
  const double limit = 3.0 * std::sqrt(unit_expected * (1.0 - unit_expected) / n);
  push(o, "unit_freq", freq);
  push(o, "unit_expected", unit_expected);
  push(o, "unit_limit", limit);
  const bool unit_ok = std::abs(freq - unit_expected) <= limit;

  const stats::Chi2Result chi2 = stats::chi2_gof(counts, probs);
  push(o, "chi2_statistic", chi2.statistic);
  push(o, "chi2_dof", static_cast<double>(chi2.dof));
  push(o, "chi2_p", chi2.p_value);
  const bool chi2_ok = chi2.p_value >= 1e-3;

  o.pass = unit_ok && chi2_ok;
  return o;
}

AnalysisOutcome eval_hill_tail(const ExperimentConfig& cfg, const AnalysisSpec& a) {
  AnalysisOutcome o;
  o.type = "hill_tail";
  const walk::WalkSpec spec = cfg.walk_model().build();
  Rng rng(auxiliary_stream(cfg.seed, 2));
  std::vector<double> mags;
  mags.reserve(a.samples);
  for (std::uint64_t i = 0; i < a.samples; ++i) {
    mags.push_back(static_cast<double>(walk::linf(spec.background.sample(rng))));
  }
  const stats::HillResult h = stats::hill_tail_index(std::move(mags), a.top_fraction);
  push(o, "alpha", h.alpha);
  push(o, "k", static_cast<double>(h.k));
  push(o, "order_threshold", h.order_threshold);
  if (h.non_heavy_warning) note(o, "warning", "tail looks lighter than a power law");
  if (a.has_expect) {
    o.checked = true;
    push(o, "target", a.expect_a);
    push(o, "tol", a.tol);
    o.pass = std::abs(h.alpha - a.expect_a) <= a.tol;
  }
  return o;
}

AnalysisOutcome eval_flight_tail(const AnalysisSpec& a, const stats::EnsembleSummary& s,
                                 io::CsvWriter* csv) {
  AnalysisOutcome o;
  o.type = "flight_tail";
  o.checked = true;
  if (s.total_events == 0) {
    o.pass = false;
    note(o, "error", "no flights recorded");
    return o;
  }
  std::vector<double> tail(s.tail_values);
  std::sort(tail.begin(), tail.end());
  const double total = static_cast<double>(s.total_events);

  constexpr int kPoints = 12;
  std::vector<double> lx, ly;
  for (int i = 0; i < kPoints; ++i) {
    const double ell =
        a.ell_lo * std::pow(a.ell_hi / a.ell_lo, static_cast<double>(i) / (kPoints - 1));
    const auto it = std::upper_bound(tail.begin(), tail.end(), ell);
    const std::uint64_t cnt = static_cast<std::uint64_t>(tail.end() - it);
    const double surv = static_cast<double>(cnt) / total;
    if (csv) {
      csv->row({io::format_value(ell), io::format_value(surv), io::format_value(cnt)});
    }
    if (cnt > 0) {
      lx.push_back(std::log(ell));
      ly.push_back(std::log(surv));
    }
  }
  if (lx.size() < 3) {
    o.pass = false;
    note(o, "error", "survival curve too sparse for a slope fit");
    return o;
  }
  const double slope = stats::least_squares_slope(lx, ly);
  push(o, "slope", slope);
  push(o, "slope_lo", a.slope_lo);
  push(o, "slope_hi", a.slope_hi);
  bool ok = slope >= a.slope_lo && slope <= a.slope_hi;

  const double axis_frac = s.tail5_count == 0
                               ? 0.0
                               : static_cast<double>(s.tail5_axis) /
                                     static_cast<double>(s.tail5_count);
  push(o, "long_flights", static_cast<double>(s.tail5_count));
  push(o, "axis_fraction", axis_frac);
  if (a.axis_fraction > 0.0) {
    push(o, "axis_fraction_min", a.axis_fraction);
    if (!(s.tail5_count > 0 && axis_frac > a.axis_fraction)) ok = false;
  }
  o.pass = ok;
  return o;
}

AnalysisOutcome eval_fdd_covariance(const ExperimentConfig& cfg, const AnalysisSpec& a,
                                    const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "fdd_covariance";
  const stats::FddResult r = stats::fdd_covariance(s, cfg.scale_factor());
  push(o, "time_lo", static_cast<double>(r.time_lo));
  push(o, "time_hi", static_cast<double>(r.time_hi));
  push(o, "cov_lo_xx", r.cov_lo.xx);
  push(o, "cov_lo_xy", r.cov_lo.xy);
  push(o, "cov_lo_yy", r.cov_lo.yy);
  push(o, "cov_hi_xx", r.cov_hi.xx);
  push(o, "cov_hi_xy", r.cov_hi.xy);
  push(o, "cov_hi_yy", r.cov_hi.yy);
  push(o, "cross_xx", r.cross.xx);
  push(o, "cross_xy", r.cross.xy);
  push(o, "cross_yx", r.cross.yx);
  push(o, "cross_yy", r.cross.yy);
  if (a.has_expect) {
    o.checked = true;
    push(o, "target_xx", a.expect_a);
    push(o, "target_yy", a.expect_b);
    push(o, "rel_tol", a.rel_tol);
    const double off_ref = a.rel_tol * std::max(a.expect_a, a.expect_b);
    const bool ok = std::abs(r.cross.xx - a.expect_a) <= a.rel_tol * a.expect_a &&
                    std::abs(r.cross.yy - a.expect_b) <= a.rel_tol * a.expect_b &&
                    std::abs(r.cross.xy) <= off_ref && std::abs(r.cross.yx) <= off_ref;
    o.pass = ok;
  }
  return o;
}

AnalysisOutcome eval_return_stats(const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "return_stats";
  push(o, "total_returns", static_cast<double>(s.total_returns));
  push(o, "no_return", static_cast<double>(s.no_return));
  push(o, "returned", static_cast<double>(s.count - s.no_return));
  push(o, "mean_returns", static_cast<double>(s.total_returns) /
                              std::max<double>(1.0, static_cast<double>(s.count)));
  push(o, "first_return_overflow", static_cast<double>(s.first_return_overflow));
  return o;
}

AnalysisOutcome eval_max_flight_bound(const ExperimentConfig& cfg, const AnalysisSpec& a,
                                      const stats::EnsembleSummary& s) {
  AnalysisOutcome o;
  o.type = "max_flight_bound";
  o.checked = true;
  double bound = a.bound;
  if (a.certified) {
    const lorentz::ScattererTable table = cfg.lorentz_model().build();
    const std::optional<double> b = lorentz::certified_flight_bound(table);
    if (!b) {
      o.pass = false;
      note(o, "error", "no certified bound (horizon not certified finite)");
      return o;
    }
    bound = *b;
    note(o, "bound_source", "certified");
  } else {
    note(o, "bound_source", "config");
  }
  push(o, "bound", bound);
  push(o, "max_flight", s.max_length);
  push(o, "total_flights", static_cast<double>(s.total_events));
  o.pass = s.max_length <= bound;
  return o;
}

json outcome_to_json(const AnalysisOutcome& o, std::size_t index) {
  json j;
  j["index"] = index;
  j["type"] = o.type;
  j["checked"] = o.checked;
  j["pass"] = o.pass;
  json vals = json::object();
  for (const auto& [k, v] : o.values) vals[k] = v;
  j["values"] = vals;
  json notes = json::object();
  for (const auto& [k, v] : o.notes) notes[k] = v;
  j["notes"] = notes;
  return j;
}

const char* scaling_name(ScalingKind k) {
  switch (k) {
    case ScalingKind::none: return "none";
    case ScalingKind::diffusive: return "diffusive";
    case ScalingKind::superdiffusive: return "superdiffusive";
  }
  return "none";
}

}  // namespace

stats::SummaryPlan plan_for(const ExperimentConfig& cfg) {
  stats::SummaryPlan plan;
  std::set<std::uint64_t> snaps;
  for (const AnalysisSpec& a : cfg.analyses) {
    switch (a.type) {
      case AnalysisType::return_law_check:
        for (std::uint64_t t : a.times) snaps.insert(t);
        break;
      case AnalysisType::llt_origin:
        snaps.insert(a.time);
        break;
      case AnalysisType::fdd_covariance: {
        const double n = static_cast<double>(cfg.length);
        plan.cross = true;
        plan.cross_lo = static_cast<std::uint64_t>(std::nearbyint(a.frac_lo * n));
        plan.cross_hi = static_cast<std::uint64_t>(std::nearbyint(a.frac_hi * n));
        snaps.insert(plan.cross_lo);
        snaps.insert(plan.cross_hi);
        break;
      }
      case AnalysisType::return_stats:
        plan.track_returns = true;
        plan.return_radius = a.radius;
        break;
      case AnalysisType::flight_tail:
        plan.tail_threshold = std::min(a.ell_lo, 5.0);
        break;
      case AnalysisType::gaussian_marginal:
        plan.store_endpoints = true;
        break;
      default:
        break;
    }
  }
  plan.snapshot_times.assign(snaps.begin(), snaps.end());
  plan.first_return_cap = std::min<std::uint64_t>(1024, cfg.length);
  plan.magnitude_hist = !cfg.is_walk() || cfg.walk_model().heavy_jumps();
  return plan;
}

stats::EnsembleSummary run_ensemble(const ExperimentConfig& cfg, const std::string& out_dir) {
  const stats::SummaryPlan plan = plan_for(cfg);
  const std::uint64_t blocks = (cfg.ensemble + kBlock - 1) / kBlock;
  const bool dumping = cfg.dump == DumpKind::paths;

  TrajectoryContext ctx;
  ctx.cfg = &cfg;
  ctx.plan = &plan;
  walk::WalkSpec spec;
  std::optional<lorentz::ScattererTable> table;
  if (cfg.is_walk()) {
    spec = cfg.walk_model().build();
    ctx.walk_spec = &spec;
  } else {
    table.emplace(cfg.lorentz_model().build());
    ctx.table = &*table;
  }

  std::vector<stats::EnsembleSummary> block_sums(blocks);
  std::vector<std::string> block_dumps(dumping ? blocks : 0);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::string err_msg;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks || failed.load()) break;
      stats::EnsembleSummary local(plan);
      std::string dump;
      const std::uint64_t lo = b * kBlock;
      const std::uint64_t hi = std::min(cfg.ensemble, lo + kBlock);
      for (std::uint64_t i = lo; i < hi; ++i) {
        try {
          run_one_trajectory(ctx, i, local, dumping ? &dump : nullptr);
        } catch (const std::exception& e) {
          {
            std::lock_guard<std::mutex> g(err_mutex);
            if (err_msg.empty()) {
              err_msg = "trajectory " + std::to_string(i) + ": " + e.what();
            }
          }
          failed.store(true);
          return;
        }
      }
      block_sums[b] = std::move(local);
      if (dumping) block_dumps[b] = std::move(dump);
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.workers), blocks));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw Error(err_msg);

  stats::EnsembleSummary total(plan);
  for (std::uint64_t b = 0; b < blocks; ++b) total.merge(block_sums[b]);

  if (dumping) {
    std::string all;
    std::size_t bytes = 0;
    for (const auto& d : block_dumps) bytes += d.size();
    all.reserve(bytes);
    for (const auto& d : block_dumps) all += d;
    io::write_text_file(out_dir + "/paths.jsonl", all);
  }
  return total;
}

stats::EnsembleSummary summarize_dump(const ExperimentConfig& cfg, const std::string& dump_path) {
  const stats::SummaryPlan plan = plan_for(cfg);
  const std::string text = io::read_text_file(dump_path);

  stats::EnsembleSummary total(plan);
  stats::EnsembleSummary block(plan);
  std::uint64_t in_block = 0;
  auto flush_trajectory = [&](bool force_merge_block) {
    ++in_block;
    if (in_block == kBlock || force_merge_block) {
      total.merge(block);
      block = stats::EnsembleSummary(plan);
      in_block = 0;
    }
  };

  std::uint64_t cur = 0;
  bool open = false;
  bool truncated = false;
  double censored = 0.0;
  std::uint64_t expect_k = 0;
  std::optional<WalkFeed> wfeed;
  std::optional<LorentzFeed> lfeed;

  auto close_trajectory = [&] {
    if (!open) return;
    if (cfg.is_walk()) {
      if (expect_k != cfg.length + 1) {
        throw Error("dump: trajectory " + std::to_string(cur) + " has " +
                    std::to_string(expect_k) + " lines, expected " +
                    std::to_string(cfg.length + 1));
      }
      wfeed->finish();
      wfeed.reset();
    } else {
      if (!truncated && expect_k != cfg.length + 1) {
        throw Error("dump: trajectory " + std::to_string(cur) +
                    " is incomplete without a censored marker");
      }
      lfeed->finish(truncated, censored);
      lfeed.reset();
    }
    open = false;
    const bool last = cur + 1 == cfg.ensemble;
    flush_trajectory(last);
    ++cur;
  };

  std::istringstream in(text);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("dump line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    const std::uint64_t traj = j.at("traj").get<std::uint64_t>();
    if (traj != cur) {
      if (traj == cur + 1) {
        close_trajectory();
      }
      if (traj != cur) {
        throw Error("dump line " + std::to_string(line_no) + ": trajectory index " +
                    std::to_string(traj) + " out of order (expected " + std::to_string(cur) +
                    ")");
      }
    }
    if (j.contains("censored")) {
      truncated = true;
      censored = j.at("censored").get<double>();
      continue;
    }
    if (cfg.is_walk()) {
      const std::uint64_t k = j.at("k").get<std::uint64_t>();
      walk::Site s{j.at("x").get<std::int64_t>(), j.at("y").get<std::int64_t>()};
      if (!open) {
        if (k != 0 || s.x != 0 || s.y != 0) {
          throw Error("dump line " + std::to_string(line_no) + ": walk must start at the origin");
        }
        wfeed.emplace(plan, block);
        open = true;
        truncated = false;
        expect_k = 1;
        continue;
      }
      if (k != expect_k) {
        throw Error("dump line " + std::to_string(line_no) + ": step index out of order");
      }
      wfeed->step(k, s);
      ++expect_k;
    } else {
      const std::uint64_t k = j.at("j").get<std::uint64_t>();
      geom::Vec2 q{j.at("qx").get<double>(), j.at("qy").get<double>()};
      geom::Vec2 v{j.at("vx").get<double>(), j.at("vy").get<double>()};
      const double flight = j.at("flight").get<double>();
      if (!open) {
        if (k != 0) {
          throw Error("dump line " + std::to_string(line_no) + ": missing initial event");
        }
        lfeed.emplace(plan, block);
        lfeed->start(lorentz::PhasePoint{q, v});
        open = true;
        truncated = false;
        censored = 0.0;
        expect_k = 1;
        continue;
      }
      if (k != expect_k) {
        throw Error("dump line " + std::to_string(line_no) + ": event index out of order");
      }
      lorentz::TrajectoryEvent e;
      e.q = q;
      e.v = v;
      e.flight_length = flight;
      lfeed->event(k, e);
      ++expect_k;
    }
  }
  close_trajectory();
  if (cur != cfg.ensemble) {
    throw Error("dump: found " + std::to_string(cur) + " trajectories, expected " +
                std::to_string(cfg.ensemble));
  }
  return total;
}

std::vector<AnalysisOutcome> evaluate_analyses(const ExperimentConfig& cfg,
                                               const stats::EnsembleSummary& summary) {
  std::vector<AnalysisOutcome> out;
  out.reserve(cfg.analyses.size());
  for (const AnalysisSpec& a : cfg.analyses) {
    switch (a.type) {
      case AnalysisType::endpoint_covariance:
        out.push_back(eval_endpoint_covariance(cfg, a, summary));
        break;
      case AnalysisType::endpoint_mean:
        out.push_back(eval_endpoint_mean(cfg, summary));
        break;
      case AnalysisType::gaussian_marginal:
        out.push_back(eval_gaussian_marginal(cfg, a, summary));
        break;
      case AnalysisType::green_slope:
        out.push_back(eval_green_slope(a));
        break;
      case AnalysisType::return_law_check:
        out.push_back(eval_return_law_check(a, summary));
        break;
      case AnalysisType::llt_origin:
        out.push_back(eval_llt_origin(cfg, a, summary));
        break;
      case AnalysisType::jump_law_check:
        out.push_back(eval_jump_law_check(cfg, a));
        break;
      case AnalysisType::hill_tail:
        out.push_back(eval_hill_tail(cfg, a));
        break;
      case AnalysisType::flight_tail:
        out.push_back(eval_flight_tail(a, summary, nullptr));
        break;
      case AnalysisType::fdd_covariance:
        out.push_back(eval_fdd_covariance(cfg, a, summary));
        break;
      case AnalysisType::return_stats:
        out.push_back(eval_return_stats(summary));
        break;
      case AnalysisType::max_flight_bound:
        out.push_back(eval_max_flight_bound(cfg, a, summary));
        break;
    }
  }
  return out;
}

std::string resolve_out_dir(const ExperimentConfig& cfg) {
  return cfg.out_dir.empty() ? "out/" + cfg.name : cfg.out_dir;
}

void write_outputs(const ExperimentConfig& cfg, const RunReport& report,
                   const std::string& out_dir) {
  const stats::EnsembleSummary& s = report.summary;
  std::vector<std::string> files;

  {
    io::CsvWriter csv(out_dir + "/summary.csv", {"quantity", "value"});
    auto kv = [&](const char* k, const std::string& v) { csv.row({k, v}); };
    kv("ensemble", io::format_value(cfg.ensemble));
    kv("length", io::format_value(cfg.length));
    kv("scale_factor", io::format_value(cfg.scale_factor()));
    kv("complete", io::format_value(s.complete));
    kv("truncated", io::format_value(s.truncated));
    kv("total_events", io::format_value(s.total_events));
    kv("max_length", io::format_value(s.max_length));
    if (s.complete >= 1) {
      const geom::Vec2 m = s.endpoint.mean();
      kv("endpoint_mean_x", io::format_value(m.x));
      kv("endpoint_mean_y", io::format_value(m.y));
    }
    if (s.complete >= 2) {
      const stats::SymMat2 cov = stats::endpoint_covariance(s);
      kv("endpoint_cov_xx", io::format_value(cov.xx));
      kv("endpoint_cov_xy", io::format_value(cov.xy));
      kv("endpoint_cov_yy", io::format_value(cov.yy));
    }
    if (s.plan.track_returns) {
      kv("total_returns", io::format_value(s.total_returns));
      kv("no_return", io::format_value(s.no_return));
      kv("first_return_overflow", io::format_value(s.first_return_overflow));
    }
    csv.close();
    files.push_back("summary.csv");
  }

  if (!s.snapshots.empty()) {
    io::CsvWriter csv(out_dir + "/snapshots.csv",
                      {"time", "count", "mean_x", "mean_y", "cov_xx", "cov_xy", "cov_yy",
                       "at_origin"});
    for (const auto& snap : s.snapshots) {
      std::vector<std::string> row;
      row.push_back(io::format_value(snap.time));
      row.push_back(io::format_value(snap.moments.n));
      if (snap.moments.n >= 2) {
        const geom::Vec2 m = snap.moments.mean();
        const stats::SymMat2 c = snap.moments.covariance();
        row.push_back(io::format_value(m.x));
        row.push_back(io::format_value(m.y));
        row.push_back(io::format_value(c.xx));
        row.push_back(io::format_value(c.xy));
        row.push_back(io::format_value(c.yy));
      } else {
        for (int i = 0; i < 5; ++i) row.push_back("nan");
      }
      row.push_back(io::format_value(snap.at_origin));
      csv.row(row);
    }
    csv.close();
    files.push_back("snapshots.csv");
  }

  if (s.plan.track_returns) {
    io::CsvWriter csv(out_dir + "/returns.csv", {"first_return_step", "count"});
    for (std::size_t k = 0; k < s.first_return_hist.size(); ++k) {
      if (s.first_return_hist[k] == 0) continue;
      csv.row({io::format_value(static_cast<std::uint64_t>(k)),
               io::format_value(s.first_return_hist[k])});
    }
    csv.close();
    files.push_back("returns.csv");
  }

  if (s.plan.magnitude_hist) {
    io::CsvWriter csv(out_dir + "/magnitudes.csv", {"bin_lo", "bin_hi", "count"});
    for (std::size_t b = 0; b < s.magnitude_log2.size(); ++b) {
      if (s.magnitude_log2[b] == 0) continue;
      const double lo = std::pow(2.0, static_cast<double>(b) - 32.0);
      csv.row({io::format_value(lo), io::format_value(lo * 2.0),
               io::format_value(s.magnitude_log2[b])});
    }
    csv.close();
    files.push_back("magnitudes.csv");
  }

  for (std::size_t i = 0; i < cfg.analyses.size(); ++i) {
    const AnalysisSpec& a = cfg.analyses[i];
    if (a.type == AnalysisType::green_slope) {
      io::CsvWriter csv(out_dir + "/green.csv", {"n", "green", "ln_n"});
      const std::vector<double> law = stats::ssrw_return_law(a.n_hi);
      const std::vector<double> green = stats::truncated_green(law);
      for (std::uint64_t n = a.n_lo + (a.n_lo % 2); n <= a.n_hi; n += 2) {
        csv.row({io::format_value(n), io::format_value(green[n]),
                 io::format_value(std::log(static_cast<double>(n)))});
      }
      csv.close();
      files.push_back("green.csv");
    } else if (a.type == AnalysisType::return_law_check) {
      io::CsvWriter csv(out_dir + "/return_law.csv",
                        {"time", "exact", "empirical", "abs_error", "limit"});
      const std::uint64_t t_max = *std::max_element(a.times.begin(), a.times.end());
      const std::vector<double> law = stats::ssrw_return_law(t_max);
      for (std::uint64_t t : a.times) {
        const auto& snap = snapshot_at(s, t);
        const double exact = law[t];
        const double emp =
            static_cast<double>(snap.at_origin) / static_cast<double>(snap.moments.n);
        const double se =
            std::sqrt(exact * (1.0 - exact) / static_cast<double>(snap.moments.n));
        csv.row({io::format_value(t), io::format_value(exact), io::format_value(emp),
                 io::format_value(std::abs(emp - exact)), io::format_value(a.sigma * se)});
      }
      csv.close();
      files.push_back("return_law.csv");
    } else if (a.type == AnalysisType::flight_tail) {
      io::CsvWriter csv(out_dir + "/flight_survival.csv", {"ell", "survival", "count"});
      (void)eval_flight_tail(a, s, &csv);
      csv.close();
      files.push_back("flight_survival.csv");
    }
  }

  json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["app_version"] = kVersion;
  rep["name"] = cfg.name;
  rep["config_hash"] = config_hash(cfg);
  rep["seed"] = cfg.seed;
  rep["model"] = cfg.is_walk() ? "walk" : "lorentz";
  rep["ensemble"] = cfg.ensemble;
  rep["length"] = cfg.length;
  rep["scaling"] = scaling_name(cfg.scaling);
  json counts;
  counts["complete"] = s.complete;
  counts["truncated"] = s.truncated;
  counts["total_events"] = s.total_events;
  counts["max_length"] = s.max_length;
  rep["counts"] = counts;
  json arr = json::array();
  for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
    arr.push_back(outcome_to_json(report.outcomes[i], i));
  }
  rep["analyses"] = arr;
  rep["overall_pass"] = report.all_passed;
  io::write_text_file(out_dir + "/report.json", rep.dump(2) + "\n");
  files.push_back("report.json");

  if (cfg.dump == DumpKind::paths) files.push_back("paths.jsonl");

  json man;
  man["schema_version"] = kSchemaVersion;
  man["app_version"] = kVersion;
  man["name"] = cfg.name;
  man["config_hash"] = config_hash(cfg);
  man["workers"] = cfg.workers;
  man["overall_pass"] = report.all_passed;
  std::sort(files.begin(), files.end());
  man["files"] = files;
  io::write_text_file(out_dir + "/manifest.json", man.dump(2) + "\n");
}

namespace {

RunReport finish_report(const ExperimentConfig& cfg, stats::EnsembleSummary summary) {
  RunReport report;
  report.summary = std::move(summary);
  report.outcomes = evaluate_analyses(cfg, report.summary);
  for (const AnalysisOutcome& o : report.outcomes) {
    if (o.checked && !o.pass) report.all_passed = false;
  }
  return report;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  const std::string out_dir = resolve_out_dir(cfg);
  io::ensure_directory(out_dir);
  RunReport report = finish_report(cfg, run_ensemble(cfg, out_dir));
  write_outputs(cfg, report, out_dir);
  return report;
}

RunReport analyze_experiment(const ExperimentConfig& cfg) {
  const std::string out_dir = resolve_out_dir(cfg);
  if (cfg.dump != DumpKind::paths) {
    throw ConfigError("analyze needs a config with dump = 'paths'");
  }
  RunReport report = finish_report(cfg, summarize_dump(cfg, out_dir + "/paths.jsonl"));
  write_outputs(cfg, report, out_dir);
  return report;
}

}  // namespace lorentzlab::harness

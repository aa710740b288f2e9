#include "lorentzlab/probes.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "lorentzlab/config.hpp"
#include "lorentzlab/errors.hpp"
#include "lorentzlab/runner.hpp"

namespace lorentzlab::harness {

namespace {

// Pulls a named value out of an outcome; probes only read keys they created.
double value_of(const AnalysisOutcome& o, const std::string& key) {
  for (const auto& [k, v] : o.values) {
    if (k == key) return v;
  }
  throw StatsError("probe: outcome lacks value '" + key + "'");
}

struct ProbeRun {
  stats::EnsembleSummary summary;
  std::vector<AnalysisOutcome> outcomes;
};

ProbeRun run_cfg(const ExperimentConfig& cfg) {
  ProbeRun r;
  r.summary = run_ensemble(cfg, ".");
  r.outcomes = evaluate_analyses(cfg, r.summary);
  return r;
}

std::string ci(double value, double half_width) {
  std::ostringstream ss;
  ss << std::setprecision(4) << std::defaultfloat << value << " +- " << std::setprecision(2)
     << half_width;
  return ss.str();
}

void print_row(std::ostream& out, const std::string& name, const std::string& a,
               const std::string& b) {
  out << "  " << std::left << std::setw(16) << name << std::right << std::setw(22) << a
      << std::setw(22) << b << "\n";
}

// Normal-approximation 95% half-widths for variance and mean estimates.
double var_hw(double var, std::uint64_t n) {
  return 1.96 * var * std::sqrt(2.0 / static_cast<double>(n - 1));
}

ExperimentConfig lorentz_cfg(const std::string& name, LorentzModel model, std::uint64_t ensemble,
                             std::uint64_t length, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.model = std::move(model);
  cfg.ensemble = ensemble;
  cfg.length = length;
  cfg.scaling = ScalingKind::diffusive;
  cfg.seed = seed;
  cfg.workers = 1;
  AnalysisSpec cov;
  cov.type = AnalysisType::endpoint_covariance;
  cfg.analyses.push_back(cov);
  return cfg;
}

void probe_patched_finite_horizon(std::uint64_t seed, std::ostream& out) {
  LorentzModel base;
  base.builtin = LorentzModel::Builtin::finite_horizon_pair;
  LorentzModel patched = base;
  {
    lorentz::PatchOp rm;
    rm.kind = lorentz::PatchOp::Kind::remove_copy;
    patched.patch.push_back(rm);
    lorentz::PatchOp add;
    add.kind = lorentz::PatchOp::Kind::add_disk;
    add.disk = {{0.05, 0.0}, 0.3};
    patched.patch.push_back(add);
  }
  const std::uint64_t M = 1500, N = 300;
  const ProbeRun plain = run_cfg(lorentz_cfg("probe-fh-plain", base, M, N, seed));
  const ProbeRun mod = run_cfg(lorentz_cfg("probe-fh-patched", patched, M, N, seed));

  out << "probe: patched-finite-horizon\n"
      << "environment: finite-horizon pair (R1=0.4, R2=0.25)\n"
      << "patch: remove the cell (0,0) large disk, add disk at (0.05,0) with r=0.3\n"
      << "ensemble " << M << " x " << N << " collisions, seed " << seed
      << ", diffusive scaling\n\n";
  const auto& a = plain.outcomes[0];
  const auto& b = mod.outcomes[0];
  print_row(out, "quantity", "unpatched", "patched");
  print_row(out, "cov_xx", ci(value_of(a, "cov_xx"), var_hw(value_of(a, "cov_xx"), M)),
            ci(value_of(b, "cov_xx"), var_hw(value_of(b, "cov_xx"), M)));
  print_row(out, "cov_yy", ci(value_of(a, "cov_yy"), var_hw(value_of(a, "cov_yy"), M)),
            ci(value_of(b, "cov_yy"), var_hw(value_of(b, "cov_yy"), M)));
  print_row(out, "cov_xy", ci(value_of(a, "cov_xy"), var_hw(0.5 * (value_of(a, "cov_xx") + value_of(a, "cov_yy")), M)),
            ci(value_of(b, "cov_xy"), var_hw(0.5 * (value_of(b, "cov_xx") + value_of(b, "cov_yy")), M)));
  print_row(out, "max_flight", ci(plain.summary.max_length, 0),
            ci(mod.summary.max_length, 0));
  out << "\nreading: a bounded patch must leave the diffusive covariance within noise\n"
      << "of the unpatched table; a drift beyond the intervals would refute locality.\n";
}

void probe_patched_infinite_horizon(std::uint64_t seed, std::ostream& out) {
  LorentzModel base;
  base.builtin = LorentzModel::Builtin::single_disk;
  base.disk_radius = 0.4;
  LorentzModel patched = base;
  {
    lorentz::PatchOp rm;
    rm.kind = lorentz::PatchOp::Kind::remove_copy;
    patched.patch.push_back(rm);
    lorentz::PatchOp add;
    add.kind = lorentz::PatchOp::Kind::add_disk;
    add.disk = {{0.1, 0.1}, 0.25};
    patched.patch.push_back(add);
  }
  const std::uint64_t M = 1000, N = 500;
  auto make = [&](LorentzModel m, const char* nm) {
    ExperimentConfig cfg = lorentz_cfg(nm, std::move(m), M, N, seed);
    AnalysisSpec tail;
    tail.type = AnalysisType::flight_tail;
    tail.ell_lo = 5.0;
    tail.ell_hi = 50.0;
    tail.slope_lo = -10.0;  // report-only bounds: never binding
    tail.slope_hi = 10.0;
    cfg.analyses.push_back(tail);
    return cfg;
  };
  const ProbeRun plain = run_cfg(make(base, "probe-ih-plain"));
  const ProbeRun mod = run_cfg(make(patched, "probe-ih-patched"));

  out << "probe: patched-infinite-horizon\n"
      << "environment: single disk r=0.4 (open corridors)\n"
      << "patch: remove the cell (0,0) disk, add disk at (0.1,0.1) with r=0.25\n"
      << "ensemble " << M << " x " << N << " collisions, seed " << seed << "\n\n";
  const auto& a = plain.outcomes[1];
  const auto& b = mod.outcomes[1];
  print_row(out, "quantity", "unpatched", "patched");
  print_row(out, "tail slope", ci(value_of(a, "slope"), 0), ci(value_of(b, "slope"), 0));
  print_row(out, "axis fraction", ci(value_of(a, "axis_fraction"), 0),
            ci(value_of(b, "axis_fraction"), 0));
  print_row(out, "flights > 5", ci(value_of(a, "long_flights"), 0),
            ci(value_of(b, "long_flights"), 0));
  print_row(out, "max flight", ci(plain.summary.max_length, 0), ci(mod.summary.max_length, 0));
  out << "\nreading: corridors survive any bounded patch, so the survival slope near -2\n"
      << "and the axis alignment of long flights should match across the columns.\n";
}

void probe_heavy_spread(std::uint64_t seed, std::ostream& out) {
  auto make = [&](std::uint64_t n) {
    ExperimentConfig cfg;
    cfg.name = "probe-heavy-spread";
    WalkModel w;
    w.type = WalkModel::Type::heavy_axis;
    cfg.model = w;
    cfg.ensemble = 20000;
    cfg.length = n;
    cfg.scaling = ScalingKind::superdiffusive;
    cfg.seed = seed;
    AnalysisSpec cov;
    cov.type = AnalysisType::endpoint_covariance;
    cfg.analyses.push_back(cov);
    return cfg;
  };
  const std::uint64_t n1 = 4096, n2 = 16384;
  const ProbeRun r1 = run_cfg(make(n1));
  const ProbeRun r2 = run_cfg(make(n2));
  const std::uint64_t M = 20000;

  out << "probe: heavy-spread\n"
      << "model: inverse-cube axis walk, Var(S_n)/(n ln n) at two lengths\n"
      << "ensemble " << M << " x {" << n1 << ", " << n2 << "} steps, seed " << seed << "\n\n";
  const auto& a = r1.outcomes[0];
  const auto& b = r2.outcomes[0];
  print_row(out, "quantity", "n = " + std::to_string(n1), "n = " + std::to_string(n2));
  print_row(out, "var_x/(n ln n)", ci(value_of(a, "cov_xx"), var_hw(value_of(a, "cov_xx"), M)),
            ci(value_of(b, "cov_xx"), var_hw(value_of(b, "cov_xx"), M)));
  print_row(out, "var_y/(n ln n)", ci(value_of(a, "cov_yy"), var_hw(value_of(a, "cov_yy"), M)),
            ci(value_of(b, "cov_yy"), var_hw(value_of(b, "cov_yy"), M)));
  print_row(out, "cov_xy/(n ln n)", ci(value_of(a, "cov_xy"), var_hw(value_of(a, "cov_xx"), M)),
            ci(value_of(b, "cov_xy"), var_hw(value_of(b, "cov_xx"), M)));
  const double ratio = value_of(b, "cov_xx") / value_of(a, "cov_xx");
  out << "\n  var_x ratio (n=" << n2 << " over n=" << n1 << "): " << std::setprecision(4)
      << ratio << "\n";
  out << "\nreading: a stable normalized variance across lengths backs the n ln n\n"
      << "spread rate; a drifting ratio would point at a different exponent.\n";
}

void probe_strong_sweep(std::uint64_t seed, std::ostream& out) {
  const double alphas[] = {0.0, 0.1, 0.25, 0.4};
  const std::uint64_t M = 2000, n = 4096;
  out << "probe: strong-sweep\n"
      << "model: simple walk with a growing perturbation cube (family bias beta=0.2)\n"
      << "ensemble " << M << " x " << n << " steps per alpha, seed " << seed << "\n\n";
  out << "  " << std::left << std::setw(8) << "alpha" << std::right << std::setw(22)
      << "var_x/n" << std::setw(22) << "var_y/n" << std::setw(14) << "mean returns"
      << "\n";
  for (double alpha : alphas) {
    ExperimentConfig cfg;
    cfg.name = "probe-strong-sweep";
    WalkModel w;
    w.type = WalkModel::Type::strongly_perturbed;
    w.alpha = alpha;
    w.beta = 0.2;
    cfg.model = w;
    cfg.ensemble = M;
    cfg.length = n;
    cfg.scaling = ScalingKind::diffusive;
    cfg.seed = seed;
    AnalysisSpec cov;
    cov.type = AnalysisType::endpoint_covariance;
    cfg.analyses.push_back(cov);
    AnalysisSpec ret;
    ret.type = AnalysisType::return_stats;
    cfg.analyses.push_back(ret);
    const ProbeRun r = run_cfg(cfg);
    const auto& c = r.outcomes[0];
    std::ostringstream al;
    al << std::setprecision(2) << alpha;
    out << "  " << std::left << std::setw(8) << al.str() << std::right << std::setw(22)
        << ci(value_of(c, "cov_xx"), var_hw(value_of(c, "cov_xx"), M)) << std::setw(22)
        << ci(value_of(c, "cov_yy"), var_hw(value_of(c, "cov_yy"), M)) << std::setw(14)
        << std::setprecision(4) << value_of(r.outcomes[1], "mean_returns") << "\n";
  }
  out << "\nreading: the toward-origin bias inside the cube raises origin returns but,\n"
      << "for admissible growth exponents, leaves the diffusive variance order intact.\n";
}

}  // namespace

std::vector<std::string> probe_names() {
  return {"patched-finite-horizon", "patched-infinite-horizon", "heavy-spread", "strong-sweep"};
}

void run_probe(const std::string& name, std::uint64_t seed, std::ostream& out) {
  if (name == "patched-finite-horizon") {
    probe_patched_finite_horizon(seed, out);
  } else if (name == "patched-infinite-horizon") {
    probe_patched_infinite_horizon(seed, out);
  } else if (name == "heavy-spread") {
    probe_heavy_spread(seed, out);
  } else if (name == "strong-sweep") {
    probe_strong_sweep(seed, out);
  } else {
    std::string names;
    for (const auto& n : probe_names()) names += " " + n;
    throw ConfigError("unknown probe '" + name + "'; available:" + names);
  }
}

}  // namespace lorentzlab::harness

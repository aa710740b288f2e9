#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lorentzlab/lorentz.hpp"
#include "lorentzlab/scatterer_table.hpp"
#include "lorentzlab/walk.hpp"

namespace lorentzlab::harness {

// One estimate or pass/fail check evaluated over the finished ensemble.
enum class AnalysisType : std::uint8_t {
  endpoint_covariance,  // sample covariance of scaled endpoints
  endpoint_mean,        // scaled endpoint mean, report only
  gaussian_marginal,    // KS test of one scaled endpoint component
  green_slope,          // truncated Green function slope against ln n
  return_law_check,     // empirical P(S_t = 0) against the exact law
  llt_origin,           // t * P_hat(S_t = 0) against 2/pi
  jump_law_check,       // direct law sampling: unit-jump mass and chi^2
  hill_tail,            // Hill index of sampled jump magnitudes
  flight_tail,          // free-flight survival slope and axis alignment
  fdd_covariance,       // two-time scaled covariances and cross terms
  return_stats,         // origin returns and first-return histogram
  max_flight_bound,     // observed flights against a certified bound
};

const char* analysis_type_name(AnalysisType t);

// Union of all per-type knobs; parse_config validates the subset that the
// given type accepts and leaves the rest at defaults.
struct AnalysisSpec {
  AnalysisType type = AnalysisType::endpoint_mean;

  // endpoint_covariance (diag target), hill_tail (expect in expect_a),
  // llt_origin (expect in expect_a), fdd_covariance (cross diag target).
  bool has_expect = false;
  double expect_a = 0.0, expect_b = 0.0;
  double rel_tol = 0.0;
  double offdiag_tol = -1.0;  // < 0: off-diagonal not checked

  // gaussian_marginal
  char component = 'x';
  double variance = 1.0;

  // green_slope
  std::uint64_t n_lo = 100, n_hi = 10000;
  double band = 0.15;

  // return_law_check
  std::vector<std::uint64_t> times;
  double sigma = 3.0;

  // llt_origin
  std::uint64_t time = 0;

  // jump_law_check, hill_tail
  std::uint64_t samples = 1000000;

  // hill_tail
  double top_fraction = 0.01;
  double tol = 0.2;

  // flight_tail (axis alignment cone is fixed at 0.1 rad)
  double ell_lo = 5.0, ell_hi = 50.0;
  double slope_lo = -2.3, slope_hi = -1.7;
  double axis_fraction = -1.0;  // < 0: alignment not checked

  // fdd_covariance: snapshot times as fractions of the run length
  double frac_lo = 0.5, frac_hi = 1.0;

  // return_stats
  double radius = 0.0;

  // max_flight_bound
  bool certified = true;
  double bound = 0.0;
};

struct WalkModel {
  enum class Type : std::uint8_t { ssrw, lpsrw, heavy_axis, strongly_perturbed };

  Type type = Type::ssrw;
  // Origin law override for lpsrw (required) and heavy_axis (optional).
  std::vector<walk::JumpLaw::Entry> origin_law;
  double delta = walk::kDefaultDelta;
  // strongly_perturbed only:
  double alpha = 0.25;
  double beta = 0.2;
  bool heavy_background = false;
  bool allow_alpha_override = false;

  walk::WalkSpec build() const;
  bool heavy_jumps() const {
    return type == Type::heavy_axis || (type == Type::strongly_perturbed && heavy_background);
  }
};

struct LorentzModel {
  enum class Builtin : std::uint8_t { single_disk, finite_horizon_pair };

  Builtin builtin = Builtin::single_disk;
  double disk_radius = 0.4;  // single_disk
  double r1 = lorentz::kFiniteHorizonR1;
  double r2 = lorentz::kFiniteHorizonR2;
  std::vector<lorentz::PatchOp> patch;
  double patch_bound = 8.0;
  double max_flight = lorentz::kDefaultMaxFlight;
  lorentz::Box region{0.0, 0.0, 1.0, 1.0};

  lorentz::ScattererTable build() const;
};

enum class ScalingKind : std::uint8_t { none, diffusive, superdiffusive };
enum class DumpKind : std::uint8_t { none, paths };

struct ExperimentConfig {
  std::string name;
  std::variant<WalkModel, LorentzModel> model;
  std::uint64_t ensemble = 0;  // trajectories
  std::uint64_t length = 0;    // steps (walk) or collisions (billiard)
  ScalingKind scaling = ScalingKind::none;
  std::vector<AnalysisSpec> analyses;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir;  // empty: out/<name>
  DumpKind dump = DumpKind::none;
  std::string canonical;  // canonical JSON used for the config hash

  bool is_walk() const { return std::holds_alternative<WalkModel>(model); }
  const WalkModel& walk_model() const { return std::get<WalkModel>(model); }
  const LorentzModel& lorentz_model() const { return std::get<LorentzModel>(model); }

  // Divisor applied to raw displacements before covariance targets: 1,
  // sqrt(length), or sqrt(length * ln length).
  double scale_factor() const;
};

// Parses and fully validates a config document.  Unknown keys, missing
// required keys, out-of-range values, and analyses inapplicable to the model
// all raise ConfigError naming the offending field; `source` prefixes the
// message.  The master seed is mandatory.
ExperimentConfig parse_config(const std::string& json_text, const std::string& source);

ExperimentConfig load_config(const std::string& path);

// FNV-1a hash of the canonical serialization, stable across reruns.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace lorentzlab::harness

#include "lorentzlab/config.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <string>

#include <json.hpp>

#include "lorentzlab/errors.hpp"
#include "lorentzlab/io_util.hpp"
#include "lorentzlab/version.hpp"

namespace lorentzlab::harness {

namespace {

using nlohmann::json;

constexpr double kIntSnapTol = 1e-9;

struct Ctx {
  std::string source;
};

[[noreturn]] void fail(const Ctx& ctx, const std::string& path, const std::string& msg) {
  throw ConfigError(ctx.source + ": " + path + ": " + msg);
}

void check_keys(const Ctx& ctx, const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(ctx, path, "unknown key '" + it.key() + "'");
  }
}

const json& require(const Ctx& ctx, const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx, path, std::string("missing required key '") + key + "'");
  return *it;
}

std::string get_string(const Ctx& ctx, const json& v, const std::string& path) {
  if (!v.is_string()) fail(ctx, path, "expected a string");
  return v.get<std::string>();
}

double get_number(const Ctx& ctx, const json& v, const std::string& path) {
  if (!v.is_number()) fail(ctx, path, "expected a number");
  return v.get<double>();
}

// Integers may arrive as JSON floats (1e5); accept exactly integral values.
std::uint64_t get_u64(const Ctx& ctx, const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto s = v.get<std::int64_t>();
    if (s < 0) fail(ctx, path, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(s);
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!(d >= 0.0) || d != std::floor(d) || d > 9.007199254740992e15) {
      fail(ctx, path, "expected a nonnegative integer");
    }
    return static_cast<std::uint64_t>(d);
  }
  fail(ctx, path, "expected a nonnegative integer");
}

std::int64_t get_i64(const Ctx& ctx, const json& v, const std::string& path) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d != std::floor(d) || std::abs(d) > 9.007199254740992e15) {
      fail(ctx, path, "expected an integer");
    }
    return static_cast<std::int64_t>(d);
  }
  fail(ctx, path, "expected an integer");
}

bool get_bool(const Ctx& ctx, const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(ctx, path, "expected a boolean");
  return v.get<bool>();
}

bool valid_name(const std::string& s) {
  if (s.empty() || s.size() > 80) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::vector<walk::JumpLaw::Entry> parse_law_entries(const Ctx& ctx, const json& arr,
                                                    const std::string& path) {
  if (!arr.is_array() || arr.empty()) fail(ctx, path, "expected a nonempty array of entries");
  std::vector<walk::JumpLaw::Entry> entries;
  entries.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& e = arr[i];
    if (!e.is_object()) fail(ctx, p, "expected an object {dx, dy, p}");
    check_keys(ctx, e, p, {"dx", "dy", "p"});
    walk::JumpLaw::Entry ent;
    ent.jump.x = get_i64(ctx, require(ctx, e, p, "dx"), p + ".dx");
    ent.jump.y = get_i64(ctx, require(ctx, e, p, "dy"), p + ".dy");
    ent.p = get_number(ctx, require(ctx, e, p, "p"), p + ".p");
    if (std::abs(ent.jump.x) > 100 || std::abs(ent.jump.y) > 100) {
      fail(ctx, p, "jump components must lie in [-100, 100]");
    }
    if (!(ent.p > 0.0 && ent.p <= 1.0)) fail(ctx, p + ".p", "probability must be in (0, 1]");
    entries.push_back(ent);
  }
  return entries;
}

WalkModel parse_walk_model(const Ctx& ctx, const json& m) {
  const std::string path = "model";
  check_keys(ctx, m, path,
             {"kind", "type", "origin_law", "delta", "alpha", "beta", "background",
              "allow_alpha_override"});
  WalkModel w;
  const std::string type = get_string(ctx, require(ctx, m, path, "type"), path + ".type");
  if (type == "ssrw") {
    w.type = WalkModel::Type::ssrw;
  } else if (type == "lpsrw") {
    w.type = WalkModel::Type::lpsrw;
  } else if (type == "heavy_axis") {
    w.type = WalkModel::Type::heavy_axis;
  } else if (type == "strongly_perturbed") {
    w.type = WalkModel::Type::strongly_perturbed;
  } else {
    fail(ctx, path + ".type",
         "unknown walk type '" + type + "' (ssrw, lpsrw, heavy_axis, strongly_perturbed)");
  }

  const bool takes_origin_law =
      w.type == WalkModel::Type::lpsrw || w.type == WalkModel::Type::heavy_axis;
  if (m.contains("origin_law")) {
    if (!takes_origin_law) fail(ctx, path + ".origin_law", "only lpsrw and heavy_axis walks take an origin law");
    w.origin_law = parse_law_entries(ctx, m["origin_law"], path + ".origin_law");
  } else if (w.type == WalkModel::Type::lpsrw) {
    fail(ctx, path, "lpsrw requires origin_law");
  }

  if (m.contains("delta")) {
    if (w.type == WalkModel::Type::ssrw) fail(ctx, path + ".delta", "ssrw takes no delta");
    w.delta = get_number(ctx, m["delta"], path + ".delta");
    if (!(w.delta > 0.0 && w.delta <= 0.25)) fail(ctx, path + ".delta", "delta must be in (0, 0.25]");
  }

  const bool strongly = w.type == WalkModel::Type::strongly_perturbed;
  for (const char* k : {"alpha", "beta", "background", "allow_alpha_override"}) {
    if (m.contains(k) && !strongly) {
      fail(ctx, path + "." + k, "only strongly_perturbed walks take this key");
    }
  }
  if (strongly) {
    w.alpha = get_number(ctx, require(ctx, m, path, "alpha"), path + ".alpha");
    if (!(w.alpha >= 0.0 && w.alpha < 1.0)) fail(ctx, path + ".alpha", "alpha must be in [0, 1)");
    if (m.contains("beta")) {
      w.beta = get_number(ctx, m["beta"], path + ".beta");
      if (!(w.beta >= 0.0 && w.beta < 0.5)) fail(ctx, path + ".beta", "beta must be in [0, 0.5)");
    }
    if (m.contains("background")) {
      const std::string bg = get_string(ctx, m["background"], path + ".background");
      if (bg == "ssrw") {
        w.heavy_background = false;
      } else if (bg == "heavy_axis") {
        w.heavy_background = true;
      } else {
        fail(ctx, path + ".background", "background must be 'ssrw' or 'heavy_axis'");
      }
    }
    if (m.contains("allow_alpha_override")) {
      w.allow_alpha_override =
          get_bool(ctx, m["allow_alpha_override"], path + ".allow_alpha_override");
    }
  }
  return w;
}

LorentzModel parse_lorentz_model(const Ctx& ctx, const json& m) {
  const std::string path = "model";
  check_keys(ctx, m, path,
             {"kind", "builtin", "R", "R1", "R2", "patch", "patch_bound", "max_flight", "region"});
  LorentzModel l;
  const std::string b = get_string(ctx, require(ctx, m, path, "builtin"), path + ".builtin");
  if (b == "single_disk") {
    l.builtin = LorentzModel::Builtin::single_disk;
  } else if (b == "finite_horizon_pair") {
    l.builtin = LorentzModel::Builtin::finite_horizon_pair;
  } else {
    fail(ctx, path + ".builtin",
         "unknown environment '" + b + "' (single_disk, finite_horizon_pair)");
  }

  const bool pair = l.builtin == LorentzModel::Builtin::finite_horizon_pair;
  if (m.contains("R")) {
    if (pair) fail(ctx, path + ".R", "finite_horizon_pair takes R1 and R2, not R");
    l.disk_radius = get_number(ctx, m["R"], path + ".R");
  }
  for (const char* k : {"R1", "R2"}) {
    if (m.contains(k) && !pair) fail(ctx, path + "." + k, "single_disk takes R, not R1/R2");
  }
  if (m.contains("R1")) l.r1 = get_number(ctx, m["R1"], path + ".R1");
  if (m.contains("R2")) l.r2 = get_number(ctx, m["R2"], path + ".R2");

  if (m.contains("patch_bound")) {
    l.patch_bound = get_number(ctx, m["patch_bound"], path + ".patch_bound");
    if (!(l.patch_bound > 0.0 && l.patch_bound <= 1e4)) {
      fail(ctx, path + ".patch_bound", "patch_bound must be in (0, 1e4]");
    }
  }
  if (m.contains("max_flight")) {
    l.max_flight = get_number(ctx, m["max_flight"], path + ".max_flight");
    if (!(l.max_flight > 0.0)) fail(ctx, path + ".max_flight", "max_flight must be positive");
  }
  if (m.contains("region")) {
    const json& r = m["region"];
    const std::string rp = path + ".region";
    if (!r.is_array() || r.size() != 4) fail(ctx, rp, "expected [x0, y0, x1, y1]");
    l.region.x0 = get_number(ctx, r[0], rp + "[0]");
    l.region.y0 = get_number(ctx, r[1], rp + "[1]");
    l.region.x1 = get_number(ctx, r[2], rp + "[2]");
    l.region.y1 = get_number(ctx, r[3], rp + "[3]");
    if (!(l.region.x1 > l.region.x0) || !(l.region.y1 > l.region.y0)) {
      fail(ctx, rp, "region must have positive width and height");
    }
  }
  if (m.contains("patch")) {
    const json& arr = m["patch"];
    const std::string pp = path + ".patch";
    if (!arr.is_array()) fail(ctx, pp, "expected an array of patch operations");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string op_path = pp + "[" + std::to_string(i) + "]";
      const json& o = arr[i];
      if (!o.is_object()) fail(ctx, op_path, "expected an object");
      const std::string op = get_string(ctx, require(ctx, o, op_path, "op"), op_path + ".op");
      lorentz::PatchOp p;
      if (op == "remove") {
        check_keys(ctx, o, op_path, {"op", "cell", "index"});
        p.kind = lorentz::PatchOp::Kind::remove_copy;
        const json& cell = require(ctx, o, op_path, "cell");
        if (!cell.is_array() || cell.size() != 2) {
          fail(ctx, op_path + ".cell", "expected [cx, cy]");
        }
        p.cell_x = static_cast<std::int32_t>(get_i64(ctx, cell[0], op_path + ".cell[0]"));
        p.cell_y = static_cast<std::int32_t>(get_i64(ctx, cell[1], op_path + ".cell[1]"));
        p.index = static_cast<std::int32_t>(
            get_u64(ctx, require(ctx, o, op_path, "index"), op_path + ".index"));
      } else if (op == "add") {
        check_keys(ctx, o, op_path, {"op", "center", "radius"});
        p.kind = lorentz::PatchOp::Kind::add_disk;
        const json& c = require(ctx, o, op_path, "center");
        if (!c.is_array() || c.size() != 2) fail(ctx, op_path + ".center", "expected [x, y]");
        p.disk.center.x = get_number(ctx, c[0], op_path + ".center[0]");
        p.disk.center.y = get_number(ctx, c[1], op_path + ".center[1]");
        p.disk.radius = get_number(ctx, require(ctx, o, op_path, "radius"), op_path + ".radius");
        if (!(p.disk.radius > 0.0)) fail(ctx, op_path + ".radius", "radius must be positive");
      } else {
        fail(ctx, op_path + ".op", "op must be 'remove' or 'add'");
      }
      l.patch.push_back(p);
    }
  }
  return l;
}

// Snapshot time from a fraction of the run length; must land on an integer.
std::uint64_t fraction_time(const Ctx& ctx, double frac, std::uint64_t length,
                            const std::string& path) {
  const double v = frac * static_cast<double>(length);
  const double r = std::nearbyint(v);
  if (std::abs(v - r) > kIntSnapTol * static_cast<double>(length) || r < 1.0) {
    fail(ctx, path, "fraction times length must be a positive integer");
  }
  return static_cast<std::uint64_t>(r);
}

AnalysisSpec parse_analysis(const Ctx& ctx, const json& a, const std::string& path,
                            const ExperimentConfig& cfg) {
  if (!a.is_object()) fail(ctx, path, "expected an object");
  const std::string type = get_string(ctx, require(ctx, a, path, "type"), path + ".type");
  const bool is_walk = cfg.is_walk();
  AnalysisSpec s;

  auto need_walk = [&] {
    if (!is_walk) fail(ctx, path, "'" + type + "' applies to walk models only");
  };
  auto need_lorentz = [&] {
    if (is_walk) fail(ctx, path, "'" + type + "' applies to billiard models only");
  };
  auto need_exact_walk = [&] {
    need_walk();
    if (cfg.walk_model().type != WalkModel::Type::ssrw) {
      fail(ctx, path, "'" + type + "' needs the exact reference law (ssrw only)");
    }
  };

  if (type == "endpoint_covariance") {
    check_keys(ctx, a, path, {"type", "expect_diag", "rel_tol", "offdiag_tol"});
    s.type = AnalysisType::endpoint_covariance;
    if (a.contains("expect_diag")) {
      const json& d = a["expect_diag"];
      if (!d.is_array() || d.size() != 2) fail(ctx, path + ".expect_diag", "expected [xx, yy]");
      s.expect_a = get_number(ctx, d[0], path + ".expect_diag[0]");
      s.expect_b = get_number(ctx, d[1], path + ".expect_diag[1]");
      if (!(s.expect_a > 0.0 && s.expect_b > 0.0)) {
        fail(ctx, path + ".expect_diag", "expected positive variances");
      }
      s.has_expect = true;
      s.rel_tol = get_number(ctx, require(ctx, a, path, "rel_tol"), path + ".rel_tol");
      if (!(s.rel_tol > 0.0 && s.rel_tol < 1.0)) fail(ctx, path + ".rel_tol", "must be in (0, 1)");
    }
    if (a.contains("offdiag_tol")) {
      s.offdiag_tol = get_number(ctx, a["offdiag_tol"], path + ".offdiag_tol");
      if (!(s.offdiag_tol > 0.0 && s.offdiag_tol < 1.0)) {
        fail(ctx, path + ".offdiag_tol", "must be in (0, 1)");
      }
    }
    if (cfg.ensemble < 2) fail(ctx, path, "needs an ensemble of at least 2");
    return s;
  }

  if (type == "endpoint_mean") {
    check_keys(ctx, a, path, {"type"});
    s.type = AnalysisType::endpoint_mean;
    return s;
  }

  if (type == "gaussian_marginal") {
    check_keys(ctx, a, path, {"type", "component", "variance"});
    s.type = AnalysisType::gaussian_marginal;
    const std::string c =
        get_string(ctx, require(ctx, a, path, "component"), path + ".component");
    if (c != "x" && c != "y") fail(ctx, path + ".component", "component must be 'x' or 'y'");
    s.component = c[0];
    s.variance = get_number(ctx, require(ctx, a, path, "variance"), path + ".variance");
    if (!(s.variance > 0.0)) fail(ctx, path + ".variance", "variance must be positive");
    if (cfg.ensemble < 1000) fail(ctx, path, "needs an ensemble of at least 1e3");
    return s;
  }

  if (type == "green_slope") {
    check_keys(ctx, a, path, {"type", "n_lo", "n_hi", "band"});
    s.type = AnalysisType::green_slope;
    need_exact_walk();
    if (a.contains("n_lo")) s.n_lo = get_u64(ctx, a["n_lo"], path + ".n_lo");
    if (a.contains("n_hi")) s.n_hi = get_u64(ctx, a["n_hi"], path + ".n_hi");
    if (s.n_lo < 2 || s.n_hi <= s.n_lo || s.n_hi > 10000000ULL) {
      fail(ctx, path, "need 2 <= n_lo < n_hi <= 1e7");
    }
    if (a.contains("band")) {
      s.band = get_number(ctx, a["band"], path + ".band");
      if (!(s.band > 0.0 && s.band < 1.0)) fail(ctx, path + ".band", "band must be in (0, 1)");
    }
    return s;
  }

  if (type == "return_law_check") {
    check_keys(ctx, a, path, {"type", "times", "sigma"});
    s.type = AnalysisType::return_law_check;
    need_exact_walk();
    const json& t = require(ctx, a, path, "times");
    if (!t.is_array() || t.empty()) fail(ctx, path + ".times", "expected a nonempty array");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::uint64_t v = get_u64(ctx, t[i], path + ".times[" + std::to_string(i) + "]");
      if (v < 1 || v > cfg.length) {
        fail(ctx, path + ".times", "each time must lie in [1, length]");
      }
      s.times.push_back(v);
    }
    if (a.contains("sigma")) {
      s.sigma = get_number(ctx, a["sigma"], path + ".sigma");
      if (!(s.sigma >= 1.0 && s.sigma <= 10.0)) fail(ctx, path + ".sigma", "must be in [1, 10]");
    }
    if (cfg.ensemble < 1000) fail(ctx, path, "needs an ensemble of at least 1e3");
    return s;
  }

  if (type == "llt_origin") {
    check_keys(ctx, a, path, {"type", "time", "expect", "rel_tol"});
    s.type = AnalysisType::llt_origin;
    need_walk();
    s.time = get_u64(ctx, require(ctx, a, path, "time"), path + ".time");
    if (s.time < 1 || s.time > cfg.length) fail(ctx, path + ".time", "must lie in [1, length]");
    if (!cfg.walk_model().heavy_jumps() && s.time % 2 != 0) {
      fail(ctx, path + ".time", "parity-restricted walks return only at even times");
    }
    if (a.contains("expect")) {
      s.expect_a = get_number(ctx, a["expect"], path + ".expect");
      if (!(s.expect_a > 0.0)) fail(ctx, path + ".expect", "must be positive");
      s.has_expect = true;
      s.rel_tol = get_number(ctx, require(ctx, a, path, "rel_tol"), path + ".rel_tol");
      if (!(s.rel_tol > 0.0 && s.rel_tol < 1.0)) fail(ctx, path + ".rel_tol", "must be in (0, 1)");
    }
    if (cfg.ensemble < 100000) fail(ctx, path, "needs an ensemble of at least 1e5");
    return s;
  }

  if (type == "jump_law_check") {
    check_keys(ctx, a, path, {"type", "samples"});
    s.type = AnalysisType::jump_law_check;
    need_walk();
    if (a.contains("samples")) s.samples = get_u64(ctx, a["samples"], path + ".samples");
    if (s.samples < 10000 || s.samples > 1000000000ULL) {
      fail(ctx, path + ".samples", "must lie in [1e4, 1e9]");
    }
    return s;
  }

  if (type == "hill_tail") {
    check_keys(ctx, a, path, {"type", "samples", "top_fraction", "expect", "tol"});
    s.type = AnalysisType::hill_tail;
    need_walk();
    if (!cfg.walk_model().heavy_jumps()) {
      fail(ctx, path, "hill_tail needs a heavy-jump background");
    }
    if (a.contains("samples")) s.samples = get_u64(ctx, a["samples"], path + ".samples");
    if (s.samples < 10000 || s.samples > 1000000000ULL) {
      fail(ctx, path + ".samples", "must lie in [1e4, 1e9]");
    }
    if (a.contains("top_fraction")) {
      s.top_fraction = get_number(ctx, a["top_fraction"], path + ".top_fraction");
      if (!(s.top_fraction > 0.0 && s.top_fraction <= 0.05)) {
        fail(ctx, path + ".top_fraction", "must be in (0, 0.05]");
      }
    }
    if (a.contains("expect")) {
      s.expect_a = get_number(ctx, a["expect"], path + ".expect");
      if (!(s.expect_a > 0.0)) fail(ctx, path + ".expect", "must be positive");
      s.has_expect = true;
      if (a.contains("tol")) {
        s.tol = get_number(ctx, a["tol"], path + ".tol");
        if (!(s.tol > 0.0 && s.tol <= 1.0)) fail(ctx, path + ".tol", "must be in (0, 1]");
      }
    } else if (a.contains("tol")) {
      fail(ctx, path + ".tol", "tol needs expect");
    }
    return s;
  }

  if (type == "flight_tail") {
    check_keys(ctx, a, path,
               {"type", "ell_lo", "ell_hi", "slope_lo", "slope_hi", "axis_fraction"});
    s.type = AnalysisType::flight_tail;
    need_lorentz();
    if (a.contains("ell_lo")) s.ell_lo = get_number(ctx, a["ell_lo"], path + ".ell_lo");
    if (a.contains("ell_hi")) s.ell_hi = get_number(ctx, a["ell_hi"], path + ".ell_hi");
    if (!(s.ell_lo > 0.0 && s.ell_hi > s.ell_lo)) fail(ctx, path, "need 0 < ell_lo < ell_hi");
    if (s.ell_hi >= cfg.lorentz_model().max_flight) {
      fail(ctx, path + ".ell_hi", "must stay below the flight cap");
    }
    if (a.contains("slope_lo")) s.slope_lo = get_number(ctx, a["slope_lo"], path + ".slope_lo");
    if (a.contains("slope_hi")) s.slope_hi = get_number(ctx, a["slope_hi"], path + ".slope_hi");
    if (!(s.slope_lo < s.slope_hi)) fail(ctx, path, "need slope_lo < slope_hi");
    if (a.contains("axis_fraction")) {
      s.axis_fraction = get_number(ctx, a["axis_fraction"], path + ".axis_fraction");
      if (!(s.axis_fraction > 0.0 && s.axis_fraction < 1.0)) {
        fail(ctx, path + ".axis_fraction", "must be in (0, 1)");
      }
    }
    return s;
  }

  if (type == "fdd_covariance") {
    check_keys(ctx, a, path, {"type", "s", "t", "expect_cross_diag", "rel_tol"});
    s.type = AnalysisType::fdd_covariance;
    s.frac_lo = get_number(ctx, require(ctx, a, path, "s"), path + ".s");
    s.frac_hi = get_number(ctx, require(ctx, a, path, "t"), path + ".t");
    if (!(s.frac_lo > 0.0 && s.frac_lo < s.frac_hi && s.frac_hi <= 1.0)) {
      fail(ctx, path, "need 0 < s < t <= 1");
    }
    fraction_time(ctx, s.frac_lo, cfg.length, path + ".s");
    fraction_time(ctx, s.frac_hi, cfg.length, path + ".t");
    if (a.contains("expect_cross_diag")) {
      const json& d = a["expect_cross_diag"];
      if (!d.is_array() || d.size() != 2) {
        fail(ctx, path + ".expect_cross_diag", "expected [xx, yy]");
      }
      s.expect_a = get_number(ctx, d[0], path + ".expect_cross_diag[0]");
      s.expect_b = get_number(ctx, d[1], path + ".expect_cross_diag[1]");
      s.has_expect = true;
      s.rel_tol = get_number(ctx, require(ctx, a, path, "rel_tol"), path + ".rel_tol");
      if (!(s.rel_tol > 0.0 && s.rel_tol < 1.0)) fail(ctx, path + ".rel_tol", "must be in (0, 1)");
    }
    if (cfg.ensemble < 2) fail(ctx, path, "needs an ensemble of at least 2");
    return s;
  }

  if (type == "return_stats") {
    check_keys(ctx, a, path, {"type", "radius"});
    s.type = AnalysisType::return_stats;
    if (a.contains("radius")) s.radius = get_number(ctx, a["radius"], path + ".radius");
    if (is_walk) {
      if (s.radius != 0.0) fail(ctx, path + ".radius", "walks use the exact origin (radius 0)");
    } else {
      if (!(s.radius > 0.0)) fail(ctx, path + ".radius", "billiards need a positive radius");
    }
    return s;
  }

  if (type == "max_flight_bound") {
    check_keys(ctx, a, path, {"type", "bound"});
    s.type = AnalysisType::max_flight_bound;
    need_lorentz();
    const json& b = require(ctx, a, path, "bound");
    if (b.is_string()) {
      if (b.get<std::string>() != "certified") {
        fail(ctx, path + ".bound", "string bound must be 'certified'");
      }
      if (!cfg.lorentz_model().patch.empty()) {
        fail(ctx, path + ".bound", "certified bounds need an unpatched periodic table");
      }
      s.certified = true;
    } else {
      s.certified = false;
      s.bound = get_number(ctx, b, path + ".bound");
      if (!(s.bound > 0.0)) fail(ctx, path + ".bound", "must be positive");
    }
    return s;
  }

  fail(ctx, path + ".type", "unknown analysis type '" + type + "'");
}

}  // namespace

const char* analysis_type_name(AnalysisType t) {
  switch (t) {
    case AnalysisType::endpoint_covariance: return "endpoint_covariance";
    case AnalysisType::endpoint_mean: return "endpoint_mean";
    case AnalysisType::gaussian_marginal: return "gaussian_marginal";
    case AnalysisType::green_slope: return "green_slope";
    case AnalysisType::return_law_check: return "return_law_check";
    case AnalysisType::llt_origin: return "llt_origin";
    case AnalysisType::jump_law_check: return "jump_law_check";
    case AnalysisType::hill_tail: return "hill_tail";
    case AnalysisType::flight_tail: return "flight_tail";
    case AnalysisType::fdd_covariance: return "fdd_covariance";
    case AnalysisType::return_stats: return "return_stats";
    case AnalysisType::max_flight_bound: return "max_flight_bound";
  }
  return "unknown";
}

walk::WalkSpec WalkModel::build() const {
  switch (type) {
    case Type::ssrw:
      return walk::make_ssrw();
    case Type::lpsrw:
      return walk::make_lpsrw(walk::JumpLaw::finite(origin_law), delta);
    case Type::heavy_axis:
      if (origin_law.empty()) return walk::make_heavy_axis_walk();
      return walk::make_heavy_axis_walk(walk::JumpLaw::finite(origin_law), delta);
    case Type::strongly_perturbed: {
      walk::JumpLaw bg =
          heavy_background ? walk::JumpLaw::heavy_axis() : walk::uniform_nn_law();
      return walk::make_strongly_perturbed(std::move(bg), alpha,
                                           walk::PatchFamily(beta, delta), allow_alpha_override);
    }
  }
  throw ConfigError("walk model: unreachable type");
}

lorentz::ScattererTable LorentzModel::build() const {
  lorentz::ScattererTable base =
      builtin == Builtin::single_disk
          ? lorentz::single_disk_table(disk_radius, patch_bound)
          : lorentz::finite_horizon_pair_table(r1, r2, patch_bound);
  if (patch.empty()) return base;
  return lorentz::apply_patch(base, patch);
}

double ExperimentConfig::scale_factor() const {
  switch (scaling) {
    case ScalingKind::none:
      return 1.0;
    case ScalingKind::diffusive:
      return std::sqrt(static_cast<double>(length));
    case ScalingKind::superdiffusive:
      return std::sqrt(static_cast<double>(length) * std::log(static_cast<double>(length)));
  }
  return 1.0;
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& source) {
  Ctx ctx{source};
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) fail(ctx, "$", "top level must be an object");
  check_keys(ctx, doc, "$",
             {"schema_version", "name", "model", "ensemble", "length", "scaling", "analyses",
              "seed", "workers", "out", "dump"});

  ExperimentConfig cfg;
  const std::uint64_t sv =
      get_u64(ctx, require(ctx, doc, "$", "schema_version"), "schema_version");
  if (sv != static_cast<std::uint64_t>(kSchemaVersion)) {
    fail(ctx, "schema_version", "unsupported schema version " + std::to_string(sv));
  }
  cfg.name = get_string(ctx, require(ctx, doc, "$", "name"), "name");
  if (!valid_name(cfg.name)) {
    fail(ctx, "name", "must be 1-80 chars of [a-zA-Z0-9_-]");
  }

  const json& m = require(ctx, doc, "$", "model");
  if (!m.is_object()) fail(ctx, "model", "expected an object");
  const std::string kind = get_string(ctx, require(ctx, m, "model", "kind"), "model.kind");
  if (kind == "walk") {
    cfg.model = parse_walk_model(ctx, m);
  } else if (kind == "lorentz") {
    cfg.model = parse_lorentz_model(ctx, m);
  } else {
    fail(ctx, "model.kind", "kind must be 'walk' or 'lorentz'");
  }

  cfg.ensemble = get_u64(ctx, require(ctx, doc, "$", "ensemble"), "ensemble");
  if (cfg.ensemble < 1 || cfg.ensemble > 100000000ULL) fail(ctx, "ensemble", "must be in [1, 1e8]");
  cfg.length = get_u64(ctx, require(ctx, doc, "$", "length"), "length");
  if (cfg.length < 1 || cfg.length > 1000000000ULL) fail(ctx, "length", "must be in [1, 1e9]");

  if (doc.contains("scaling")) {
    const std::string sc = get_string(ctx, doc["scaling"], "scaling");
    if (sc == "none") {
      cfg.scaling = ScalingKind::none;
    } else if (sc == "diffusive") {
      cfg.scaling = ScalingKind::diffusive;
    } else if (sc == "superdiffusive") {
      cfg.scaling = ScalingKind::superdiffusive;
    } else {
      fail(ctx, "scaling", "must be 'none', 'diffusive', or 'superdiffusive'");
    }
  }
  if (cfg.scaling == ScalingKind::superdiffusive && cfg.length < 2) {
    fail(ctx, "scaling", "superdiffusive scaling needs length >= 2");
  }

  cfg.seed = get_u64(ctx, require(ctx, doc, "$", "seed"), "seed");

  if (doc.contains("workers")) {
    const std::uint64_t w = get_u64(ctx, doc["workers"], "workers");
    if (w < 1 || w > 256) fail(ctx, "workers", "must be in [1, 256]");
    cfg.workers = static_cast<int>(w);
  }
  if (doc.contains("out")) {
    cfg.out_dir = get_string(ctx, doc["out"], "out");
    if (cfg.out_dir.empty()) fail(ctx, "out", "must be nonempty when present");
  }
  if (doc.contains("dump")) {
    const std::string d = get_string(ctx, doc["dump"], "dump");
    if (d == "none") {
      cfg.dump = DumpKind::none;
    } else if (d == "paths") {
      cfg.dump = DumpKind::paths;
    } else {
      fail(ctx, "dump", "must be 'none' or 'paths'");
    }
  }

  if (doc.contains("analyses")) {
    const json& arr = doc["analyses"];
    if (!arr.is_array()) fail(ctx, "analyses", "expected an array");
    int fdd_count = 0, tail_count = 0, ret_count = 0, bound_count = 0;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "analyses[" + std::to_string(i) + "]";
      AnalysisSpec s = parse_analysis(ctx, arr[i], path, cfg);
      switch (s.type) {
        case AnalysisType::fdd_covariance: ++fdd_count; break;
        case AnalysisType::flight_tail: ++tail_count; break;
        case AnalysisType::return_stats: ++ret_count; break;
        case AnalysisType::max_flight_bound: ++bound_count; break;
        default: break;
      }
      cfg.analyses.push_back(std::move(s));
    }
    if (fdd_count > 1) fail(ctx, "analyses", "at most one fdd_covariance per run");
    if (tail_count > 1) fail(ctx, "analyses", "at most one flight_tail per run");
    if (ret_count > 1) fail(ctx, "analyses", "at most one return_stats per run");
    if (bound_count > 1) fail(ctx, "analyses", "at most one max_flight_bound per run");
  }

  // Models must be constructible; surface geometry/law errors at parse time.
  if (cfg.is_walk()) {
    (void)cfg.walk_model().build();
  } else {
    (void)cfg.lorentz_model().build();
  }

  // The hash identifies the experiment, not its execution: worker count and
  // output destinations never change any result byte, so two runs of the same
  // physics share a hash (and therefore a report) regardless of them.
  json identity = doc;
  identity.erase("workers");
  identity.erase("out");
  identity.erase("dump");
  cfg.canonical = identity.dump();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(io::read_text_file(path), path);
}

std::string config_hash(const ExperimentConfig& cfg) {
  return io::fnv1a64_hex(cfg.canonical);
}

}  // namespace lorentzlab::harness

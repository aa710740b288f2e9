#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lorentzlab/config.hpp"
#include "lorentzlab/errors.hpp"
#include "lorentzlab/horizon.hpp"
#include "lorentzlab/probes.hpp"
#include "lorentzlab/runner.hpp"
#include "lorentzlab/version.hpp"

namespace {

using namespace lorentzlab;

void print_report(const harness::RunReport& rep, const std::string& out_dir) {
  for (const auto& o : rep.outcomes) {
    std::cout << (o.checked ? (o.pass ? "[pass] " : "[FAIL] ") : "[info] ") << o.type;
    std::size_t shown = 0;
    for (const auto& [k, v] : o.values) {
      if (shown == 4) break;
      std::cout << "  " << k << "=" << std::setprecision(6) << std::defaultfloat << v;
      ++shown;
    }
    for (const auto& [k, v] : o.notes) std::cout << "  " << k << ": " << v;
    std::cout << "\n";
  }
  std::cout << (rep.all_passed ? "overall: pass" : "overall: FAIL") << "  (report " << out_dir
            << "/report.json)\n";
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  args.seed_opt = sub->add_option("--seed", args.seed, "override the master seed");
  args.workers_opt =
      sub->add_option("--workers", args.workers, "override the worker count")->check(CLI::Range(1, 256));
  args.out_opt = sub->add_option("--out", args.out_dir, "override the output directory");
}

harness::ExperimentConfig load_with_overrides(const CommonArgs& args) {
  harness::ExperimentConfig cfg = harness::load_config(args.config_path);
  if (args.seed_opt->count() > 0) cfg.seed = args.seed;
  if (args.workers_opt->count() > 0) cfg.workers = args.workers;
  if (args.out_opt->count() > 0) cfg.out_dir = args.out_dir;
  return cfg;
}

int do_run(const CommonArgs& args, const char* require_kind, bool force_dump) {
  harness::ExperimentConfig cfg = load_with_overrides(args);
  if (require_kind != nullptr) {
    const bool want_walk = std::string(require_kind) == "walk";
    if (cfg.is_walk() != want_walk) {
      throw ConfigError(args.config_path + ": model.kind must be '" + require_kind +
                        "' for this subcommand");
    }
  }
  if (force_dump) cfg.dump = harness::DumpKind::paths;
  const harness::RunReport rep = harness::run_experiment(cfg);
  const std::string out_dir = harness::resolve_out_dir(cfg);
  if (force_dump) {
    std::cout << "wrote " << out_dir << "/paths.jsonl (" << cfg.ensemble << " trajectories x "
              << cfg.length << ")\n";
  }
  print_report(rep, out_dir);
  return rep.all_passed ? 0 : 1;
}

int do_analyze(const CommonArgs& args) {
  harness::ExperimentConfig cfg = load_with_overrides(args);
  cfg.dump = harness::DumpKind::paths;
  const harness::RunReport rep = harness::analyze_experiment(cfg);
  print_report(rep, harness::resolve_out_dir(cfg));
  return rep.all_passed ? 0 : 1;
}

int do_horizon_check(const std::string& config_path, int max_denominator) {
  const harness::ExperimentConfig cfg = harness::load_config(config_path);
  if (cfg.is_walk()) {
    throw ConfigError(config_path + ": horizon-check needs a billiard model");
  }
  if (!cfg.lorentz_model().patch.empty()) {
    throw ConfigError(config_path +
                      ": horizon-check certifies the periodic environment; drop the patch");
  }
  const lorentz::ScattererTable table = cfg.lorentz_model().build();
  const lorentz::HorizonReport rep = lorentz::horizon_check(table, max_denominator);
  std::cout << "directions checked: coprime (p,q) with max(|p|,|q|) <= " << rep.max_denominator
            << "\n";
  if (rep.finite) {
    std::cout << "horizon: finite (no corridor up to the denominator cap)\n";
  } else {
    std::cout << "horizon: infinite (" << rep.corridors.size() << " corridor families)\n";
    std::size_t shown = 0;
    for (const auto& c : rep.corridors) {
      if (shown == 8) {
        std::cout << "  ...\n";
        break;
      }
      std::cout << "  direction (" << c.p << "," << c.q << ")  width "
                << std::setprecision(6) << c.width << "  offset " << c.offset << "\n";
      ++shown;
    }
  }
  const std::optional<double> bound = lorentz::certified_flight_bound(table);
  if (bound) {
    std::cout << "certified flight bound: " << std::setprecision(6) << *bound << "\n";
  } else {
    std::cout << "certified flight bound: none within the denominator cap\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice walk and planar billiard laboratory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonArgs run_args, walk_args, lorentz_args, analyze_args;
  std::string horizon_config;
  int horizon_denominator = 50;
  std::string probe_name;
  std::uint64_t probe_seed = 1001;

  CLI::App* run = app.add_subcommand("run", "run an experiment config end to end");
  add_common(run, run_args);

  CLI::App* sim_walk =
      app.add_subcommand("simulate-walk", "run a walk config and dump the paths");
  add_common(sim_walk, walk_args);

  CLI::App* sim_lorentz =
      app.add_subcommand("simulate-lorentz", "run a billiard config and dump the trajectories");
  add_common(sim_lorentz, lorentz_args);

  CLI::App* analyze =
      app.add_subcommand("analyze", "rebuild the report from a previous paths dump");
  add_common(analyze, analyze_args);

  CLI::App* horizon = app.add_subcommand("horizon-check", "corridor census and flight bound");
  horizon->add_option("--config", horizon_config, "billiard config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  horizon->add_option("--max-denominator", horizon_denominator, "direction cap")
      ->check(CLI::Range(1, 2000));

  CLI::App* probe = app.add_subcommand("probe-conjecture", "exploratory side-by-side studies");
  probe->add_option("name", probe_name, "probe name")->required();
  probe->add_option("--seed", probe_seed, "probe master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return do_run(run_args, nullptr, false);
    if (sim_walk->parsed()) return do_run(walk_args, "walk", true);
    if (sim_lorentz->parsed()) return do_run(lorentz_args, "lorentz", true);
    if (analyze->parsed()) return do_analyze(analyze_args);
    if (horizon->parsed()) return do_horizon_check(horizon_config, horizon_denominator);
    if (probe->parsed()) {
      harness::run_probe(probe_name, probe_seed, std::cout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

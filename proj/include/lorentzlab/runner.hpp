#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lorentzlab/config.hpp"
#include "lorentzlab/summary.hpp"

namespace lorentzlab::harness {

// Result of one analysis: an ordered list of named numbers plus a verdict.
// `checked` distinguishes pass/fail analyses from report-only estimates.
struct AnalysisOutcome {
  std::string type;
  bool checked = false;
  bool pass = true;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, std::string>> notes;
};

struct RunReport {
  stats::EnsembleSummary summary;
  std::vector<AnalysisOutcome> outcomes;
  bool all_passed = true;
};

// What the ensemble pass must record to serve the configured analyses.
stats::SummaryPlan plan_for(const ExperimentConfig& cfg);

// Runs the whole ensemble on cfg.workers threads in fixed 64-trajectory
// blocks merged in index order, so results are bit-identical for any worker
// count.  When cfg.dump is `paths`, writes <out_dir>/paths.jsonl.  A failed
// trajectory aborts the run naming its index.
stats::EnsembleSummary run_ensemble(const ExperimentConfig& cfg, const std::string& out_dir);

// Rebuilds the summary from a paths dump, reproducing the exact accumulation
// and merge order of run_ensemble.
stats::EnsembleSummary summarize_dump(const ExperimentConfig& cfg, const std::string& dump_path);

std::vector<AnalysisOutcome> evaluate_analyses(const ExperimentConfig& cfg,
                                               const stats::EnsembleSummary& summary);

// Writes report.json, summary.csv, per-analysis CSV files, and manifest.json.
void write_outputs(const ExperimentConfig& cfg, const RunReport& report,
                   const std::string& out_dir);

// The effective output directory: cfg.out_dir, or out/<name> when unset.
std::string resolve_out_dir(const ExperimentConfig& cfg);

// simulate + analyze + write; the full `run` subcommand.
RunReport run_experiment(const ExperimentConfig& cfg);

// Re-derives the report from <out>/paths.jsonl previously written by
// run_experiment; rewrites the same report and CSV files byte-identically.
RunReport analyze_experiment(const ExperimentConfig& cfg);

}  // namespace lorentzlab::harness

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "softprior/agents.hpp"
#include "softprior/config.hpp"
#include "softprior/distill.hpp"
#include "softprior/env.hpp"
#include "softprior/results.hpp"

namespace softprior {

/// A sampled world with its state space and trained expert.
struct PreparedWorld {
  int index = 0;
  std::uint64_t seed = 0;
  GridWorld world;
  StateSpace space;
  QLearningResult expert;
};

PreparedWorld prepare_world(const ExperimentConfig& config, int world_index);

/// Restricts a suite invocation; empty members mean "everything in the config".
struct SuiteFilter {
  std::vector<std::string> settings;
  std::vector<RegimeKind> regimes;
  std::vector<int> worlds;
};

/// Runs every missing (setting, regime) pair for one world. Rows already in
/// `existing` are kept; failures are recorded, never thrown.
WorldShard run_world(const ExperimentConfig& config, int world_index, const std::vector<SettingSpec>& settings,
                     const std::vector<RegimeKind>& regimes, const WorldShard* existing = nullptr);

struct SuiteSummary {
  int worlds_run = 0;
  int worlds_skipped = 0;
  std::size_t failures = 0;  // across the whole store after merging
};

/// Sweeps worlds over config.jobs worker threads (one shard per world), skips
/// complete shards, then merges shards and writes the manifest. Throws
/// ConfigError when the output directory holds results of a different config.
SuiteSummary run_suite(const ExperimentConfig& config, const SuiteFilter& filter = {}, std::ostream* log = nullptr);

/// Rewrites manifest.json from the store contents.
void write_manifest(const ExperimentConfig& config, const ResultsStore& store);

/// Config recorded in an output directory's manifest.
ExperimentConfig load_manifest_config(const std::filesystem::path& output_dir);

// ---------------------------------------------------------------------------
// Aggregation

class MissingBaselineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kAllSettings = "ALL";

struct RatioSummary {
  std::string setting;
  RegimeKind regime = RegimeKind::ER;
  double iqm = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n_runs = 0;
  std::size_t n_undefined = 0;  // runs whose baseline area was zero
};

struct ProfileRow {
  std::string setting;
  RegimeKind regime = RegimeKind::ER;
  double threshold = 0.0;
  double fraction = 0.0;
};

struct WeightSummary {
  std::string setting;
  RegimeKind regime = RegimeKind::AE2R;
  double mean_w_degraded = 0.0, ci_degraded = 0.0;
  double mean_w_nondegraded = 0.0, ci_nondegraded = 0.0;
  double gap = 0.0, ci_gap = 0.0;  // per-run (non-degraded - degraded), paired
  std::size_t n_runs = 0;
  std::size_t n_gap_runs = 0;
};

struct AggregateReport {
  std::vector<RatioSummary> ratios;
  std::vector<ProfileRow> profiles;
  std::vector<WeightSummary> weights;
  // Raw per-run area ratios keyed by (setting, regime name).
  std::map<std::pair<std::string, std::string>, std::vector<double>> samples;

  const RatioSummary& ratio(std::string_view setting, RegimeKind regime) const;
  const WeightSummary& weight(std::string_view setting, RegimeKind regime) const;
};

/// Pairs each prior run with the same-world Baseline run of its setting,
/// computes area ratios, then IQM with bootstrap CIs (one stratum per row;
/// settings as strata for the "ALL" row), performance profiles and the
/// prior-weight summaries. Throws MissingBaselineError on unpaired runs.
AggregateReport aggregate(const ExperimentConfig& config, const std::vector<RunRow>& runs,
                          const std::vector<WeightRow>& weights);

/// report.csv, profile.csv and weights.csv under `dir`.
void write_report(const AggregateReport& report, const std::filesystem::path& dir);

/// Human-readable table of area ratios (x1e-3) and weight gaps.
void print_report(const AggregateReport& report, std::ostream& out);

}  // namespace softprior

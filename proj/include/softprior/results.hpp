#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace softprior {

// runs.csv: one row per evaluation checkpoint.
inline constexpr std::string_view kRunsHeader = "world_seed,setting,regime,eval_idx,update_step,eval_return";
// weights.csv: per-checkpoint prior-weight means (adaptive regimes only).
inline constexpr std::string_view kWeightsHeader =
    "world_seed,setting,regime,eval_idx,mean_w_degraded,mean_w_nondegraded,n_deg_visited,n_nondeg_visited";
// failures.csv: runs that threw; excluded from aggregation.
inline constexpr std::string_view kFailuresHeader = "world_seed,setting,regime,message";

struct RunRow {
  std::uint64_t world_seed = 0;
  std::string setting;
  std::string regime;
  int eval_idx = 0;
  std::int64_t update_step = 0;
  double eval_return = 0.0;
};

struct WeightRow {
  std::uint64_t world_seed = 0;
  std::string setting;
  std::string regime;
  int eval_idx = 0;
  double mean_w_degraded = 0.0;
  double mean_w_nondegraded = 0.0;
  int n_deg_visited = 0;
  int n_nondeg_visited = 0;
};

struct FailureRow {
  std::uint64_t world_seed = 0;
  std::string setting;
  std::string regime;
  std::string message;
};

std::string format_row(const RunRow& row);
std::string format_row(const WeightRow& row);
std::string format_row(const FailureRow& row);
/// Throw std::runtime_error on malformed lines.
RunRow parse_run_row(std::string_view line);
WeightRow parse_weight_row(std::string_view line);
FailureRow parse_failure_row(std::string_view line);

/// All results of one world. Rows are kept in canonical order by the writer.
struct WorldShard {
  std::vector<RunRow> runs;
  std::vector<WeightRow> weights;
  std::vector<FailureRow> failures;
};

/// Output directory layout:
///   <root>/shards/world-NNNNNN.{runs,weights,failures}.csv   per-world shards
///   <root>/runs.csv, weights.csv, failures.csv                merged, world order
///   <root>/manifest.json
/// Shards are written to a temporary name and renamed into place, so a
/// shard either exists complete or not at all.
class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path runs_path() const { return root_ / "runs.csv"; }
  std::filesystem::path weights_path() const { return root_ / "weights.csv"; }
  std::filesystem::path failures_path() const { return root_ / "failures.csv"; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.json"; }

  std::optional<WorldShard> load_shard(int world_index) const;
  void save_shard(int world_index, const WorldShard& shard) const;
  std::vector<int> shard_indices() const;

  struct MergeCounts {
    std::size_t worlds = 0;
    std::size_t run_rows = 0;
    std::size_t weight_rows = 0;
    std::size_t failures = 0;
  };
  /// Concatenates every shard, in world-index order, into the merged files.
  MergeCounts merge() const;

  std::vector<RunRow> read_runs() const;
  std::vector<WeightRow> read_weights() const;
  std::vector<FailureRow> read_failures() const;

 private:
  std::filesystem::path shard_path(int world_index, std::string_view kind) const;
  std::filesystem::path root_;
};

/// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace softprior

#include "softprior/results.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "softprior/text.hpp"

namespace softprior {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> fields(std::string_view line, std::size_t expected, std::string_view what) {
  auto parts = split(line, ',');
  if (parts.size() != expected)
    throw std::runtime_error(std::string(what) + ": expected " + std::to_string(expected) + " fields in '" +
                             std::string(line) + "'");
  return parts;
}

template <class Row, class Parse>
std::vector<Row> read_rows(const fs::path& path, std::string_view header, Parse parse) {
  std::vector<Row> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error(path.string() + ": unexpected header");
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse(line));
  return rows;
}

template <class Row>
std::string render(std::string_view header, const std::vector<Row>& rows) {
  std::string out(header);
  out += '\n';
  for (const auto& r : rows) {
    out += format_row(r);
    out += '\n';
  }
  return out;
}

std::string sanitize(std::string_view message) {
  std::string s(message);
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

}  // namespace

std::string format_row(const RunRow& r) {
  return std::to_string(r.world_seed) + ',' + r.setting + ',' + r.regime + ',' + std::to_string(r.eval_idx) + ',' +
         std::to_string(r.update_step) + ',' + format_double(r.eval_return);
}

std::string format_row(const WeightRow& r) {
  return std::to_string(r.world_seed) + ',' + r.setting + ',' + r.regime + ',' + std::to_string(r.eval_idx) + ',' +
         format_double(r.mean_w_degraded) + ',' + format_double(r.mean_w_nondegraded) + ',' +
         std::to_string(r.n_deg_visited) + ',' + std::to_string(r.n_nondeg_visited);
}

std::string format_row(const FailureRow& r) {
  return std::to_string(r.world_seed) + ',' + r.setting + ',' + r.regime + ',' + sanitize(r.message);
}

RunRow parse_run_row(std::string_view line) {
  const auto f = fields(line, 6, "runs row");
  return {parse_int<std::uint64_t>(f[0]), std::string(f[1]), std::string(f[2]), parse_int<int>(f[3]),
          parse_int<std::int64_t>(f[4]), parse_double(f[5])};
}

WeightRow parse_weight_row(std::string_view line) {
  const auto f = fields(line, 8, "weights row");
  return {parse_int<std::uint64_t>(f[0]), std::string(f[1]), std::string(f[2]), parse_int<int>(f[3]),
          parse_double(f[4]), parse_double(f[5]), parse_int<int>(f[6]), parse_int<int>(f[7])};
}

FailureRow parse_failure_row(std::string_view line) {
  const auto f = fields(line, 4, "failures row");
  return {parse_int<std::uint64_t>(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3])};
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

ResultsStore::ResultsStore(fs::path root) : root_(std::move(root)) {}

fs::path ResultsStore::shard_path(int world_index, std::string_view kind) const {
  char name[64];
  std::snprintf(name, sizeof(name), "world-%06d.%.*s.csv", world_index, static_cast<int>(kind.size()), kind.data());
  return root_ / "shards" / name;
}

std::optional<WorldShard> ResultsStore::load_shard(int world_index) const {
  // The runs file is written last, so its presence marks a complete shard.
  const fs::path runs = shard_path(world_index, "runs");
  if (!fs::exists(runs)) return std::nullopt;
  WorldShard shard;
  shard.runs = read_rows<RunRow>(runs, kRunsHeader, parse_run_row);
  shard.weights = read_rows<WeightRow>(shard_path(world_index, "weights"), kWeightsHeader, parse_weight_row);
  shard.failures = read_rows<FailureRow>(shard_path(world_index, "failures"), kFailuresHeader, parse_failure_row);
  return shard;
}

void ResultsStore::save_shard(int world_index, const WorldShard& shard) const {
  write_file_atomic(shard_path(world_index, "weights"), render(kWeightsHeader, shard.weights));
  write_file_atomic(shard_path(world_index, "failures"), render(kFailuresHeader, shard.failures));
  write_file_atomic(shard_path(world_index, "runs"), render(kRunsHeader, shard.runs));
}

std::vector<int> ResultsStore::shard_indices() const {
  std::vector<int> out;
  const fs::path dir = root_ / "shards";
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int index = 0;
    char tail[16] = {};
    if (std::sscanf(name.c_str(), "world-%d.%15s", &index, tail) == 2 && std::string_view(tail) == "runs.csv")
      out.push_back(index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ResultsStore::MergeCounts ResultsStore::merge() const {
  std::string runs(kRunsHeader), weights(kWeightsHeader), failures(kFailuresHeader);
  runs += '\n';
  weights += '\n';
  failures += '\n';
  MergeCounts counts;
  for (int index : shard_indices()) {
    const auto shard = load_shard(index);
    if (!shard) continue;
    ++counts.worlds;
    for (const auto& r : shard->runs) (runs += format_row(r)) += '\n';
    for (const auto& r : shard->weights) (weights += format_row(r)) += '\n';
    for (const auto& r : shard->failures) (failures += format_row(r)) += '\n';
    counts.run_rows += shard->runs.size();
    counts.weight_rows += shard->weights.size();
    counts.failures += shard->failures.size();
  }
  write_file_atomic(runs_path(), runs);
  write_file_atomic(weights_path(), weights);
  write_file_atomic(failures_path(), failures);
  return counts;
}

std::vector<RunRow> ResultsStore::read_runs() const {
  return read_rows<RunRow>(runs_path(), kRunsHeader, parse_run_row);
}

std::vector<WeightRow> ResultsStore::read_weights() const {
  return read_rows<WeightRow>(weights_path(), kWeightsHeader, parse_weight_row);
}

std::vector<FailureRow> ResultsStore::read_failures() const {
  return read_rows<FailureRow>(failures_path(), kFailuresHeader, parse_failure_row);
}

}  // namespace softprior

// softprior command line: gen, train-expert, run, aggregate, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "softprior/config.hpp"
#include "softprior/qtable_io.hpp"
#include "softprior/suite.hpp"
#include "softprior/text.hpp"
#include "softprior/world_io.hpp"

namespace fs = std::filesystem;
using namespace softprior;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& opts) {
  app->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--set", opts.overrides, "Override a config key, e.g. --set student.policy_lr=0.1");
  app->add_option("--seed", opts.seed, "Master seed");
  app->add_option("--jobs", opts.jobs, "Worker threads (0 = all cores)");
  app->add_option("--out", opts.out, "Output directory");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path + " is not valid JSON");
  return doc;
}

ExperimentConfig finish_config(nlohmann::json doc, const CommonOptions& opts) {
  for (const auto& o : opts.overrides) apply_override(doc, o);
  ExperimentConfig config = config_from_json(doc);
  if (opts.seed) config.master_seed = *opts.seed;
  if (opts.jobs) config.jobs = *opts.jobs;
  if (!opts.out.empty()) config.output_dir = opts.out;
  config.validate();
  return config;
}

ExperimentConfig load_config(const CommonOptions& opts) {
  nlohmann::json doc = opts.config_path.empty() ? nlohmann::json::object() : read_json_file(opts.config_path);
  return finish_config(std::move(doc), opts);
}

// Config of an existing results directory, with --set/--jobs applied on top.
ExperimentConfig load_results_config(const CommonOptions& opts) {
  const fs::path dir = opts.out.empty() ? (opts.config_path.empty() ? fs::path("results")
                                                                     : fs::path(load_config(opts).output_dir))
                                        : fs::path(opts.out);
  ExperimentConfig stored = load_manifest_config(dir);
  nlohmann::json doc = to_json(stored);
  doc["output_dir"] = dir.string();
  CommonOptions rest = opts;
  rest.seed.reset();
  return finish_config(std::move(doc), rest);
}

// "0-9,12,20-24" -> indices.
std::vector<int> parse_world_list(const std::string& text) {
  std::vector<int> out;
  for (std::string_view part : split(text, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-', 1);
    if (dash == std::string_view::npos) {
      out.push_back(parse_int<int>(part));
    } else {
      const int lo = parse_int<int>(part.substr(0, dash));
      const int hi = parse_int<int>(part.substr(dash + 1));
      if (hi < lo) throw ConfigError("bad world range " + std::string(part));
      for (int i = lo; i <= hi; ++i) out.push_back(i);
    }
  }
  return out;
}

std::string indexed_name(std::string_view stem, int index, std::string_view ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return std::string(stem) + "-" + buf + std::string(ext);
}

int cmd_gen(const CommonOptions& opts, const std::string& worlds_text) {
  const ExperimentConfig config = load_config(opts);
  const fs::path dir = opts.out.empty() ? fs::path("worlds") : fs::path(opts.out);
  fs::create_directories(dir);
  std::vector<int> worlds = worlds_text.empty() ? std::vector<int>{} : parse_world_list(worlds_text);
  if (worlds.empty())
    for (int i = 0; i < config.n_worlds; ++i) worlds.push_back(i);
  for (int i : worlds) {
    const GridWorld world =
        sample_gridworld(world_seed(config, i), config.object_probs, config.termination_prob, config.transition_noise);
    std::ofstream out(dir / indexed_name("world", i, ".txt"));
    write_world(out, world, config.object_probs);
    if (!out) throw std::runtime_error("write failed in " + dir.string());
  }
  std::cout << "wrote " << worlds.size() << " worlds to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_train_expert(const CommonOptions& opts, const std::string& worlds_text, const std::string& world_file) {
  const ExperimentConfig config = load_config(opts);
  const fs::path dir = opts.out.empty() ? fs::path("experts") : fs::path(opts.out);
  fs::create_directories(dir);
  if (!world_file.empty()) {
    std::ifstream in(world_file);
    if (!in) throw ConfigError("cannot open " + world_file);
    const GridWorld world = read_world(in).world;
    StateSpace space(world);
    Rng rng(expert_seed(world.seed()));
    const QLearningResult expert = train_q_learning(world, space, config.expert_budget, config.expert, rng);
    const fs::path path = dir / (fs::path(world_file).stem().string() + ".qtable");
    std::ofstream out(path);
    save_qtable(out, expert.table, space);
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
  }
  std::vector<int> worlds = worlds_text.empty() ? std::vector<int>{} : parse_world_list(worlds_text);
  if (worlds.empty())
    for (int i = 0; i < config.n_worlds; ++i) worlds.push_back(i);
  for (int i : worlds) {
    const PreparedWorld p = prepare_world(config, i);
    std::ofstream out(dir / indexed_name("expert", i, ".qtable"));
    save_qtable(out, p.expert.table, p.space);
  }
  std::cout << "wrote " << worlds.size() << " expert tables to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_run(const CommonOptions& opts, const std::vector<std::string>& settings,
            const std::vector<std::string>& regimes, const std::string& worlds_text) {
  const ExperimentConfig config = load_config(opts);
  SuiteFilter filter;
  filter.settings = settings;
  for (const auto& r : regimes) filter.regimes.push_back(parse_regime(r));
  if (!worlds_text.empty()) filter.worlds = parse_world_list(worlds_text);
  const SuiteSummary summary = run_suite(config, filter, &std::cerr);
  std::cout << "ran " << summary.worlds_run << " worlds, skipped " << summary.worlds_skipped << " complete; "
            << summary.failures << " failed runs recorded in " << config.output_dir << '\n';
  return summary.failures > 0 ? kExitPartial : kExitOk;
}

int cmd_aggregate(const CommonOptions& opts, const std::string& dest, bool print) {
  const ExperimentConfig config = load_results_config(opts);
  const ResultsStore store(config.output_dir);
  const auto failures = store.read_failures();
  const AggregateReport report = aggregate(config, store.read_runs(), store.read_weights());
  const fs::path out = dest.empty() ? fs::path(config.output_dir) / "report" : fs::path(dest);
  fs::create_directories(out);
  write_report(report, out);
  if (print) print_report(report, std::cout);
  if (!failures.empty()) std::cerr << failures.size() << " failed runs excluded\n";
  std::cout << "report written to " << out.string() << '\n';
  return failures.empty() ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive policy distillation from soft action priors on tabular grid worlds"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string worlds_text, world_file, dest;
  std::vector<std::string> settings, regimes;

  auto* gen = app.add_subcommand("gen", "Sample worlds and write them as text files");
  add_common(gen, opts);
  gen->add_option("--worlds", worlds_text, "World indices, e.g. 0-9,15");

  auto* train = app.add_subcommand("train-expert", "Train Q-learning experts and write their tables");
  add_common(train, opts);
  train->add_option("--worlds", worlds_text, "World indices, e.g. 0-9,15");
  train->add_option("--world-file", world_file, "Train on a world file instead")->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run the distillation suite");
  add_common(run, opts);
  run->add_option("--setting", settings, "Restrict to these settings");
  run->add_option("--regime", regimes, "Restrict to these regimes");
  run->add_option("--worlds", worlds_text, "World indices, e.g. 0-9,15");

  auto* agg = app.add_subcommand("aggregate", "Compute area-ratio statistics and print them");
  add_common(agg, opts);
  agg->add_option("--dest", dest, "Report directory (default <out>/report)");

  auto* rep = app.add_subcommand("report", "Write report.csv, profile.csv and weights.csv");
  add_common(rep, opts);
  rep->add_option("--dest", dest, "Report directory (default <out>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(opts, worlds_text);
    if (*train) return cmd_train_expert(opts, worlds_text, world_file);
    if (*run) return cmd_run(opts, settings, regimes, worlds_text);
    if (*agg) return cmd_aggregate(opts, dest, true);
    if (*rep) return cmd_aggregate(opts, dest, false);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial + 1;
  }
  return kExitOk;
}

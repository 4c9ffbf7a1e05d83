#include "softprior/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "softprior/evalstats.hpp"
#include "softprior/priors.hpp"
#include "softprior/text.hpp"

namespace softprior {

namespace fs = std::filesystem;
using nlohmann::json;

PreparedWorld prepare_world(const ExperimentConfig& config, int world_index) {
  const std::uint64_t seed = world_seed(config, world_index);
  GridWorld world = sample_gridworld(seed, config.object_probs, config.termination_prob, config.transition_noise);
  StateSpace space(world);
  Rng rng(expert_seed(seed));
  QLearningResult expert = train_q_learning(world, space, config.expert_budget, config.expert, rng);
  return {world_index, seed, std::move(world), std::move(space), std::move(expert)};
}

namespace {

std::size_t order_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  return static_cast<std::size_t>(it - names.begin());
}

struct CanonicalOrder {
  std::vector<std::string> settings;
  std::vector<std::string> regimes;

  explicit CanonicalOrder(const ExperimentConfig& config) {
    for (const auto& s : config.settings) settings.push_back(s.name);
    for (auto r : config.regimes) regimes.emplace_back(to_string(r));
    for (auto r : {RegimeKind::Baseline, RegimeKind::ER, RegimeKind::E2R, RegimeKind::AER, RegimeKind::AE2R})
      if (std::find(regimes.begin(), regimes.end(), to_string(r)) == regimes.end()) regimes.emplace_back(to_string(r));
  }

  template <class Row>
  auto key(const Row& r) const {
    return std::make_tuple(order_of(settings, r.setting), r.setting, order_of(regimes, r.regime), r.regime);
  }

  template <class Row>
  void sort(std::vector<Row>& rows) const {
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
      if constexpr (requires { a.eval_idx; }) {
        return std::tuple_cat(key(a), std::make_tuple(a.eval_idx)) < std::tuple_cat(key(b), std::make_tuple(b.eval_idx));
      } else {
        return key(a) < key(b);
      }
    });
  }
};

void append_record(WorldShard& shard, std::uint64_t seed, const std::string& setting, const RunRecord& rec) {
  const std::string regime(to_string(rec.regime));
  for (const auto& p : rec.curve) shard.runs.push_back({seed, setting, regime, p.eval_idx, p.update_step, p.eval_return});
  for (const auto& w : rec.weights)
    shard.weights.push_back({seed, setting, regime, w.eval_idx, w.mean_w_degraded, w.mean_w_nondegraded,
                             w.n_deg_visited, w.n_nondeg_visited});
}

std::int64_t expected_evals(const ExperimentConfig& config) {
  return config.schedule.updates / config.schedule.eval_every;
}

}  // namespace

WorldShard run_world(const ExperimentConfig& config, int world_index, const std::vector<SettingSpec>& settings,
                     const std::vector<RegimeKind>& regimes, const WorldShard* existing) {
  const std::uint64_t seed = world_seed(config, world_index);
  WorldShard shard;
  std::set<std::pair<std::string, std::string>> done;
  if (existing) {
    std::map<std::pair<std::string, std::string>, std::int64_t> counts;
    for (const auto& r : existing->runs) ++counts[{r.setting, r.regime}];
    for (const auto& [k, n] : counts)
      if (n == expected_evals(config)) done.insert(k);
    for (const auto& r : existing->runs)
      if (done.count({r.setting, r.regime})) shard.runs.push_back(r);
    for (const auto& r : existing->weights)
      if (done.count({r.setting, r.regime})) shard.weights.push_back(r);
  }

  const auto fail = [&](const std::string& setting, std::string_view regime, const std::string& what) {
    shard.failures.push_back({seed, setting, std::string(regime), what});
  };

  std::optional<PreparedWorld> prepared;
  std::optional<RunRecord> baseline;
  std::optional<std::string> world_error;
  const Rng student_rng(student_seed(seed));

  for (const auto& setting : settings) {
    for (RegimeKind kind : regimes) {
      const std::string regime_name(to_string(kind));
      if (done.count({setting.name, regime_name})) continue;
      try {
        if (world_error) throw std::runtime_error(*world_error);
        if (!prepared) {
          try {
            prepared = prepare_world(config, world_index);
          } catch (const std::exception& e) {
            world_error = std::string("world preparation failed: ") + e.what();
            throw;
          }
        }
        const std::size_t n_states = prepared->space.size();
        if (kind == RegimeKind::Baseline) {
          if (!baseline) {
            DistillRegime regime(kind, std::nullopt, n_states, config.student.regime_options());
            baseline = run_training(prepared->world, prepared->space, regime, config.student, config.schedule,
                                    student_rng);
          }
          append_record(shard, seed, setting.name, *baseline);
          continue;
        }
        ActionPrior prior = build_prior(prepared->expert.table, n_states, setting.degradation,
                                        Rng(prior_seed(seed, setting)), config.prior_temperature,
                                        config.state_value, config.state_temperature);
        DistillRegime regime(kind, std::move(prior), n_states, config.student.regime_options());
        const RunRecord rec =
            run_training(prepared->world, prepared->space, regime, config.student, config.schedule, student_rng);
        append_record(shard, seed, setting.name, rec);
      } catch (const std::exception& e) {
        fail(setting.name, regime_name, e.what());
      }
    }
  }

  const CanonicalOrder order(config);
  order.sort(shard.runs);
  order.sort(shard.weights);
  order.sort(shard.failures);
  return shard;
}

// ---------------------------------------------------------------------------

void write_manifest(const ExperimentConfig& config, const ResultsStore& store) {
  const auto failures = store.read_failures();
  const auto runs = store.read_runs();
  std::set<std::tuple<std::uint64_t, std::string, std::string>> keys;
  for (const auto& r : runs) keys.insert({r.world_seed, r.setting, r.regime});
  json cfg = to_json(config);
  cfg.erase("jobs");
  cfg.erase("output_dir");
  const json manifest{
      {"format", "softprior-results"},
      {"version", 1},
      {"fingerprint", config_fingerprint(config)},
      {"config", cfg},
      {"worlds_with_results", store.shard_indices().size()},
      {"completed_runs", keys.size()},
      {"failed_runs", failures.size()},
  };
  write_file_atomic(store.manifest_path(), manifest.dump(2) + "\n");
}

ExperimentConfig load_manifest_config(const fs::path& output_dir) {
  std::ifstream in(output_dir / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + output_dir.string());
  const json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("config")) throw ConfigError("unreadable manifest.json");
  ExperimentConfig config = config_from_json(manifest["config"]);
  config.output_dir = output_dir.string();
  return config;
}

SuiteSummary run_suite(const ExperimentConfig& config, const SuiteFilter& filter, std::ostream* log) {
  config.validate();
  const ResultsStore store(config.output_dir);

  if (fs::exists(store.manifest_path())) {
    std::ifstream in(store.manifest_path());
    const json manifest = json::parse(in, nullptr, false);
    if (manifest.is_discarded() || manifest.value("fingerprint", "") != config_fingerprint(config))
      throw ConfigError("output directory " + config.output_dir + " holds results of a different configuration");
  }
  fs::create_directories(store.root());

  std::vector<SettingSpec> settings;
  if (filter.settings.empty()) settings = config.settings;
  else
    for (const auto& name : filter.settings) settings.push_back(config.setting(name));
  std::vector<RegimeKind> regimes = filter.regimes.empty() ? config.regimes : filter.regimes;
  std::vector<int> worlds = filter.worlds;
  if (worlds.empty())
    for (int i = 0; i < config.n_worlds; ++i) worlds.push_back(i);
  for (int w : worlds)
    if (w < 0) throw ConfigError("world indices must be non-negative");

  const std::int64_t evals = expected_evals(config);
  std::atomic<std::size_t> next{0};
  std::atomic<int> ran{0}, skipped{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= worlds.size()) return;
      const int index = worlds[i];
      const auto existing = store.load_shard(index);
      if (existing) {
        std::map<std::pair<std::string, std::string>, std::int64_t> counts;
        for (const auto& r : existing->runs) ++counts[{r.setting, r.regime}];
        bool complete = true;
        for (const auto& s : settings)
          for (auto k : regimes)
            if (counts[{s.name, std::string(to_string(k))}] != evals) complete = false;
        if (complete) {
          ++skipped;
          continue;
        }
      }
      WorldShard shard = run_world(config, index, settings, regimes, existing ? &*existing : nullptr);
      store.save_shard(index, shard);
      const int finished = ++ran;
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "world " << index << " done (" << finished << " run, " << skipped.load() << " skipped of "
             << worlds.size() << ")" << (shard.failures.empty() ? "" : " with failures") << '\n';
      }
    }
  };

  int jobs = config.jobs > 0 ? config.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(worlds.size()));
  {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  const auto counts = store.merge();
  write_manifest(config, store);
  return {ran.load(), skipped.load(), counts.failures};
}

// ---------------------------------------------------------------------------

const RatioSummary& AggregateReport::ratio(std::string_view setting, RegimeKind regime) const {
  for (const auto& r : ratios)
    if (r.setting == setting && r.regime == regime) return r;
  throw std::out_of_range("no ratio summary for " + std::string(setting) + "/" + std::string(to_string(regime)));
}

const WeightSummary& AggregateReport::weight(std::string_view setting, RegimeKind regime) const {
  for (const auto& w : weights)
    if (w.setting == setting && w.regime == regime) return w;
  throw std::out_of_range("no weight summary for " + std::string(setting) + "/" + std::string(to_string(regime)));
}

namespace {

using RunKey = std::tuple<std::uint64_t, std::string, std::string>;

std::map<RunKey, EvalCurve> collect_curves(const std::vector<RunRow>& runs) {
  std::map<RunKey, std::vector<const RunRow*>> grouped;
  for (const auto& r : runs) grouped[{r.world_seed, r.setting, r.regime}].push_back(&r);
  std::map<RunKey, EvalCurve> curves;
  for (auto& [key, rows] : grouped) {
    std::sort(rows.begin(), rows.end(), [](const RunRow* a, const RunRow* b) { return a->eval_idx < b->eval_idx; });
    EvalCurve c;
    for (const RunRow* r : rows) {
      c.steps.push_back(static_cast<double>(r->update_step));
      c.values.push_back(r->eval_return);
    }
    curves.emplace(key, std::move(c));
  }
  return curves;
}

}  // namespace

AggregateReport aggregate(const ExperimentConfig& config, const std::vector<RunRow>& runs,
                          const std::vector<WeightRow>& weights) {
  AggregateReport report;
  const auto curves = collect_curves(runs);
  const std::string baseline_name(to_string(RegimeKind::Baseline));

  // (setting, regime) -> ratios, plus undefined counts.
  std::map<std::pair<std::string, std::string>, std::size_t> undefined;
  for (const auto& [key, curve] : curves) {
    const auto& [seed, setting, regime] = key;
    if (regime == baseline_name) continue;
    const auto base = curves.find({seed, setting, baseline_name});
    if (base == curves.end())
      throw MissingBaselineError("run " + std::to_string(seed) + "/" + setting + "/" + regime +
                                 " has no Baseline run to pair with");
    auto& bucket = report.samples[{setting, regime}];
    try {
      bucket.push_back(area_ratio(curve, base->second));
    } catch (const UndefinedRatioError&) {
      ++undefined[{setting, regime}];
    }
  }

  const Statistic iqm_stat = [](std::span<const double> v) { return iqm(v); };
  const auto thresholds = config.profile_thresholds();

  std::vector<RegimeKind> prior_regimes;
  for (auto r : config.regimes)
    if (r != RegimeKind::Baseline) prior_regimes.push_back(r);

  for (RegimeKind regime : prior_regimes) {
    const std::string rname(to_string(regime));
    std::vector<std::vector<double>> strata;
    std::size_t all_undefined = 0;
    for (const auto& setting : config.settings) {
      const auto it = report.samples.find({setting.name, rname});
      if (it == report.samples.end() || it->second.empty()) continue;
      const auto& values = it->second;
      Rng rng(derive_seed(config.master_seed, "bootstrap/" + setting.name + "/" + rname));
      const std::vector<std::vector<double>> one{values};
      const Interval ci = stratified_bootstrap_ci(one, iqm_stat, config.bootstrap_resamples, config.confidence, rng);
      const std::size_t n_undef = undefined[{setting.name, rname}];
      report.ratios.push_back({setting.name, regime, iqm(values), ci.lower, ci.upper, values.size(), n_undef});
      for (const auto& [t, f] : performance_profile(values, thresholds))
        report.profiles.push_back({setting.name, regime, t, f});
      strata.push_back(values);
      all_undefined += n_undef;
    }
    if (strata.size() > 1) {
      std::vector<double> pooled;
      for (const auto& s : strata) pooled.insert(pooled.end(), s.begin(), s.end());
      Rng rng(derive_seed(config.master_seed, "bootstrap/ALL/" + rname));
      const Interval ci = stratified_bootstrap_ci(strata, iqm_stat, config.bootstrap_resamples, config.confidence, rng);
      report.ratios.push_back({std::string(kAllSettings), regime, iqm(pooled), ci.lower, ci.upper, pooled.size(),
                               all_undefined});
      for (const auto& [t, f] : performance_profile(pooled, thresholds))
        report.profiles.push_back({std::string(kAllSettings), regime, t, f});
    }
  }

  // Prior weights: per run, pooled over checkpoints (weighted by visit counts);
  // then mean and 1.96 SEM across runs.
  struct Acc {
    double deg = 0, nondeg = 0;
    std::int64_t n_deg = 0, n_nondeg = 0;
  };
  std::map<RunKey, Acc> per_run;
  for (const auto& w : weights) {
    Acc& a = per_run[{w.world_seed, w.setting, w.regime}];
    if (w.n_deg_visited > 0) {
      a.deg += w.mean_w_degraded * w.n_deg_visited;
      a.n_deg += w.n_deg_visited;
    }
    if (w.n_nondeg_visited > 0) {
      a.nondeg += w.mean_w_nondegraded * w.n_nondeg_visited;
      a.n_nondeg += w.n_nondeg_visited;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& setting : config.settings) {
    for (RegimeKind regime : prior_regimes) {
      if (!is_adaptive(regime)) continue;
      const std::string rname(to_string(regime));
      std::vector<double> deg, nondeg, gap;
      std::size_t n_runs = 0;
      for (const auto& [key, a] : per_run) {
        if (std::get<1>(key) != setting.name || std::get<2>(key) != rname) continue;
        ++n_runs;
        const double d = a.n_deg ? a.deg / static_cast<double>(a.n_deg) : nan;
        const double nd = a.n_nondeg ? a.nondeg / static_cast<double>(a.n_nondeg) : nan;
        deg.push_back(d);
        nondeg.push_back(nd);
        if (!std::isnan(d) && !std::isnan(nd)) gap.push_back(nd - d);
      }
      if (n_runs == 0) continue;
      const auto md = mean_with_sem_ci(deg);
      const auto mn = mean_with_sem_ci(nondeg);
      const auto mg = mean_with_sem_ci(gap);
      report.weights.push_back({setting.name, regime, md.mean, md.half_width, mn.mean, mn.half_width, mg.mean,
                                mg.half_width, n_runs, mg.n});
    }
  }
  return report;
}

void write_report(const AggregateReport& report, const fs::path& dir) {
  std::string ratios = "setting,regime,iqm,ci_lo,ci_hi,n_runs\n";
  for (const auto& r : report.ratios)
    ratios += r.setting + ',' + std::string(to_string(r.regime)) + ',' + format_double(r.iqm) + ',' +
              format_double(r.ci_lo) + ',' + format_double(r.ci_hi) + ',' + std::to_string(r.n_runs) + '\n';
  std::string profiles = "setting,regime,threshold,fraction\n";
  for (const auto& p : report.profiles)
    profiles += p.setting + ',' + std::string(to_string(p.regime)) + ',' + format_double(p.threshold) + ',' +
                format_double(p.fraction) + '\n';
  std::string weights =
      "setting,regime,mean_w_degraded,ci_lo_degraded,ci_hi_degraded,mean_w_nondegraded,ci_lo_nondegraded,"
      "ci_hi_nondegraded,gap,ci_lo_gap,ci_hi_gap,n_runs\n";
  for (const auto& w : report.weights)
    weights += w.setting + ',' + std::string(to_string(w.regime)) + ',' + format_double(w.mean_w_degraded) + ',' +
               format_double(w.mean_w_degraded - w.ci_degraded) + ',' +
               format_double(w.mean_w_degraded + w.ci_degraded) + ',' + format_double(w.mean_w_nondegraded) + ',' +
               format_double(w.mean_w_nondegraded - w.ci_nondegraded) + ',' +
               format_double(w.mean_w_nondegraded + w.ci_nondegraded) + ',' + format_double(w.gap) + ',' +
               format_double(w.gap - w.ci_gap) + ',' + format_double(w.gap + w.ci_gap) + ',' +
               std::to_string(w.n_runs) + '\n';
  write_file_atomic(dir / "report.csv", ratios);
  write_file_atomic(dir / "profile.csv", profiles);
  write_file_atomic(dir / "weights.csv", weights);
}

void print_report(const AggregateReport& report, std::ostream& out) {
  const auto old_flags = out.flags();
  out << "Area ratio IQM x1e-3 (95% bootstrap CI)\n";
  for (const auto& r : report.ratios) {
    out << std::left << std::setw(6) << r.setting << std::setw(6) << to_string(r.regime) << std::right << std::fixed
        << std::setprecision(1) << std::setw(9) << 1e3 * r.iqm << "  (" << 1e3 * r.ci_lo << ", " << 1e3 * r.ci_hi
        << ")  n=" << r.n_runs;
    if (r.n_undefined) out << "  undefined=" << r.n_undefined;
    out << '\n';
  }
  if (!report.weights.empty()) {
    out << "Mean prior weights (+- 1.96 SEM): non-degraded | degraded | gap\n";
    for (const auto& w : report.weights) {
      out << std::left << std::setw(6) << w.setting << std::setw(6) << to_string(w.regime) << std::right
          << std::fixed << std::setprecision(3) << "  " << w.mean_w_nondegraded << " +- " << w.ci_nondegraded
          << " | " << w.mean_w_degraded << " +- " << w.ci_degraded << " | " << w.gap << " +- " << w.ci_gap
          << "  n=" << w.n_runs << '\n';
    }
  }
  out.flags(old_flags);
}

}  // namespace softprior

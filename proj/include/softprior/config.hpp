#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "softprior/agents.hpp"
#include "softprior/distill.hpp"
#include "softprior/env.hpp"
#include "softprior/priors.hpp"

namespace softprior {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A named prior setting, e.g. "RD30" = random degradation with p = 0.3.
struct SettingSpec {
  std::string name;
  DegradationSpec degradation;
  bool operator==(const SettingSpec&) const = default;
};

/// Expert prior, random degradation at 15/30/50 %, structural at 3/5/10 states.
std::vector<SettingSpec> default_settings();

struct ExperimentConfig {
  int n_worlds = 1000;
  std::uint64_t master_seed = 0;
  std::int64_t expert_budget = 30000;
  TrainingSchedule schedule;
  std::vector<SettingSpec> settings = default_settings();
  std::vector<RegimeKind> regimes{RegimeKind::Baseline, RegimeKind::ER, RegimeKind::E2R, RegimeKind::AER,
                                  RegimeKind::AE2R};

  ObjectProbs object_probs;
  double termination_prob = kDefaultTerminationProb;
  double transition_noise = kDefaultTransitionNoise;

  QLearningHyper expert;
  double prior_temperature = 1.0;
  StateValueMode state_value = StateValueMode::Max;
  double state_temperature = 1.0;

  StudentHyper student;

  int bootstrap_resamples = 2000;
  double confidence = 0.95;
  double profile_min = -1.0;
  double profile_max = 1.0;
  int profile_points = 201;

  int jobs = 0;  // 0 = hardware concurrency
  std::string output_dir = "results";

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  std::vector<double> profile_thresholds() const;
  const SettingSpec& setting(std::string_view name) const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to a config document. The value is read as JSON when
/// it parses as JSON and as a plain string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Hash over everything that changes per-run numbers (excludes n_worlds,
/// regimes, jobs, output_dir and report-only settings).
std::string config_fingerprint(const ExperimentConfig& config);

// Seed derivation. Every run of world i shares one student stream, so all
// regimes and settings see the same action/dynamics/evaluation randomness.
std::uint64_t world_seed(const ExperimentConfig& config, int world_index);
std::uint64_t expert_seed(std::uint64_t world_seed);
std::uint64_t student_seed(std::uint64_t world_seed);
std::uint64_t prior_seed(std::uint64_t world_seed, const SettingSpec& setting);

}  // namespace softprior

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "softprior/agents.hpp"
#include "softprior/param_table.hpp"
#include "softprior/rng.hpp"

namespace softprior {

enum class PriorMode { Expert, Adversarial, RandomDegraded, StructuralDegraded };

/// A soft action prior: state -> distribution over the four actions.
///
/// Expert and adversarial priors are Boltzmann policies over +Q and -Q of a
/// trained expert; log-probabilities are precomputed for every state of the
/// space they were built on, and states outside it read as uniform.
/// Copies share the precomputed tables.
class ActionPrior {
 public:
  /// Log-probabilities at `s`. A random-degraded prior draws a fresh Bernoulli
  /// on every call, so callers that need one answer per step must keep it.
  const Distribution& query(StateId s);
  double log_prob(StateId s, int action) { return query(s)[static_cast<std::size_t>(action)]; }
  Distribution probs(StateId s);

  PriorMode mode() const { return mode_; }
  double noise_p() const { return noise_p_; }
  double temperature() const { return temperature_; }
  bool is_degraded(StateId s) const {
    const auto i = static_cast<std::size_t>(s);
    return i < degraded_flags_.size() && degraded_flags_[i] != 0;
  }
  const std::vector<StateId>& degraded_states() const { return degraded_states_; }

 private:
  using LogTable = std::vector<Distribution>;

  friend ActionPrior expert_prior(const QTable&, std::size_t, double);
  friend ActionPrior adversarial_policy(const QTable&, std::size_t, double);
  friend ActionPrior random_degrade(const ActionPrior&, const ActionPrior&, double, Rng);
  friend ActionPrior structural_degrade(const ActionPrior&, const ActionPrior&, std::span<const StateId>);

  ActionPrior() = default;
  static const Distribution& lookup(const LogTable& table, StateId s);

  PriorMode mode_ = PriorMode::Expert;
  double temperature_ = 1.0;
  std::shared_ptr<const LogTable> expert_;
  std::shared_ptr<const LogTable> adversarial_;
  double noise_p_ = 0.0;
  Rng rng_{0};
  std::vector<StateId> degraded_states_;
  std::vector<std::uint8_t> degraded_flags_;
};

/// Boltzmann(Q(s, .), tau) at every state of a space with `n_states` ids.
ActionPrior expert_prior(const QTable& q, std::size_t n_states, double temperature = 1.0);
/// Boltzmann(-Q(s, .), tau).
ActionPrior adversarial_policy(const QTable& q, std::size_t n_states, double temperature = 1.0);

/// Per-query mixture: adversarial with probability noise_p, expert otherwise.
ActionPrior random_degrade(const ActionPrior& expert, const ActionPrior& adversarial, double noise_p, Rng rng);

/// Adversarial on `states`, expert elsewhere. Deterministic per state.
ActionPrior structural_degrade(const ActionPrior& expert, const ActionPrior& adversarial,
                               std::span<const StateId> states);

enum class StateValueMode { Max, SoftExpectation };

/// Value of every state the expert has data for: max_a Q(s, a), or the
/// expectation of Q under Boltzmann(Q(s, .), tau) for SoftExpectation.
std::vector<std::pair<StateId, double>> expert_state_values(const QTable& q, StateValueMode mode = StateValueMode::Max,
                                                            double temperature = 1.0);

/// Draws states from softmax(values / temperature) until `n_states` distinct ones are
/// found. Duplicates are rejected; this is realised by renormalising over the
/// states not yet chosen, which has the same law. Result sorted by StateId.
/// Throws std::invalid_argument when n_states exceeds the support.
std::vector<StateId> select_degraded_states(std::span<const std::pair<StateId, double>> values, int n_states,
                                            Rng& rng, double temperature = 1.0);

/// What kind of degradation to apply when building a run's prior.
struct DegradationSpec {
  enum class Kind { None, Random, Structural };
  Kind kind = Kind::None;
  double noise_p = 0.0;
  int n_states = 0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
  bool operator==(const DegradationSpec&) const = default;
};

/// Everything a run needs from the expert: the prior to distil and the
/// degraded state set (empty unless structural).
ActionPrior build_prior(const QTable& q, std::size_t n_states, const DegradationSpec& spec, Rng rng,
                        double temperature = 1.0, StateValueMode value_mode = StateValueMode::Max,
                        double state_temperature = 1.0);

}  // namespace softprior

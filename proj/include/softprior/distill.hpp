#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "softprior/agents.hpp"
#include "softprior/param_table.hpp"
#include "softprior/priors.hpp"

namespace softprior {

enum class RegimeKind { Baseline, ER, E2R, AER, AE2R };

std::string_view to_string(RegimeKind kind);
/// Throws std::invalid_argument for unknown names.
RegimeKind parse_regime(std::string_view name);

constexpr bool is_adaptive(RegimeKind k) { return k == RegimeKind::AER || k == RegimeKind::AE2R; }
// E2R-style regimes shape with the successor step and carry the cross-entropy loss.
constexpr bool uses_successor(RegimeKind k) { return k == RegimeKind::E2R || k == RegimeKind::AE2R; }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Per-state prior weights omega(s) = sigmoid(psi(s)); psi starts at zero, so
/// unvisited states read 0.5.
class PriorWeights {
 public:
  explicit PriorWeights(std::size_t n_states) : logits_(n_states) {}

  double weight(StateId s) const { return sigmoid(logits_[s][0]); }
  double logit(StateId s) const { return logits_[s][0]; }
  double& logit_ref(StateId s) { return logits_.at(s)[0]; }
  const ParamTable<1>& logits() const { return logits_; }

 private:
  ParamTable<1> logits_;
};

/// What the log-prior in a bonus is measured against. Uniform uses
/// log pi0(a|s) - log(1/|A|), so an uninformative prior adds nothing; None
/// uses the raw log pi0(a|s), which under termination acts as a per-step cost.
enum class BonusReference { Uniform, None };

std::string_view to_string(BonusReference reference);
BonusReference parse_bonus_reference(std::string_view name);

/// Residual the prior weights regress onto omega * log pi0. CriticMinusTarget
/// is E_t = V(s_t) - r_t - gamma V(s_{t+1}); TargetMinusCritic is its negation,
/// the ordinary bonus-free TD error.
enum class WeightResidual { CriticMinusTarget, TargetMinusCritic };

std::string_view to_string(WeightResidual residual);
WeightResidual parse_weight_residual(std::string_view name);

struct RegimeOptions {
  double weight_lr = 0.1;
  BonusReference bonus_reference = BonusReference::None;
  WeightResidual weight_residual = WeightResidual::TargetMinusCritic;
};

/// A distillation regime: which bonus/loss pair to use, the prior it reads,
/// and the learned weights for the adaptive variants.
class DistillRegime {
 public:
  /// `prior` may be empty only for Baseline. Adaptive kinds get fresh weights.
  DistillRegime(RegimeKind kind, std::optional<ActionPrior> prior, std::size_t n_states, RegimeOptions options = {});

  RegimeKind kind() const { return kind_; }
  bool has_prior() const { return prior_.has_value(); }
  ActionPrior& prior() { return *prior_; }
  const ActionPrior& prior() const { return *prior_; }
  bool has_weights() const { return weights_.has_value(); }
  PriorWeights& weights() { return *weights_; }
  const PriorWeights& weights() const { return *weights_; }
  double weight_lr() const { return options_.weight_lr; }
  const RegimeOptions& options() const { return options_; }

  /// log pi0(a|s) as it enters bonuses and the weight loss.
  double shaped_log_prior(double log_prob) const;

  /// Weight multiplier at s: omega(s) for adaptive regimes, 1 otherwise.
  double scale(StateId s) const { return weights_ ? weights_->weight(s) : 1.0; }

 private:
  RegimeKind kind_;
  std::optional<ActionPrior> prior_;
  std::optional<PriorWeights> weights_;
  RegimeOptions options_;
};

/// The prior's answer at one acting step, queried once and shared by the
/// bonus, the auxiliary loss and the weight loss.
struct StepPrior {
  StateId state = kNoState;
  int action = 0;
  Distribution log_probs{};
};

/// Queries the prior once per acting step of the trajectory.
std::vector<StepPrior> query_prior(ActionPrior& prior, const Trajectory& trajectory);

/// Reward bonus B_t. `next` is the successor step, or null on the last transition.
/// Log-priors below are shifted by the regime's BonusReference.
///   Baseline 0;  ER log pi0(a_t|s_t);  AER omega(s_t) log pi0(a_t|s_t);
///   E2R log pi0(a_{t+1}|s_{t+1});  AE2R omega(s_{t+1}) log pi0(a_{t+1}|s_{t+1});
///   successor-based bonuses are 0 on the last transition.
double bonus(const DistillRegime& regime, const StepPrior& current, const StepPrior* next);

/// Cross-entropy H^X_s(pi || pi0) = -sum_a pi(a|s) log pi0(a|s).
double cross_entropy(const Distribution& policy_probs, const Distribution& prior_log_probs);

/// Auxiliary loss at s_t: H^X for E2R, omega(s_t) H^X for AE2R, 0 otherwise.
double aux_loss(const DistillRegime& regime, const SoftmaxPolicy& policy, const StepPrior& current);
/// Its gradient w.r.t. the logits of s_t.
ActionGrad aux_loss_gradient(const DistillRegime& regime, const SoftmaxPolicy& policy, const StepPrior& current);

/// E_t(phi) = V(s_t) - r_t - gamma V(s_{t+1}), V(s_{t+1}) masked when done.
double bonus_free_td_error(const Critic& critic, const Transition& tr);

/// E_t or -E_t, per the regime's WeightResidual.
double weight_residual(const DistillRegime& regime, const Critic& critic, const Transition& tr);

/// The state whose weight enters step t's weight loss and the log-prior term it
/// scales: (s_{t+1}, a_{t+1}) for AE2R, (s_t, a_t) for AER. Empty when the
/// regime is not adaptive or AE2R is at the last transition.
struct WeightTerm {
  StateId state;
  double log_prior;
};
std::optional<WeightTerm> weight_term(const DistillRegime& regime, const StepPrior& current, const StepPrior* next);

/// mean_t [E_t(phi) - omega(s*) log pi0(a*|s*)]^2 over the trajectory, with
/// E_t replaced by weight_residual.
double weight_loss(const DistillRegime& regime, const Critic& critic, const Trajectory& trajectory,
                   std::span<const StepPrior> steps);

/// Per-step (state, dL/dpsi(state)) contributions of weight_loss; critic frozen.
std::vector<std::pair<StateId, double>> weight_gradient(const DistillRegime& regime, const Critic& critic,
                                                        const Trajectory& trajectory,
                                                        std::span<const StepPrior> steps);

/// One gradient step on weight_loss w.r.t. psi with rate regime.weight_lr().
void weight_step(DistillRegime& regime, const Critic& critic, const Trajectory& trajectory,
                 std::span<const StepPrior> steps);

// ---------------------------------------------------------------------------
// Training loop

struct StudentHyper {
  double policy_lr = 0.05;
  double critic_lr = 0.1;
  double weight_lr = 0.1;
  double gamma = 0.99;
  double temperature = 1.0;
  BonusReference bonus_reference = BonusReference::None;
  WeightResidual weight_residual = WeightResidual::TargetMinusCritic;

  RegimeOptions regime_options() const { return {weight_lr, bonus_reference, weight_residual}; }
};

struct TrainingSchedule {
  std::int64_t updates = 30000;
  int eval_every = 300;
  int eval_episodes = 1;
  int max_episode_steps = kDefaultEpisodeCap;
};

struct EvalPoint {
  int eval_idx = 0;
  std::int64_t update_step = 0;
  double eval_return = 0.0;
  bool operator==(const EvalPoint&) const = default;
};

/// Mean omega over distinct degraded / non-degraded states met in the
/// evaluation episodes of one checkpoint. Means are NaN when the count is 0.
struct WeightLog {
  int eval_idx = 0;
  double mean_w_degraded = 0.0;
  double mean_w_nondegraded = 0.0;
  int n_deg_visited = 0;
  int n_nondeg_visited = 0;
};

struct RunRecord {
  RegimeKind regime = RegimeKind::Baseline;
  std::vector<EvalPoint> curve;
  std::vector<WeightLog> weights;  // adaptive regimes only
  std::int64_t env_steps = 0;
};

/// Trains a fresh actor-critic under `regime`, one episode per update:
/// sample with pi, compute bonuses, policy step, critic step, then (adaptive)
/// weight step against the updated critic. Evaluates the greedy policy every
/// `eval_every` updates. All randomness comes from `rng` (split into policy,
/// dynamics and evaluation streams) and from the regime's prior.
RunRecord run_training(const GridWorld& world, const StateSpace& space, DistillRegime& regime,
                       const StudentHyper& hyper, const TrainingSchedule& schedule, const Rng& rng);

}  // namespace softprior

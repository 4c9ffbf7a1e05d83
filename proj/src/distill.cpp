#include "softprior/distill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softprior {

std::string_view to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::Baseline: return "Baseline";
    case RegimeKind::ER: return "ER";
    case RegimeKind::E2R: return "E2R";
    case RegimeKind::AER: return "AER";
    case RegimeKind::AE2R: return "AE2R";
  }
  return "?";
}

RegimeKind parse_regime(std::string_view name) {
  for (auto k : {RegimeKind::Baseline, RegimeKind::ER, RegimeKind::E2R, RegimeKind::AER, RegimeKind::AE2R})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

std::string_view to_string(BonusReference reference) {
  return reference == BonusReference::Uniform ? "uniform" : "none";
}

BonusReference parse_bonus_reference(std::string_view name) {
  if (name == "uniform") return BonusReference::Uniform;
  if (name == "none") return BonusReference::None;
  throw std::invalid_argument("unknown bonus reference '" + std::string(name) + "'");
}

std::string_view to_string(WeightResidual residual) {
  return residual == WeightResidual::CriticMinusTarget ? "critic_minus_target" : "target_minus_critic";
}

WeightResidual parse_weight_residual(std::string_view name) {
  if (name == "critic_minus_target") return WeightResidual::CriticMinusTarget;
  if (name == "target_minus_critic") return WeightResidual::TargetMinusCritic;
  throw std::invalid_argument("unknown weight residual '" + std::string(name) + "'");
}

DistillRegime::DistillRegime(RegimeKind kind, std::optional<ActionPrior> prior, std::size_t n_states,
                             RegimeOptions options)
    : kind_(kind), prior_(std::move(prior)), options_(options) {
  if (kind != RegimeKind::Baseline && !prior_) throw std::invalid_argument("distillation regime needs a prior");
  if (is_adaptive(kind)) weights_.emplace(n_states);
}

double DistillRegime::shaped_log_prior(double log_prob) const {
  return options_.bonus_reference == BonusReference::Uniform ? log_prob + std::log(static_cast<double>(kNumActions)) : log_prob;
}

std::vector<StepPrior> query_prior(ActionPrior& prior, const Trajectory& trajectory) {
  std::vector<StepPrior> steps;
  steps.reserve(trajectory.size());
  for (const Transition& tr : trajectory) steps.push_back({tr.state, tr.action, prior.query(tr.state)});
  return steps;
}

double bonus(const DistillRegime& regime, const StepPrior& current, const StepPrior* next) {
  const auto lp = [&](const StepPrior& sp) {
    return regime.shaped_log_prior(sp.log_probs[static_cast<std::size_t>(sp.action)]);
  };
  switch (regime.kind()) {
    case RegimeKind::Baseline: return 0.0;
    case RegimeKind::ER: return lp(current);
    case RegimeKind::AER: return regime.scale(current.state) * lp(current);
    case RegimeKind::E2R: return next ? lp(*next) : 0.0;
    case RegimeKind::AE2R: return next ? regime.scale(next->state) * lp(*next) : 0.0;
  }
  return 0.0;
}

double cross_entropy(const Distribution& policy_probs, const Distribution& prior_log_probs) {
  double h = 0.0;
  for (int a = 0; a < kNumActions; ++a) h -= policy_probs[a] * prior_log_probs[a];
  return h;
}

double aux_loss(const DistillRegime& regime, const SoftmaxPolicy& policy, const StepPrior& current) {
  if (!uses_successor(regime.kind())) return 0.0;
  return regime.scale(current.state) * cross_entropy(policy.probs(current.state), current.log_probs);
}

ActionGrad aux_loss_gradient(const DistillRegime& regime, const SoftmaxPolicy& policy, const StepPrior& current) {
  ActionGrad g{};
  if (!uses_successor(regime.kind())) return g;
  const Distribution p = policy.probs(current.state);
  const double h = cross_entropy(p, current.log_probs);
  const double c = regime.scale(current.state) / policy.temperature();
  // d/dlogit_b sum_a pi_a (-lp_a) = pi_b (-lp_b - H) / tau
  for (int b = 0; b < kNumActions; ++b) g[b] = c * p[b] * (-current.log_probs[b] - h);
  return g;
}

double bonus_free_td_error(const Critic& critic, const Transition& tr) {
  const double next_value = tr.done ? 0.0 : critic.value(tr.next_state);
  return critic.value(tr.state) - tr.reward - critic.gamma() * next_value;
}

double weight_residual(const DistillRegime& regime, const Critic& critic, const Transition& tr) {
  const double e = bonus_free_td_error(critic, tr);
  return regime.options().weight_residual == WeightResidual::CriticMinusTarget ? e : -e;
}

std::optional<WeightTerm> weight_term(const DistillRegime& regime, const StepPrior& current, const StepPrior* next) {
  switch (regime.kind()) {
    case RegimeKind::AER:
      return WeightTerm{current.state,
                        regime.shaped_log_prior(current.log_probs[static_cast<std::size_t>(current.action)])};
    case RegimeKind::AE2R:
      if (!next) return std::nullopt;
      return WeightTerm{next->state, regime.shaped_log_prior(next->log_probs[static_cast<std::size_t>(next->action)])};
    default: return std::nullopt;
  }
}

namespace {

void check_lengths(const Trajectory& trajectory, std::span<const StepPrior> steps) {
  if (steps.size() != trajectory.size()) throw std::invalid_argument("prior steps must match trajectory length");
}

}  // namespace

double weight_loss(const DistillRegime& regime, const Critic& critic, const Trajectory& trajectory,
                   std::span<const StepPrior> steps) {
  check_lengths(trajectory, steps);
  if (!regime.has_weights()) return 0.0;
  double loss = 0.0;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const StepPrior* next = t + 1 < steps.size() ? &steps[t + 1] : nullptr;
    const auto term = weight_term(regime, steps[t], next);
    const double shaped = term ? regime.weights().weight(term->state) * term->log_prior : 0.0;
    const double err = weight_residual(regime, critic, trajectory[t]) - shaped;
    loss += err * err;
  }
  return trajectory.empty() ? 0.0 : loss / static_cast<double>(trajectory.size());
}

std::vector<std::pair<StateId, double>> weight_gradient(const DistillRegime& regime, const Critic& critic,
                                                        const Trajectory& trajectory,
                                                        std::span<const StepPrior> steps) {
  check_lengths(trajectory, steps);
  std::vector<std::pair<StateId, double>> grads;
  if (!regime.has_weights()) return grads;
  grads.reserve(trajectory.size());
  const double scale = 2.0 / static_cast<double>(trajectory.size());
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const StepPrior* next = t + 1 < steps.size() ? &steps[t + 1] : nullptr;
    const auto term = weight_term(regime, steps[t], next);
    if (!term) continue;
    const double w = regime.weights().weight(term->state);
    const double err = weight_residual(regime, critic, trajectory[t]) - w * term->log_prior;
    // d/dpsi (E - sigmoid(psi) L)^2 = -2 (E - w L) L w (1 - w)
    grads.emplace_back(term->state, -scale * err * term->log_prior * w * (1.0 - w));
  }
  return grads;
}

void weight_step(DistillRegime& regime, const Critic& critic, const Trajectory& trajectory,
                 std::span<const StepPrior> steps) {
  const auto grads = weight_gradient(regime, critic, trajectory, steps);
  for (const auto& [s, g] : grads) regime.weights().logit_ref(s) -= regime.weight_lr() * g;
}

// ---------------------------------------------------------------------------

RunRecord run_training(const GridWorld& world, const StateSpace& space, DistillRegime& regime,
                       const StudentHyper& hyper, const TrainingSchedule& schedule, const Rng& rng) {
  if (schedule.eval_every <= 0 || schedule.eval_episodes <= 0 || schedule.updates < 0)
    throw std::invalid_argument("invalid training schedule");
  const std::size_t n_states = space.size();
  SoftmaxPolicy policy(n_states, hyper.temperature);
  Critic critic(n_states, hyper.gamma);
  Rng policy_rng = rng.split("policy");
  Rng env_rng = rng.split("dynamics");
  Rng eval_rng = rng.split("eval");

  RunRecord record;
  record.regime = regime.kind();
  std::vector<StepPrior> steps;
  std::vector<ActionGrad> aux;
  std::vector<std::uint8_t> seen(n_states, 0);

  for (std::int64_t update = 1; update <= schedule.updates; ++update) {
    Trajectory traj = sample_episode(world, space, policy, policy_rng, env_rng, schedule.max_episode_steps);
    record.env_steps += static_cast<std::int64_t>(traj.size());

    steps.clear();
    aux.clear();
    if (regime.has_prior()) {
      steps = query_prior(regime.prior(), traj);
      for (std::size_t t = 0; t < traj.size(); ++t)
        traj[t].bonus = bonus(regime, steps[t], t + 1 < steps.size() ? &steps[t + 1] : nullptr);
      if (uses_successor(regime.kind())) {
        aux.reserve(traj.size());
        for (const StepPrior& sp : steps) aux.push_back(aux_loss_gradient(regime, policy, sp));
      }
    }

    const auto advantages = td1_advantage(traj, critic);
    policy_gradient_step(policy, traj, advantages, aux, hyper.policy_lr);
    critic_step(critic, traj, hyper.critic_lr);
    if (regime.has_weights()) weight_step(regime, critic, traj, steps);

    if (update % schedule.eval_every != 0) continue;

    const int eval_idx = static_cast<int>(update / schedule.eval_every) - 1;
    double total = 0.0;
    std::vector<StateId> visited;
    for (int e = 0; e < schedule.eval_episodes; ++e) {
      const GreedyEpisode ep = run_greedy_episode(world, space, policy, eval_rng, schedule.max_episode_steps);
      total += ep.total_reward;
      for (StateId s : ep.states) {
        if (!seen[static_cast<std::size_t>(s)]) {
          seen[static_cast<std::size_t>(s)] = 1;
          visited.push_back(s);
        }
      }
    }
    record.curve.push_back({eval_idx, update, total / schedule.eval_episodes});

    if (regime.has_weights()) {
      WeightLog log{eval_idx, 0.0, 0.0, 0, 0};
      for (StateId s : visited) {
        const double w = regime.weights().weight(s);
        if (regime.prior().is_degraded(s)) {
          log.mean_w_degraded += w;
          ++log.n_deg_visited;
        } else {
          log.mean_w_nondegraded += w;
          ++log.n_nondeg_visited;
        }
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      log.mean_w_degraded = log.n_deg_visited ? log.mean_w_degraded / log.n_deg_visited : nan;
      log.mean_w_nondegraded = log.n_nondeg_visited ? log.mean_w_nondegraded / log.n_nondeg_visited : nan;
      record.weights.push_back(log);
    }
    for (StateId s : visited) seen[static_cast<std::size_t>(s)] = 0;
  }
  return record;
}

}  // namespace softprior

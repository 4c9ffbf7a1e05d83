#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "softprior/env.hpp"
#include "softprior/param_table.hpp"
#include "softprior/rng.hpp"

namespace softprior {

using Distribution = std::array<double, kNumActions>;
using ActionGrad = std::array<double, kNumActions>;

/// p_a = exp(q_a / tau) / sum_b exp(q_b / tau), max-shifted.
/// Throws std::invalid_argument for tau <= 0.
Distribution boltzmann_distribution(std::span<const double, kNumActions> q, double temperature);
/// log of boltzmann_distribution, computed without the exp/log round trip.
Distribution log_boltzmann(std::span<const double, kNumActions> q, double temperature);

/// argmax with ties broken toward the lowest index.
int greedy_action(std::span<const double, kNumActions> values);

inline constexpr int kDefaultEpisodeCap = 1000;

// ---------------------------------------------------------------------------
// Q-learning expert

struct QLearningHyper {
  double alpha = 0.1;
  double epsilon = 0.1;
  double gamma = 0.99;
  int max_episode_steps = kDefaultEpisodeCap;
};

struct QLearningResult {
  QTable table;
  std::vector<std::int64_t> visits;  // per StateId, count of updates
  std::int64_t transitions = 0;
  std::int64_t episodes = 0;
};

/// One-step Q-learning with epsilon-greedy exploration (random tie-break),
/// consuming exactly `budget` transitions. Episodes restart at the initial
/// position after termination or the step cap.
QLearningResult train_q_learning(const GridWorld& world, const StateSpace& space, std::int64_t budget,
                                 const QLearningHyper& hyper, Rng& rng);

// ---------------------------------------------------------------------------
// Actor-critic student

class SoftmaxPolicy {
 public:
  explicit SoftmaxPolicy(std::size_t n_states, double temperature = 1.0);

  Distribution probs(StateId s) const { return boltzmann_distribution(logits_[s], temperature_); }
  int sample(StateId s, Rng& rng) const;
  int greedy(StateId s) const { return greedy_action(logits_[s]); }

  double temperature() const { return temperature_; }
  ParamTable<kNumActions>& logits() { return logits_; }
  const ParamTable<kNumActions>& logits() const { return logits_; }

 private:
  ParamTable<kNumActions> logits_;
  double temperature_;
};

class Critic {
 public:
  explicit Critic(std::size_t n_states, double gamma = 0.99);

  double value(StateId s) const { return values_[s][0]; }
  double& value_ref(StateId s) { return values_.at(s)[0]; }
  double gamma() const { return gamma_; }
  const ParamTable<1>& values() const { return values_; }

 private:
  ParamTable<1> values_;
  double gamma_;
};

struct Transition {
  StateId state = kNoState;
  int action = 0;
  double reward = 0.0;
  StateId next_state = kNoState;
  bool done = false;
  double bonus = 0.0;
};

/// done is true only on the last element; a capped episode ends with done=false.
using Trajectory = std::vector<Transition>;

/// Samples one episode with the stochastic policy from the world's start.
/// Action choice draws from `policy_rng`, dynamics from `env_rng`.
Trajectory sample_episode(const GridWorld& world, const StateSpace& space, const SoftmaxPolicy& policy,
                          Rng& policy_rng, Rng& env_rng, int max_steps = kDefaultEpisodeCap);

struct GreedyEpisode {
  double total_reward = 0.0;
  std::vector<StateId> states;  // acting states in visit order
};

GreedyEpisode run_greedy_episode(const GridWorld& world, const StateSpace& space, const SoftmaxPolicy& policy,
                                 Rng& env_rng, int max_steps = kDefaultEpisodeCap);

/// TD(1) advantage: discounted return (reward + bonus) to episode end minus V(s_t).
std::vector<double> td1_advantage(const Trajectory& trajectory, const Critic& critic);

/// Per-step gradient, w.r.t. the logits of s_t, of
///   sum_t [ -log pi(a_t | s_t) * advantage_t ] + sum_t aux_t,
/// where aux_grad[t] is the caller-supplied gradient of the auxiliary loss at s_t
/// (empty span means no auxiliary loss).
std::vector<ActionGrad> policy_surrogate_gradient(const SoftmaxPolicy& policy, const Trajectory& trajectory,
                                                  std::span<const double> advantages,
                                                  std::span<const ActionGrad> aux_grad);

/// Descends the surrogate above: one gradient step for the whole episode.
void policy_gradient_step(SoftmaxPolicy& policy, const Trajectory& trajectory, std::span<const double> advantages,
                          std::span<const ActionGrad> aux_grad, double learning_rate);

/// Target r_t + B_t + gamma * V(s_{t+1}), with V(s_{t+1}) masked on done.
double critic_target(const Critic& critic, const Transition& tr);

/// mean_t (V(s_t) - target_t)^2 with targets taken from `target_critic`.
double critic_loss(const Critic& critic, const Critic& target_critic, const Trajectory& trajectory);

/// Per-step derivative of critic_loss w.r.t. V(s_t), targets held fixed.
std::vector<double> critic_gradient(const Critic& critic, const Trajectory& trajectory);

void critic_step(Critic& critic, const Trajectory& trajectory, double learning_rate);

}  // namespace softprior

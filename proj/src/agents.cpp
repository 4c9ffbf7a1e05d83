#include "softprior/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softprior {

Distribution boltzmann_distribution(std::span<const double, kNumActions> q, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("boltzmann temperature must be positive");
  const double top = *std::max_element(q.begin(), q.end());
  Distribution p;
  double total = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    p[a] = std::exp((q[a] - top) / temperature);
    total += p[a];
  }
  for (double& x : p) x /= total;
  return p;
}

Distribution log_boltzmann(std::span<const double, kNumActions> q, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("boltzmann temperature must be positive");
  const double top = *std::max_element(q.begin(), q.end());
  double total = 0.0;
  for (int a = 0; a < kNumActions; ++a) total += std::exp((q[a] - top) / temperature);
  const double log_norm = std::log(total);
  Distribution lp;
  for (int a = 0; a < kNumActions; ++a) lp[a] = (q[a] - top) / temperature - log_norm;
  return lp;
}

int greedy_action(std::span<const double, kNumActions> values) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a)
    if (values[a] > values[best]) best = a;
  return best;
}

// ---------------------------------------------------------------------------

namespace {

int epsilon_greedy(const QTable::Row& q, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) return static_cast<int>(rng.uniform_int(kNumActions));
  const double top = *std::max_element(q.begin(), q.end());
  int ties[kNumActions];
  int n = 0;
  for (int a = 0; a < kNumActions; ++a)
    if (q[a] == top) ties[n++] = a;
  return n == 1 ? ties[0] : ties[rng.uniform_int(static_cast<std::uint32_t>(n))];
}

}  // namespace

QLearningResult train_q_learning(const GridWorld& world, const StateSpace& space, std::int64_t budget,
                                 const QLearningHyper& hyper, Rng& rng) {
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");
  QLearningResult result{QTable(space.size()), std::vector<std::int64_t>(space.size(), 0), 0, 0};
  if (budget == 0) return result;

  Rng explore = rng.split("explore");
  Rng dynamics = rng.split("dynamics");
  QTable& q = result.table;

  Position pos = world.initial_position();
  int episode_steps = 0;
  result.episodes = 1;
  for (std::int64_t t = 0; t < budget; ++t) {
    const StateId s = space.at(pos);
    const int a = epsilon_greedy(q[s], hyper.epsilon, explore);
    const StepOutcome out = step(world, pos, static_cast<Action>(a), dynamics);
    const StateId next = space.at(out.next_position);

    double target = out.reward;
    if (!out.done) {
      const auto& next_row = q[next];
      target += hyper.gamma * *std::max_element(next_row.begin(), next_row.end());
    }
    double& cell = q.at(s)[a];
    cell += hyper.alpha * (target - cell);
    ++result.visits[static_cast<std::size_t>(s)];
    ++result.transitions;

    ++episode_steps;
    if (out.done || episode_steps >= hyper.max_episode_steps) {
      pos = world.initial_position();
      episode_steps = 0;
      if (t + 1 < budget) ++result.episodes;
    } else {
      pos = out.next_position;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

SoftmaxPolicy::SoftmaxPolicy(std::size_t n_states, double temperature)
    : logits_(n_states), temperature_(temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("policy temperature must be positive");
}

int SoftmaxPolicy::sample(StateId s, Rng& rng) const {
  const Distribution p = probs(s);
  const double u = rng.uniform();
  double acc = 0.0;
  for (int a = 0; a < kNumActions - 1; ++a) {
    acc += p[a];
    if (u < acc) return a;
  }
  return kNumActions - 1;
}

Critic::Critic(std::size_t n_states, double gamma) : values_(n_states), gamma_(gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("discount must be in (0, 1]");
}

Trajectory sample_episode(const GridWorld& world, const StateSpace& space, const SoftmaxPolicy& policy,
                          Rng& policy_rng, Rng& env_rng, int max_steps) {
  Trajectory traj;
  Position pos = world.initial_position();
  for (int t = 0; t < max_steps; ++t) {
    const StateId s = space.at(pos);
    const int a = policy.sample(s, policy_rng);
    const StepOutcome out = step(world, pos, static_cast<Action>(a), env_rng);
    traj.push_back({s, a, out.reward, space.at(out.next_position), out.done, 0.0});
    if (out.done) break;
    pos = out.next_position;
  }
  return traj;
}

GreedyEpisode run_greedy_episode(const GridWorld& world, const StateSpace& space, const SoftmaxPolicy& policy,
                                 Rng& env_rng, int max_steps) {
  GreedyEpisode ep;
  Position pos = world.initial_position();
  for (int t = 0; t < max_steps; ++t) {
    const StateId s = space.at(pos);
    ep.states.push_back(s);
    const StepOutcome out = step(world, pos, static_cast<Action>(policy.greedy(s)), env_rng);
    ep.total_reward += out.reward;
    if (out.done) break;
    pos = out.next_position;
  }
  return ep;
}

std::vector<double> td1_advantage(const Trajectory& trajectory, const Critic& critic) {
  std::vector<double> adv(trajectory.size());
  double ret = 0.0;
  for (std::size_t i = trajectory.size(); i-- > 0;) {
    const Transition& tr = trajectory[i];
    ret = tr.reward + tr.bonus + critic.gamma() * ret;
    adv[i] = ret - critic.value(tr.state);
  }
  return adv;
}

std::vector<ActionGrad> policy_surrogate_gradient(const SoftmaxPolicy& policy, const Trajectory& trajectory,
                                                  std::span<const double> advantages,
                                                  std::span<const ActionGrad> aux_grad) {
  if (advantages.size() != trajectory.size() || (!aux_grad.empty() && aux_grad.size() != trajectory.size()))
    throw std::invalid_argument("policy gradient: length mismatch");
  const double inv_tau = 1.0 / policy.temperature();
  std::vector<ActionGrad> grads(trajectory.size());
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const Transition& tr = trajectory[t];
    const Distribution p = policy.probs(tr.state);
    // d/dlogit_b [-log pi(a|s)] = (pi_b - [a == b]) / tau
    for (int b = 0; b < kNumActions; ++b) {
      const double indicator = b == tr.action ? 1.0 : 0.0;
      grads[t][b] = (p[b] - indicator) * inv_tau * advantages[t];
      if (!aux_grad.empty()) grads[t][b] += aux_grad[t][b];
    }
  }
  return grads;
}

void policy_gradient_step(SoftmaxPolicy& policy, const Trajectory& trajectory, std::span<const double> advantages,
                          std::span<const ActionGrad> aux_grad, double learning_rate) {
  const auto grads = policy_surrogate_gradient(policy, trajectory, advantages, aux_grad);
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    auto& row = policy.logits().at(trajectory[t].state);
    for (int b = 0; b < kNumActions; ++b) row[b] -= learning_rate * grads[t][b];
  }
}

double critic_target(const Critic& critic, const Transition& tr) {
  const double next_value = tr.done ? 0.0 : critic.value(tr.next_state);
  return tr.reward + tr.bonus + critic.gamma() * next_value;
}

double critic_loss(const Critic& critic, const Critic& target_critic, const Trajectory& trajectory) {
  double loss = 0.0;
  for (const Transition& tr : trajectory) {
    const double err = critic.value(tr.state) - critic_target(target_critic, tr);
    loss += err * err;
  }
  return trajectory.empty() ? 0.0 : loss / static_cast<double>(trajectory.size());
}

std::vector<double> critic_gradient(const Critic& critic, const Trajectory& trajectory) {
  std::vector<double> grads(trajectory.size());
  const double scale = 2.0 / static_cast<double>(std::max<std::size_t>(trajectory.size(), 1));
  for (std::size_t t = 0; t < trajectory.size(); ++t)
    grads[t] = scale * (critic.value(trajectory[t].state) - critic_target(critic, trajectory[t]));
  return grads;
}

void critic_step(Critic& critic, const Trajectory& trajectory, double learning_rate) {
  const auto grads = critic_gradient(critic, trajectory);
  for (std::size_t t = 0; t < trajectory.size(); ++t)
    critic.value_ref(trajectory[t].state) -= learning_rate * grads[t];
}

}  // namespace softprior

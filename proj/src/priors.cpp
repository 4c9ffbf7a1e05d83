#include "softprior/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace softprior {

namespace {

const Distribution kUniformLog{-std::numbers::ln2 * 2, -std::numbers::ln2 * 2, -std::numbers::ln2 * 2,
                               -std::numbers::ln2 * 2};

std::shared_ptr<const std::vector<Distribution>> boltzmann_table(const QTable& q, std::size_t n_states,
                                                                 double temperature, double sign) {
  auto table = std::make_shared<std::vector<Distribution>>(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    const auto& row = q[static_cast<StateId>(s)];
    Distribution signed_row;
    for (int a = 0; a < kNumActions; ++a) signed_row[a] = sign * row[a];
    (*table)[s] = log_boltzmann(signed_row, temperature);
  }
  return table;
}

}  // namespace

const Distribution& ActionPrior::lookup(const LogTable& table, StateId s) {
  const auto i = static_cast<std::size_t>(s);
  return i < table.size() ? table[i] : kUniformLog;
}

const Distribution& ActionPrior::query(StateId s) {
  switch (mode_) {
    case PriorMode::Expert: return lookup(*expert_, s);
    case PriorMode::Adversarial: return lookup(*adversarial_, s);
    case PriorMode::RandomDegraded:
      return rng_.uniform() < noise_p_ ? lookup(*adversarial_, s) : lookup(*expert_, s);
    case PriorMode::StructuralDegraded:
      return is_degraded(s) ? lookup(*adversarial_, s) : lookup(*expert_, s);
  }
  return kUniformLog;
}

Distribution ActionPrior::probs(StateId s) {
  Distribution p = query(s);
  for (double& x : p) x = std::exp(x);
  return p;
}

ActionPrior expert_prior(const QTable& q, std::size_t n_states, double temperature) {
  ActionPrior prior;
  prior.mode_ = PriorMode::Expert;
  prior.temperature_ = temperature;
  prior.expert_ = boltzmann_table(q, n_states, temperature, 1.0);
  prior.adversarial_ = boltzmann_table(q, n_states, temperature, -1.0);
  return prior;
}

ActionPrior adversarial_policy(const QTable& q, std::size_t n_states, double temperature) {
  ActionPrior prior = expert_prior(q, n_states, temperature);
  prior.mode_ = PriorMode::Adversarial;
  return prior;
}

ActionPrior random_degrade(const ActionPrior& expert, const ActionPrior& adversarial, double noise_p, Rng rng) {
  if (!(noise_p >= 0.0 && noise_p <= 1.0)) throw std::invalid_argument("prior noise must lie in [0, 1]");
  ActionPrior prior;
  prior.mode_ = PriorMode::RandomDegraded;
  prior.temperature_ = expert.temperature_;
  prior.expert_ = expert.mode_ == PriorMode::Adversarial ? expert.adversarial_ : expert.expert_;
  prior.adversarial_ = adversarial.mode_ == PriorMode::Expert ? adversarial.expert_ : adversarial.adversarial_;
  prior.noise_p_ = noise_p;
  prior.rng_ = std::move(rng);
  return prior;
}

ActionPrior structural_degrade(const ActionPrior& expert, const ActionPrior& adversarial,
                               std::span<const StateId> states) {
  ActionPrior prior;
  prior.mode_ = PriorMode::StructuralDegraded;
  prior.temperature_ = expert.temperature_;
  prior.expert_ = expert.mode_ == PriorMode::Adversarial ? expert.adversarial_ : expert.expert_;
  prior.adversarial_ = adversarial.mode_ == PriorMode::Expert ? adversarial.expert_ : adversarial.adversarial_;
  prior.degraded_states_.assign(states.begin(), states.end());
  std::sort(prior.degraded_states_.begin(), prior.degraded_states_.end());
  prior.degraded_states_.erase(std::unique(prior.degraded_states_.begin(), prior.degraded_states_.end()),
                               prior.degraded_states_.end());
  for (StateId s : prior.degraded_states_) {
    if (s < 0) throw std::invalid_argument("degraded state id must be non-negative");
    const auto i = static_cast<std::size_t>(s);
    if (i >= prior.degraded_flags_.size()) prior.degraded_flags_.resize(i + 1, 0);
    prior.degraded_flags_[i] = 1;
  }
  return prior;
}

std::vector<std::pair<StateId, double>> expert_state_values(const QTable& q, StateValueMode mode,
                                                            double temperature) {
  std::vector<std::pair<StateId, double>> values;
  for (StateId s : q.states()) {
    const auto& row = q[s];
    double v = 0.0;
    if (mode == StateValueMode::Max) {
      v = *std::max_element(row.begin(), row.end());
    } else {
      const Distribution p = boltzmann_distribution(row, temperature);
      for (int a = 0; a < kNumActions; ++a) v += p[a] * row[a];
    }
    values.emplace_back(s, v);
  }
  return values;
}

std::vector<StateId> select_degraded_states(std::span<const std::pair<StateId, double>> values, int n_states,
                                            Rng& rng, double temperature) {
  if (n_states < 0) throw std::invalid_argument("n_states must be non-negative");
  if (static_cast<std::size_t>(n_states) > values.size())
    throw std::invalid_argument("cannot degrade " + std::to_string(n_states) + " states: only " +
                                std::to_string(values.size()) + " available");
  if (!(temperature > 0.0)) throw std::invalid_argument("state temperature must be positive");

  std::vector<std::uint8_t> taken(values.size(), 0);
  std::vector<double> weights(values.size());
  std::vector<StateId> chosen;
  chosen.reserve(static_cast<std::size_t>(n_states));
  while (static_cast<int>(chosen.size()) < n_states) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!taken[i]) top = std::max(top, values[i].second);
    for (std::size_t i = 0; i < values.size(); ++i)
      weights[i] = taken[i] ? 0.0 : std::exp((values[i].second - top) / temperature);
    const std::size_t pick = rng.categorical(weights);
    taken[pick] = 1;
    chosen.push_back(values[pick].first);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

void DegradationSpec::validate() const {
  switch (kind) {
    case Kind::None: break;
    case Kind::Random:
      if (!(noise_p >= 0.0 && noise_p <= 1.0)) throw std::invalid_argument("noise_p must lie in [0, 1]");
      break;
    case Kind::Structural:
      if (n_states <= 0) throw std::invalid_argument("n_states must be positive");
      break;
  }
}

ActionPrior build_prior(const QTable& q, std::size_t n_states, const DegradationSpec& spec, Rng rng,
                        double temperature, StateValueMode value_mode, double state_temperature) {
  spec.validate();
  ActionPrior expert = expert_prior(q, n_states, temperature);
  switch (spec.kind) {
    case DegradationSpec::Kind::None: return expert;
    case DegradationSpec::Kind::Random:
      return random_degrade(expert, adversarial_policy(q, n_states, temperature), spec.noise_p, rng.split("query"));
    case DegradationSpec::Kind::Structural: {
      const auto values = expert_state_values(q, value_mode, temperature);
      Rng select = rng.split("select");
      const auto states = select_degraded_states(values, spec.n_states, select, state_temperature);
      return structural_degrade(expert, adversarial_policy(q, n_states, temperature), states);
    }
  }
  return expert;
}

}  // namespace softprior

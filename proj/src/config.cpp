#include "softprior/config.hpp"

#include <cmath>
#include <sstream>

#include "softprior/text.hpp"

namespace softprior {

using nlohmann::json;

std::vector<SettingSpec> default_settings() {
  using Kind = DegradationSpec::Kind;
  return {
      {"EP", {Kind::None, 0.0, 0, 0}},
      {"RD15", {Kind::Random, 0.15, 0, 0}},
      {"RD30", {Kind::Random, 0.30, 0, 0}},
      {"RD50", {Kind::Random, 0.50, 0, 0}},
      {"SD3", {Kind::Structural, 0.0, 3, 0}},
      {"SD5", {Kind::Structural, 0.0, 5, 0}},
      {"SD10", {Kind::Structural, 0.0, 10, 0}},
  };
}

void ExperimentConfig::validate() const {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(n_worlds >= 1, "n_worlds must be at least 1");
  require(expert_budget >= 0, "expert_budget must be non-negative");
  require(schedule.updates >= 1, "student_updates must be at least 1");
  require(schedule.eval_every >= 1, "eval_every must be at least 1");
  require(schedule.eval_episodes >= 1, "eval_episodes must be at least 1");
  require(schedule.max_episode_steps >= 1, "max_episode_steps must be at least 1");
  require(!settings.empty(), "at least one setting is required");
  require(!regimes.empty(), "at least one regime is required");
  for (std::size_t i = 0; i < settings.size(); ++i) {
    require(!settings[i].name.empty() && settings[i].name.find_first_of(",\n\" ") == std::string::npos,
            "setting names must be non-empty and free of commas, quotes and spaces");
    for (std::size_t j = 0; j < i; ++j) require(settings[j].name != settings[i].name, "duplicate setting " + settings[i].name);
    try {
      settings[i].degradation.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("setting " + settings[i].name + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < regimes.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) require(regimes[i] != regimes[j], "duplicate regime");
  try {
    object_probs.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("env.object_probs: ") + e.what());
  }
  require(termination_prob >= 0.0 && termination_prob <= 1.0, "env.termination_prob must be a probability");
  require(transition_noise >= 0.0 && transition_noise <= 1.0, "env.transition_noise must be a probability");
  require(expert.alpha > 0.0 && expert.alpha <= 1.0, "expert.alpha must lie in (0, 1]");
  require(expert.epsilon >= 0.0 && expert.epsilon <= 1.0, "expert.epsilon must be a probability");
  require(expert.gamma > 0.0 && expert.gamma <= 1.0, "expert.gamma must lie in (0, 1]");
  require(prior_temperature > 0.0, "prior.temperature must be positive");
  require(state_temperature > 0.0, "prior.state_temperature must be positive");
  require(student.policy_lr >= 0.0 && student.critic_lr >= 0.0 && student.weight_lr >= 0.0,
          "student learning rates must be non-negative");
  require(student.gamma > 0.0 && student.gamma <= 1.0, "student.gamma must lie in (0, 1]");
  require(student.temperature > 0.0, "student.temperature must be positive");
  require(bootstrap_resamples >= 1000, "report.bootstrap_resamples must be at least 1000");
  require(confidence > 0.0 && confidence < 1.0, "report.confidence must lie in (0, 1)");
  require(profile_points >= 2 && profile_max > profile_min, "report profile grid is empty");
  require(jobs >= 0, "jobs must be non-negative");
}

std::vector<double> ExperimentConfig::profile_thresholds() const {
  std::vector<double> t(static_cast<std::size_t>(profile_points));
  for (int i = 0; i < profile_points; ++i)
    t[static_cast<std::size_t>(i)] = profile_min + (profile_max - profile_min) * i / (profile_points - 1);
  return t;
}

const SettingSpec& ExperimentConfig::setting(std::string_view name) const {
  for (const auto& s : settings)
    if (s.name == name) return s;
  throw ConfigError("unknown setting '" + std::string(name) + "'");
}

namespace {

std::string_view kind_name(DegradationSpec::Kind k) {
  switch (k) {
    case DegradationSpec::Kind::None: return "none";
    case DegradationSpec::Kind::Random: return "random";
    case DegradationSpec::Kind::Structural: return "structural";
  }
  return "none";
}

DegradationSpec::Kind parse_kind(const std::string& s) {
  if (s == "none" || s == "expert") return DegradationSpec::Kind::None;
  if (s == "random") return DegradationSpec::Kind::Random;
  if (s == "structural") return DegradationSpec::Kind::Structural;
  throw ConfigError("unknown degradation kind '" + s + "'");
}

json setting_to_json(const SettingSpec& s) {
  json j{{"name", s.name}, {"kind", kind_name(s.degradation.kind)}, {"seed", s.degradation.seed}};
  if (s.degradation.kind == DegradationSpec::Kind::Random) j["noise_p"] = s.degradation.noise_p;
  if (s.degradation.kind == DegradationSpec::Kind::Structural) j["n_states"] = s.degradation.n_states;
  return j;
}

SettingSpec setting_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("each setting must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "name" && key != "kind" && key != "seed" && key != "noise_p" && key != "n_states")
      throw ConfigError("unknown setting field '" + key + "'");
  SettingSpec s;
  s.name = j.at("name").get<std::string>();
  s.degradation.kind = parse_kind(j.at("kind").get<std::string>());
  s.degradation.seed = j.value("seed", std::uint64_t{0});
  if (s.degradation.kind == DegradationSpec::Kind::Random) s.degradation.noise_p = j.at("noise_p").get<double>();
  if (s.degradation.kind == DegradationSpec::Kind::Structural) s.degradation.n_states = j.at("n_states").get<int>();
  return s;
}

// Every key in `user` must exist in `defaults` (recursing into objects).
void reject_unknown(const json& user, const json& defaults, const std::string& path) {
  for (const auto& [key, value] : user.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + key + "'");
    if (value.is_object() && defaults[key].is_object()) reject_unknown(value, defaults[key], path + key + ".");
  }
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json settings = json::array();
  for (const auto& s : c.settings) settings.push_back(setting_to_json(s));
  json regimes = json::array();
  for (auto r : c.regimes) regimes.push_back(std::string(to_string(r)));
  return json{
      {"n_worlds", c.n_worlds},
      {"master_seed", c.master_seed},
      {"expert_budget", c.expert_budget},
      {"student_updates", c.schedule.updates},
      {"eval_every", c.schedule.eval_every},
      {"eval_episodes", c.schedule.eval_episodes},
      {"max_episode_steps", c.schedule.max_episode_steps},
      {"settings", settings},
      {"regimes", regimes},
      {"env",
       {{"object_probs",
         {{"wall", c.object_probs.wall}, {"empty", c.object_probs.empty}, {"reward", c.object_probs.reward}}},
        {"termination_prob", c.termination_prob},
        {"transition_noise", c.transition_noise}}},
      {"expert", {{"alpha", c.expert.alpha}, {"epsilon", c.expert.epsilon}, {"gamma", c.expert.gamma}}},
      {"prior",
       {{"temperature", c.prior_temperature},
        {"state_value", c.state_value == StateValueMode::Max ? "max" : "soft"},
        {"state_temperature", c.state_temperature}}},
      {"student",
       {{"policy_lr", c.student.policy_lr},
        {"critic_lr", c.student.critic_lr},
        {"weight_lr", c.student.weight_lr},
        {"gamma", c.student.gamma},
        {"temperature", c.student.temperature},
        {"bonus_reference", to_string(c.student.bonus_reference)},
        {"weight_residual", to_string(c.student.weight_residual)}}},
      {"report",
       {{"bootstrap_resamples", c.bootstrap_resamples},
        {"confidence", c.confidence},
        {"profile_min", c.profile_min},
        {"profile_max", c.profile_max},
        {"profile_points", c.profile_points}}},
      {"jobs", c.jobs},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig config_from_json(const json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json doc = to_json(ExperimentConfig{});
  reject_unknown(user, doc, "");
  doc.merge_patch(user);

  ExperimentConfig c;
  try {
    c.n_worlds = doc.at("n_worlds").get<int>();
    c.master_seed = doc.at("master_seed").get<std::uint64_t>();
    c.expert_budget = doc.at("expert_budget").get<std::int64_t>();
    c.schedule.updates = doc.at("student_updates").get<std::int64_t>();
    c.schedule.eval_every = doc.at("eval_every").get<int>();
    c.schedule.eval_episodes = doc.at("eval_episodes").get<int>();
    c.schedule.max_episode_steps = doc.at("max_episode_steps").get<int>();
    c.expert.max_episode_steps = c.schedule.max_episode_steps;

    c.settings.clear();
    for (const auto& s : doc.at("settings")) c.settings.push_back(setting_from_json(s));
    c.regimes.clear();
    for (const auto& r : doc.at("regimes")) c.regimes.push_back(parse_regime(r.get<std::string>()));

    const auto& env = doc.at("env");
    c.object_probs.wall = env.at("object_probs").at("wall").get<double>();
    c.object_probs.empty = env.at("object_probs").at("empty").get<double>();
    c.object_probs.reward = env.at("object_probs").at("reward").get<std::array<double, 6>>();
    c.termination_prob = env.at("termination_prob").get<double>();
    c.transition_noise = env.at("transition_noise").get<double>();

    const auto& ex = doc.at("expert");
    c.expert.alpha = ex.at("alpha").get<double>();
    c.expert.epsilon = ex.at("epsilon").get<double>();
    c.expert.gamma = ex.at("gamma").get<double>();

    const auto& pr = doc.at("prior");
    c.prior_temperature = pr.at("temperature").get<double>();
    const auto mode = pr.at("state_value").get<std::string>();
    if (mode == "max") c.state_value = StateValueMode::Max;
    else if (mode == "soft") c.state_value = StateValueMode::SoftExpectation;
    else throw ConfigError("prior.state_value must be \"max\" or \"soft\"");
    c.state_temperature = pr.at("state_temperature").get<double>();

    const auto& st = doc.at("student");
    c.student.policy_lr = st.at("policy_lr").get<double>();
    c.student.critic_lr = st.at("critic_lr").get<double>();
    c.student.weight_lr = st.at("weight_lr").get<double>();
    c.student.gamma = st.at("gamma").get<double>();
    c.student.temperature = st.at("temperature").get<double>();
    c.student.bonus_reference = parse_bonus_reference(st.at("bonus_reference").get<std::string>());
    c.student.weight_residual = parse_weight_residual(st.at("weight_residual").get<std::string>());

    const auto& rep = doc.at("report");
    c.bootstrap_resamples = rep.at("bootstrap_resamples").get<int>();
    c.confidence = rep.at("confidence").get<double>();
    c.profile_min = rep.at("profile_min").get<double>();
    c.profile_max = rep.at("profile_max").get<double>();
    c.profile_points = rep.at("profile_points").get<int>();

    c.jobs = doc.at("jobs").get<int>();
    c.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override must look like key=value");
  const std::string_view path = assignment.substr(0, eq);
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  for (const auto part : split(path, '.')) {
    if (part.empty()) throw ConfigError("override key has an empty component");
    if (!node->is_object() && !node->is_null()) throw ConfigError("override path '" + std::string(path) + "' descends into a non-object");
    node = &(*node)[std::string(part)];
  }
  *node = std::move(value);
}

std::string config_fingerprint(const ExperimentConfig& config) {
  json j = to_json(config);
  for (const char* key : {"n_worlds", "regimes", "jobs", "output_dir", "report"}) j.erase(key);
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << mix64(h);
  return os.str();
}

std::uint64_t world_seed(const ExperimentConfig& config, int world_index) {
  return derive_seed(config.master_seed, static_cast<std::uint64_t>(world_index), "world");
}

std::uint64_t expert_seed(std::uint64_t world_seed) { return derive_seed(world_seed, "expert"); }

std::uint64_t student_seed(std::uint64_t world_seed) { return derive_seed(world_seed, "student"); }

std::uint64_t prior_seed(std::uint64_t world_seed, const SettingSpec& setting) {
  return derive_seed(derive_seed(world_seed, setting.degradation.seed, "prior"), setting.name);
}

}  // namespace softprior

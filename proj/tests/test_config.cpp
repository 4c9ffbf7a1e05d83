#include "doctest.h"
#include "softprior/config.hpp"

using namespace softprior;
using nlohmann::json;

TEST_CASE("default configuration") {
  const ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.n_worlds == 1000);
  CHECK(c.expert_budget == 30000);
  CHECK(c.schedule.updates == 30000);
  CHECK(c.schedule.eval_every == 300);
  CHECK(c.schedule.eval_episodes == 1);
  REQUIRE(c.settings.size() == 7);
  CHECK(c.settings[0].name == "EP");
  CHECK(c.setting("RD50").degradation.noise_p == 0.5);
  CHECK(c.setting("SD10").degradation.n_states == 10);
  CHECK_THROWS_AS(c.setting("XX"), ConfigError);
  CHECK(c.regimes.size() == 5);
  const auto t = c.profile_thresholds();
  CHECK(t.size() == 201);
  CHECK(t.front() == -1.0);
  CHECK(t.back() == 1.0);
}

TEST_CASE("json round-trip") {
  ExperimentConfig c;
  c.n_worlds = 12;
  c.master_seed = 99;
  c.student.policy_lr = 0.02;
  c.student.bonus_reference = BonusReference::Uniform;
  c.settings.push_back({"SD2", {DegradationSpec::Kind::Structural, 0.0, 2, 4}});
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.settings.back() == c.settings.back());
  CHECK(back.student.bonus_reference == BonusReference::Uniform);
}

TEST_CASE("partial documents keep defaults; unknown keys are rejected") {
  const ExperimentConfig c = config_from_json(json{{"n_worlds", 5}, {"student", {{"critic_lr", 0.2}}}});
  CHECK(c.n_worlds == 5);
  CHECK(c.student.critic_lr == 0.2);
  CHECK(c.student.policy_lr == ExperimentConfig{}.student.policy_lr);
  CHECK_THROWS_AS(config_from_json(json{{"n_wrlds", 5}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"student", {{"lr", 0.1}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
}

TEST_CASE("validation failures") {
  CHECK_THROWS_AS(config_from_json(json{{"n_worlds", 0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"eval_every", 0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"env", {{"object_probs", {{"wall", 0.5}}}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"regimes", {"ER", "ER"}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"regimes", {"PPO"}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"student", {{"bonus_reference", "half"}}}}), ConfigError);
  CHECK_THROWS_AS(
      config_from_json(json{{"settings", {{{"name", "R"}, {"kind", "random"}, {"noise_p", 1.5}}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"settings", {{{"name", "a b"}, {"kind", "none"}}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"report", {{"bootstrap_resamples", 10}}}}), ConfigError);
}

TEST_CASE("key=value overrides") {
  json doc = json::object();
  apply_override(doc, "student.policy_lr=0.01");
  apply_override(doc, "student.bonus_reference=uniform");
  apply_override(doc, "env.object_probs.reward=[0.0125,0.0125,0.0005,0.0005,0.0125,0.0125]");
  apply_override(doc, "env.object_probs.wall=0.1");
  apply_override(doc, "env.object_probs.empty=0.849");
  const ExperimentConfig c = config_from_json(doc);
  CHECK(c.student.policy_lr == 0.01);
  CHECK(c.student.bonus_reference == BonusReference::Uniform);
  CHECK(c.object_probs.reward[2] == 0.0005);

  json scalar{{"n_worlds", 3}};
  CHECK_THROWS_AS(apply_override(scalar, "n_worlds.x=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(scalar, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(scalar, "a..b=1"), ConfigError);
}

TEST_CASE("fingerprint tracks what changes run numbers") {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.n_worlds = 3;
  b.jobs = 7;
  b.output_dir = "elsewhere";
  b.bootstrap_resamples = 5000;
  b.regimes = {RegimeKind::Baseline};
  CHECK(config_fingerprint(a) == config_fingerprint(b));
  b.student.critic_lr = 0.3;
  CHECK(config_fingerprint(a) != config_fingerprint(b));
  ExperimentConfig c = a;
  c.master_seed = 1;
  CHECK(config_fingerprint(a) != config_fingerprint(c));
}

TEST_CASE("seed derivation") {
  ExperimentConfig c;
  CHECK(world_seed(c, 3) == world_seed(c, 3));
  CHECK(world_seed(c, 3) != world_seed(c, 4));
  ExperimentConfig d;
  d.master_seed = 1;
  CHECK(world_seed(c, 3) != world_seed(d, 3));
  const auto w = world_seed(c, 0);
  CHECK(expert_seed(w) != student_seed(w));
  CHECK(prior_seed(w, c.setting("SD3")) != prior_seed(w, c.setting("SD5")));
  CHECK(prior_seed(w, c.setting("SD3")) == prior_seed(w, c.setting("SD3")));
}

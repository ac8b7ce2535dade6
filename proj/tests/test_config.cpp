#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "nomarl/config.hpp"

using namespace nomarl;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;
using nlohmann::json;

namespace {

/** Dotted paths of every non-object value in a document. */
void collect_leaves(const json& node, const std::string& prefix, std::set<std::string>& out) {
  if (!node.is_object()) {
    out.insert(prefix);
    return;
  }
  for (const auto& [key, value] : node.items())
    collect_leaves(value, prefix.empty() ? key : prefix + "." + key, out);
}

std::string temp_config_path(const std::string& stem) {
  return "config_test_" + stem + ".json";
}

}  // namespace

TEST_CASE("empty document yields the dense-urban defaults", "[config]") {
  const ExperimentConfig c = config_from_json(json::object());

  CHECK(c.scenario.kind == ScenarioKind::SmartCity);
  CHECK(c.scenario.resolved_num_devices() == 100);
  CHECK(c.scenario.class_shares[0] == 0.2);
  CHECK(c.scenario.cell_radius_m == 500.0);
  CHECK(c.classes.critical.duty_cycle == 0.10);
  CHECK(c.classes.periodic.sinr_req_db == 3.0);
  CHECK(c.classes.best_effort.class_weight == 0.5);
  CHECK(c.traffic.event_rate_hz == 0.5);
  CHECK(c.channel.carrier_freq_ghz == 3.5);
  CHECK(c.channel.processing_gain == 127.0);
  CHECK(c.reward.gamma == 2.0);
  CHECK_FALSE(c.beta_class_enabled);
  CHECK(c.code_degree == 7);
  CHECK(c.num_codes == 80);
  CHECK(c.max_misalignment == 2);
  CHECK(c.strategy == CodebookStrategy::FirstC);
  CHECK(c.episodes == 1000);
  CHECK(c.steps_per_episode == 100);
  CHECK(c.agent == AgentKind::Npg);
  CHECK(c.npg.alpha_base == 0.001);
  CHECK(c.ddpg.actor_lr == 1e-4);
  CHECK(c.ddpg.critic_lr == 1e-3);
  CHECK(c.ddpg.batch_size == 64);
  CHECK(c.ddpg.replay_capacity == 1000000u);
  CHECK(c.embedding.dimension == 16);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(c.output_dir == "runs");
}

TEST_CASE("default document parses to the default config", "[config]") {
  const ExperimentConfig c = config_from_json(default_config_json());
  CHECK(config_to_json(c) == default_config_json());
}

TEST_CASE("partial documents override only the named keys", "[config]") {
  const json doc = {{"scenario", {{"kind", "industrial_iot"}}},
                    {"episodes", 250},
                    {"npg", {{"alpha_base", 0.01}}}};
  const ExperimentConfig c = config_from_json(doc);
  CHECK(c.scenario.kind == ScenarioKind::IndustrialIoT);
  CHECK(c.scenario.resolved_num_devices() == 60);
  CHECK(c.episodes == 250);
  CHECK(c.npg.alpha_base == 0.01);
  CHECK(c.npg.discount == 0.95);  // untouched sibling keeps its default
  CHECK(c.num_codes == 80);
}

TEST_CASE("unknown keys are rejected by name", "[config]") {
  CHECK_THROWS_MATCHES(config_from_json(json{{"episods", 10}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("episods")));
  CHECK_THROWS_MATCHES(config_from_json(json{{"npg", {{"alpha", 0.1}}}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("npg.alpha")));
  CHECK_THROWS_MATCHES(
      config_from_json(json{{"channel", {{"carrier_freq_hz", 3.5e9}}}}), ConfigError,
      Catch::Matchers::MessageMatches(ContainsSubstring("channel.carrier_freq_hz")));
}

TEST_CASE("type mismatches name the key and expected type", "[config]") {
  // float into an integer slot
  CHECK_THROWS_MATCHES(config_from_json(json{{"episodes", 10.5}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("episodes") &&
                                                       ContainsSubstring("integer")));
  // string into a number slot
  CHECK_THROWS_MATCHES(config_from_json(json{{"npg", {{"alpha_base", "fast"}}}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("npg.alpha_base") &&
                                                       ContainsSubstring("number")));
  // scalar into an object slot
  CHECK_THROWS_MATCHES(config_from_json(json{{"npg", 3}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("npg")));
  // number into a string slot
  CHECK_THROWS_MATCHES(config_from_json(json{{"agent", 4}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("agent") &&
                                                       ContainsSubstring("string")));
  // scalar into an array slot
  CHECK_THROWS_MATCHES(config_from_json(json{{"seeds", 7}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("seeds") &&
                                                       ContainsSubstring("array")));
  // float element in an integer array
  CHECK_THROWS_MATCHES(config_from_json(json{{"seeds", {1, 2.5}}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("seeds[1]")));
  // boolean into a number slot
  CHECK_THROWS_MATCHES(config_from_json(json{{"reward", {{"alpha", true}}}}), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("reward.alpha")));
}

TEST_CASE("integers coerce into float slots", "[config]") {
  const ExperimentConfig c = config_from_json(json{{"npg", {{"alpha_base", 1}}}});
  CHECK(c.npg.alpha_base == 1.0);
}

TEST_CASE("config values are range-checked after merging", "[config]") {
  CHECK_THROWS_AS(config_from_json(json{{"episodes", 0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"steps_per_episode", 0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"seeds", json::array()}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"seeds", {3, 3}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"codebook", {{"degree", 6}}}}), ConfigError);
  // degree-7 family has 129 sequences; degree-5 only 33
  CHECK_THROWS_AS(config_from_json(json{{"codebook", {{"num_codes", 130}}}}), ConfigError);
  CHECK_THROWS_AS(
      config_from_json(json{{"codebook", {{"degree", 5}, {"num_codes", 80}}}}), ConfigError);
  CHECK_NOTHROW(config_from_json(json{{"codebook", {{"degree", 5}, {"num_codes", 33}}}}));
  CHECK_THROWS_AS(config_from_json(json{{"agent", "q_learning"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"scenario", {{"kind", "rural"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"codebook", {{"strategy", "best"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"ddpg", {{"tau", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"scenario", {{"class_shares", {0.5, 0.5}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json(json{{"interference_sensitivity", {{"matrix", {{1, 1}, {1, 1}}}}}}),
      ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"embedding", {{"dimension", 1}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"name", ""}}), ConfigError);
}

TEST_CASE("save and reload is the identity on configs", "[config]") {
  json doc = {{"name", "roundtrip"},
              {"scenario", {{"kind", "sensor_network"}, {"num_devices", 42}}},
              {"agent", "ddpg"},
              {"episodes", 77},
              {"seeds", {11, 22, 33}},
              {"ddpg", {{"batch_size", 16}, {"adaptive_codebook", true}}},
              {"interference_sensitivity",
               {{"enabled", true}, {"matrix", {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}}}}};
  const ExperimentConfig c = config_from_json(doc);
  CHECK(c.beta_class[1][2] == 6.0);

  const std::string path = temp_config_path("roundtrip");
  {
    std::ofstream out(path);
    out << config_to_json(c).dump(2) << "\n";
  }
  const ExperimentConfig again = load_config(path);
  CHECK(config_to_json(again) == config_to_json(c));
  std::remove(path.c_str());
}

TEST_CASE("config files load from disk with parse errors wrapped", "[config]") {
  const std::string path = temp_config_path("bad");
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_MATCHES(load_config(path), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("invalid JSON")));
  std::remove(path.c_str());
  CHECK_THROWS_MATCHES(load_config("does_not_exist.json"), ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("cannot open")));
}

TEST_CASE("dotted overrides edit raw documents", "[config]") {
  json doc = json::object();
  apply_override(doc, "episodes=250");
  apply_override(doc, "npg.alpha_base=0.01");
  apply_override(doc, "scenario.kind=industrial_iot");
  apply_override(doc, "ddpg.adaptive_codebook=true");
  apply_override(doc, "seeds=[7,8]");
  apply_override(doc, "name=sweep-a");

  const ExperimentConfig c = config_from_json(doc);
  CHECK(c.episodes == 250);
  CHECK(c.npg.alpha_base == 0.01);
  CHECK(c.scenario.kind == ScenarioKind::IndustrialIoT);
  CHECK(c.ddpg.adaptive_codebook);
  CHECK(c.seeds == std::vector<std::uint64_t>{7, 8});
  CHECK(c.name == "sweep-a");

  // later overrides win
  apply_override(doc, "episodes=300");
  CHECK(config_from_json(doc).episodes == 300);

  // overrides still go through schema validation
  json bad = json::object();
  apply_override(bad, "episods=10");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  json bad_type = json::object();
  apply_override(bad_type, "episodes=ten");
  CHECK_THROWS_AS(config_from_json(bad_type), ConfigError);

  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "=5"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "a..b=5"), ConfigError);
}

TEST_CASE("every schema leaf has a provenance tag", "[config]") {
  std::set<std::string> leaves;
  collect_leaves(default_config_json(), "", leaves);

  std::set<std::string> tagged;
  for (const auto& [key, source] : parameter_provenance()) {
    INFO(key);
    CHECK((source == "paper" || source == "decision"));
    CHECK(leaves.count(key) == 1);  // no stale entries
    tagged.insert(key);
  }
  for (const auto& leaf : leaves) {
    INFO(leaf);
    CHECK(tagged.count(leaf) == 1);  // no untagged parameters
  }
}

TEST_CASE("env config assembly carries every block through", "[config]") {
  json doc = {{"steps_per_episode", 25},
              {"interference_sensitivity", {{"enabled", true}, {"matrix", {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}}}}};
  const ExperimentConfig c = config_from_json(doc);
  const EnvConfig env = c.env_config();
  CHECK(env.steps_per_episode == 25);
  CHECK(env.has_beta_class);
  CHECK(env.beta_class[0][0] == 2.0);
  CHECK(env.scenario.kind == c.scenario.kind);
  CHECK(env.channel.processing_gain == 127.0);
  CHECK(env.reward.gamma == 2.0);
  CHECK_NOTHROW(env.validate());
}

TEST_CASE("codebook construction honours degree and selection settings", "[config]") {
  const ExperimentConfig small = config_from_json(
      json{{"codebook",
            {{"degree", 5}, {"num_codes", 8}, {"strategy", "greedy_min_avg_rho"}}}});
  const Codebook cb = small.build_codebook();
  CHECK(cb.num_codes == 8);
  CHECK(cb.rho_matrix.size() == 64u);
  for (int i = 0; i < 8; ++i) CHECK_THAT(cb.rho(i, i), WithinRel(1.0, 1e-12));
}

#pragma once

/**
 * Experiment configuration: a versioned JSON schema covering scenario,
 * channel, traffic, reward, codebook, agent, and sweep settings.
 *
 * The schema's single source of truth is default_config_json(): a document is
 * valid exactly when every key it mentions exists there with a compatible
 * type.  Unknown keys are rejected (misspelled overrides must fail loudly,
 * not silently fall back to defaults), and every defaulted parameter carries
 * a provenance tag so run manifests can state where each number came from.
 */

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nomarl/ddpg.hpp"
#include "nomarl/devices.hpp"
#include "nomarl/env.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/npg.hpp"

namespace nomarl {

inline constexpr const char* kVersion = "0.1.0";

/** Configuration-shaped failures; the CLI maps these to exit code 1. */
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class AgentKind { Static, Random, Greedy, Npg, Ddpg };

inline const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Static: return "static";
    case AgentKind::Random: return "random";
    case AgentKind::Greedy: return "greedy";
    case AgentKind::Npg: return "npg";
    case AgentKind::Ddpg: return "ddpg";
  }
  return "?";
}

inline AgentKind agent_kind_from_string(const std::string& s, const std::string& key) {
  if (s == "static") return AgentKind::Static;
  if (s == "random") return AgentKind::Random;
  if (s == "greedy") return AgentKind::Greedy;
  if (s == "npg") return AgentKind::Npg;
  if (s == "ddpg") return AgentKind::Ddpg;
  throw ConfigError(key + ": unknown agent '" + s +
                    "' (expected static|random|greedy|npg|ddpg)");
}

inline ScenarioKind scenario_kind_from_string(const std::string& s, const std::string& key) {
  if (s == "smart_city") return ScenarioKind::SmartCity;
  if (s == "industrial_iot") return ScenarioKind::IndustrialIoT;
  if (s == "sensor_network") return ScenarioKind::SensorNetwork;
  throw ConfigError(key + ": unknown scenario '" + s +
                    "' (expected smart_city|industrial_iot|sensor_network)");
}

inline const char* to_string(CodebookStrategy s) {
  return s == CodebookStrategy::FirstC ? "first_c" : "greedy_min_avg_rho";
}

inline CodebookStrategy strategy_from_string(const std::string& s, const std::string& key) {
  if (s == "first_c") return CodebookStrategy::FirstC;
  if (s == "greedy_min_avg_rho") return CodebookStrategy::GreedyMinAvgRho;
  throw ConfigError(key + ": unknown strategy '" + s +
                    "' (expected first_c|greedy_min_avg_rho)");
}

struct EmbeddingParams {
  int dimension = 16;
  double kappa = 0.0;  // 0 = derive so the largest correlation maps to distance 1
  int max_iters = 4000;
  double learning_rate = 0.01;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ScenarioParams scenario;
  ClassConfig classes;
  TrafficParams traffic;
  ChannelParams channel;
  RewardCoefficients reward;
  bool beta_class_enabled = false;
  std::array<std::array<double, 3>, 3> beta_class{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};

  int code_degree = 7;
  int num_codes = 80;
  int max_misalignment = 2;
  CodebookStrategy strategy = CodebookStrategy::FirstC;

  int episodes = 1000;
  int steps_per_episode = 100;

  AgentKind agent = AgentKind::Npg;
  NpgConfig npg;
  DdpgConfig ddpg;
  EmbeddingParams embedding;

  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir = "runs";

  EnvConfig env_config() const {
    EnvConfig env;
    env.scenario = scenario;
    env.classes = classes;
    env.traffic = traffic;
    env.channel = channel;
    env.reward = reward;
    env.steps_per_episode = steps_per_episode;
    env.has_beta_class = beta_class_enabled;
    env.beta_class = beta_class;
    return env;
  }

  Codebook build_codebook() const {
    return select_codebook(default_gold_family(code_degree), num_codes, strategy,
                           max_misalignment);
  }

  void validate() const {
    if (episodes < 1) throw ConfigError("episodes: must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds: must list at least one seed");
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (std::size_t j = i + 1; j < seeds.size(); ++j)
        if (seeds[i] == seeds[j])
          throw ConfigError("seeds: duplicate seed " + std::to_string(seeds[i]));
    if (code_degree != 5 && code_degree != 7)
      throw ConfigError("codebook.degree: must be 5 or 7");
    if (max_misalignment < 0) throw ConfigError("codebook.max_misalignment: must be >= 0");
    if (embedding.dimension < 2 || embedding.dimension > 64)
      throw ConfigError("embedding.dimension: must be in [2, 64]");
    if (embedding.max_iters < 1) throw ConfigError("embedding.max_iters: must be >= 1");
    if (embedding.kappa < 0.0) throw ConfigError("embedding.kappa: must be >= 0");
    if (embedding.learning_rate <= 0.0) throw ConfigError("embedding.learning_rate: must be > 0");
    if (name.empty()) throw ConfigError("name: must be non-empty");
    if (output_dir.empty()) throw ConfigError("output_dir: must be non-empty");
    try {
      env_config().validate();
      const int family_size = (1 << code_degree) + 1;
      if (num_codes < 1 || num_codes > family_size)
        throw std::invalid_argument("codebook.num_codes: must be in [1, " +
                                    std::to_string(family_size) + "]");
      npg.validate();
      ddpg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

inline nlohmann::json class_params_json(const ClassParams& p) {
  return {{"duty_cycle", p.duty_cycle},
          {"reliability_target", p.reliability_target},
          {"latency_limit_ms", p.latency_limit_ms},
          {"sinr_req_db", p.sinr_req_db},
          {"class_weight", p.class_weight}};
}

inline ClassParams class_params_from_json(const nlohmann::json& j) {
  ClassParams p;
  p.duty_cycle = j.at("duty_cycle").get<double>();
  p.reliability_target = j.at("reliability_target").get<double>();
  p.latency_limit_ms = j.at("latency_limit_ms").get<double>();
  p.sinr_req_db = j.at("sinr_req_db").get<double>();
  p.class_weight = j.at("class_weight").get<double>();
  return p;
}

inline const char* json_type_name(const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: return "object";
    case nlohmann::json::value_t::array: return "array";
    case nlohmann::json::value_t::string: return "string";
    case nlohmann::json::value_t::boolean: return "boolean";
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned: return "integer";
    case nlohmann::json::value_t::number_float: return "number";
    default: return "null";
  }
}

inline bool is_integer(const nlohmann::json& v) {
  return v.is_number_integer() || v.is_number_unsigned();
}

/**
 * Overlay `user` onto `base` (the schema), rejecting keys absent from the
 * schema and values whose type disagrees with the default's type.  Arrays
 * are replaced wholesale after an element-type check against the default's
 * first element.
 */
inline void merge_config(nlohmann::json& base, const nlohmann::json& user,
                         const std::string& path) {
  if (!user.is_object())
    throw ConfigError((path.empty() ? std::string("document") : path) + ": expected object, got " +
                      json_type_name(user));
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown key: " + here);
    nlohmann::json& slot = base[key];
    if (slot.is_object()) {
      merge_config(slot, value, here);
    } else if (slot.is_array()) {
      if (!value.is_array())
        throw ConfigError(here + ": expected array, got " + json_type_name(value));
      if (!slot.empty()) {
        const nlohmann::json& model = slot.front();
        for (std::size_t i = 0; i < value.size(); ++i) {
          const nlohmann::json& el = value[i];
          const std::string el_path = here + "[" + std::to_string(i) + "]";
          if (model.is_object() || model.is_array()) {
            nlohmann::json scratch = model;
            if (model.is_object())
              merge_config(scratch, el, el_path);
            else if (!el.is_array())
              throw ConfigError(el_path + ": expected array, got " + json_type_name(el));
            else
              for (std::size_t k = 0; k < el.size(); ++k)
                if (!el[k].is_number())
                  throw ConfigError(el_path + "[" + std::to_string(k) + "]: expected number");
          } else if (is_integer(model)) {
            if (!is_integer(el))
              throw ConfigError(el_path + ": expected integer, got " + json_type_name(el));
          } else if (model.is_number_float()) {
            if (!el.is_number())
              throw ConfigError(el_path + ": expected number, got " + json_type_name(el));
          } else if (model.is_string()) {
            if (!el.is_string())
              throw ConfigError(el_path + ": expected string, got " + json_type_name(el));
          }
        }
      }
      slot = value;
    } else if (slot.is_string()) {
      if (!value.is_string())
        throw ConfigError(here + ": expected string, got " + json_type_name(value));
      slot = value;
    } else if (slot.is_boolean()) {
      if (!value.is_boolean())
        throw ConfigError(here + ": expected boolean, got " + json_type_name(value));
      slot = value;
    } else if (is_integer(slot)) {
      if (!is_integer(value))
        throw ConfigError(here + ": expected integer, got " + json_type_name(value));
      slot = value;
    } else if (slot.is_number_float()) {
      if (!value.is_number())
        throw ConfigError(here + ": expected number, got " + json_type_name(value));
      slot = value;
    } else {
      throw ConfigError(here + ": unsupported schema slot");
    }
  }
}

}  // namespace detail

/** Full schema with every default; valid documents mention a subset of it. */
inline nlohmann::json default_config_json() {
  const ExperimentConfig d;
  nlohmann::json j;
  j["name"] = d.name;
  j["scenario"] = {{"kind", to_string(d.scenario.kind)},
                   {"num_devices", d.scenario.num_devices},
                   {"class_shares", d.scenario.class_shares},
                   {"cell_radius_m", d.scenario.cell_radius_m},
                   {"buffer_capacity", d.scenario.buffer_capacity},
                   {"cluster_count", d.scenario.cluster_count},
                   {"cluster_sigma_m", d.scenario.cluster_sigma_m},
                   {"grid_spacing_m", d.scenario.grid_spacing_m},
                   {"grid_jitter_m", d.scenario.grid_jitter_m},
                   {"tx_power_min_dbm", d.scenario.tx_power_min_dbm},
                   {"tx_power_max_dbm", d.scenario.tx_power_max_dbm},
                   {"battery_min_j", d.scenario.battery_min_j},
                   {"battery_max_j", d.scenario.battery_max_j},
                   {"gops_min", d.scenario.gops_min},
                   {"gops_max", d.scenario.gops_max}};
  j["classes"] = {{"critical", detail::class_params_json(d.classes.critical)},
                  {"periodic", detail::class_params_json(d.classes.periodic)},
                  {"best_effort", detail::class_params_json(d.classes.best_effort)}};
  j["traffic"] = {{"event_rate_hz", d.traffic.event_rate_hz},
                  {"periodic_rate_hz", d.traffic.periodic_rate_hz},
                  {"packet_size_bits", d.traffic.packet_size_bits},
                  {"step_duration_s", d.traffic.step_duration_s}};
  j["channel"] = {{"carrier_freq_ghz", d.channel.carrier_freq_ghz},
                  {"bandwidth_hz", d.channel.bandwidth_hz},
                  {"noise_psd_dbm_hz", d.channel.noise_psd_dbm_hz},
                  {"noise_figure_db", d.channel.noise_figure_db},
                  {"external_interference_dbm", d.channel.external_interference_dbm},
                  {"cell_radius_m", d.channel.cell_radius_m},
                  {"rician_k_db", d.channel.rician_k_db},
                  {"shadow_sigma_los_db", d.channel.shadow_sigma_los_db},
                  {"shadow_sigma_nlos_db", d.channel.shadow_sigma_nlos_db},
                  {"shadow_corr_dist_m", d.channel.shadow_corr_dist_m},
                  {"processing_gain", d.channel.processing_gain}};
  j["reward"] = {{"alpha", d.reward.alpha},
                 {"beta", d.reward.beta},
                 {"gamma", d.reward.gamma},
                 {"delta", d.reward.delta},
                 {"epsilon", d.reward.epsilon},
                 {"eps_small_j", d.reward.eps_small_j}};
  j["interference_sensitivity"] = {{"enabled", d.beta_class_enabled},
                                   {"matrix", d.beta_class}};
  j["codebook"] = {{"degree", d.code_degree},
                   {"num_codes", d.num_codes},
                   {"max_misalignment", d.max_misalignment},
                   {"strategy", to_string(d.strategy)}};
  j["episodes"] = d.episodes;
  j["steps_per_episode"] = d.steps_per_episode;
  j["agent"] = to_string(d.agent);
  j["npg"] = {{"alpha_base", d.npg.alpha_base},
              {"energy_lr_coeff", d.npg.energy_lr_coeff},
              {"discount", d.npg.discount},
              {"fisher_damping", d.npg.fisher_damping},
              {"cg_iterations", d.npg.cg_iterations},
              {"cg_tolerance", d.npg.cg_tolerance},
              {"baseline_decay", d.npg.baseline_decay},
              {"w_critical", d.npg.w_critical},
              {"w_periodic", d.npg.w_periodic},
              {"w_best_effort", d.npg.w_best_effort}};
  j["ddpg"] = {{"hidden_width", d.ddpg.hidden_width},
               {"actor_lr", d.ddpg.actor_lr},
               {"critic_lr", d.ddpg.critic_lr},
               {"discount", d.ddpg.discount},
               {"tau", d.ddpg.tau},
               {"lambda_quant", d.ddpg.lambda_quant},
               {"sigma_initial", d.ddpg.sigma_initial},
               {"sigma_decay", d.ddpg.sigma_decay},
               {"noise_scale_critical", d.ddpg.noise_scale_critical},
               {"noise_scale_periodic", d.ddpg.noise_scale_periodic},
               {"noise_scale_best_effort", d.ddpg.noise_scale_best_effort},
               {"replay_capacity", d.ddpg.replay_capacity},
               {"replay_alpha", d.ddpg.replay_alpha},
               {"replay_epsilon", d.ddpg.replay_epsilon},
               {"beta_initial", d.ddpg.beta_initial},
               {"beta_anneal_steps", d.ddpg.beta_anneal_steps},
               {"batch_size", d.ddpg.batch_size},
               {"adaptive_codebook", d.ddpg.adaptive_codebook},
               {"codebook_lr", d.ddpg.codebook_lr}};
  j["embedding"] = {{"dimension", d.embedding.dimension},
                    {"kappa", d.embedding.kappa},
                    {"max_iters", d.embedding.max_iters},
                    {"learning_rate", d.embedding.learning_rate}};
  j["seeds"] = d.seeds;
  j["output_dir"] = d.output_dir;
  return j;
}

/** Resolved document -> typed config (assumes schema shape; see merge). */
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  nlohmann::json full = default_config_json();
  detail::merge_config(full, doc, "");

  ExperimentConfig c;
  c.name = full.at("name").get<std::string>();

  const auto& sc = full.at("scenario");
  c.scenario.kind = scenario_kind_from_string(sc.at("kind").get<std::string>(), "scenario.kind");
  c.scenario.num_devices = sc.at("num_devices").get<int>();
  const auto shares = sc.at("class_shares");
  if (shares.size() != 3) throw ConfigError("scenario.class_shares: expected 3 entries");
  for (int k = 0; k < 3; ++k)
    c.scenario.class_shares[static_cast<std::size_t>(k)] =
        shares[static_cast<std::size_t>(k)].get<double>();
  c.scenario.cell_radius_m = sc.at("cell_radius_m").get<double>();
  c.scenario.buffer_capacity = sc.at("buffer_capacity").get<int>();
  c.scenario.cluster_count = sc.at("cluster_count").get<int>();
  c.scenario.cluster_sigma_m = sc.at("cluster_sigma_m").get<double>();
  c.scenario.grid_spacing_m = sc.at("grid_spacing_m").get<double>();
  c.scenario.grid_jitter_m = sc.at("grid_jitter_m").get<double>();
  c.scenario.tx_power_min_dbm = sc.at("tx_power_min_dbm").get<double>();
  c.scenario.tx_power_max_dbm = sc.at("tx_power_max_dbm").get<double>();
  c.scenario.battery_min_j = sc.at("battery_min_j").get<double>();
  c.scenario.battery_max_j = sc.at("battery_max_j").get<double>();
  c.scenario.gops_min = sc.at("gops_min").get<double>();
  c.scenario.gops_max = sc.at("gops_max").get<double>();

  const auto& cl = full.at("classes");
  c.classes.critical = detail::class_params_from_json(cl.at("critical"));
  c.classes.periodic = detail::class_params_from_json(cl.at("periodic"));
  c.classes.best_effort = detail::class_params_from_json(cl.at("best_effort"));

  const auto& tr = full.at("traffic");
  c.traffic.event_rate_hz = tr.at("event_rate_hz").get<double>();
  c.traffic.periodic_rate_hz = tr.at("periodic_rate_hz").get<double>();
  c.traffic.packet_size_bits = tr.at("packet_size_bits").get<int>();
  c.traffic.step_duration_s = tr.at("step_duration_s").get<double>();

  const auto& ch = full.at("channel");
  c.channel.carrier_freq_ghz = ch.at("carrier_freq_ghz").get<double>();
  c.channel.bandwidth_hz = ch.at("bandwidth_hz").get<double>();
  c.channel.noise_psd_dbm_hz = ch.at("noise_psd_dbm_hz").get<double>();
  c.channel.noise_figure_db = ch.at("noise_figure_db").get<double>();
  c.channel.external_interference_dbm = ch.at("external_interference_dbm").get<double>();
  c.channel.cell_radius_m = ch.at("cell_radius_m").get<double>();
  c.channel.rician_k_db = ch.at("rician_k_db").get<double>();
  c.channel.shadow_sigma_los_db = ch.at("shadow_sigma_los_db").get<double>();
  c.channel.shadow_sigma_nlos_db = ch.at("shadow_sigma_nlos_db").get<double>();
  c.channel.shadow_corr_dist_m = ch.at("shadow_corr_dist_m").get<double>();
  c.channel.processing_gain = ch.at("processing_gain").get<double>();

  const auto& rw = full.at("reward");
  c.reward.alpha = rw.at("alpha").get<double>();
  c.reward.beta = rw.at("beta").get<double>();
  c.reward.gamma = rw.at("gamma").get<double>();
  c.reward.delta = rw.at("delta").get<double>();
  c.reward.epsilon = rw.at("epsilon").get<double>();
  c.reward.eps_small_j = rw.at("eps_small_j").get<double>();

  const auto& is = full.at("interference_sensitivity");
  c.beta_class_enabled = is.at("enabled").get<bool>();
  const auto& mat = is.at("matrix");
  if (mat.size() != 3) throw ConfigError("interference_sensitivity.matrix: expected 3 rows");
  for (int r = 0; r < 3; ++r) {
    const auto& row = mat[static_cast<std::size_t>(r)];
    if (row.size() != 3)
      throw ConfigError("interference_sensitivity.matrix: expected 3 columns per row");
    for (int k = 0; k < 3; ++k)
      c.beta_class[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
          row[static_cast<std::size_t>(k)].get<double>();
  }

  const auto& cb = full.at("codebook");
  c.code_degree = cb.at("degree").get<int>();
  c.num_codes = cb.at("num_codes").get<int>();
  c.max_misalignment = cb.at("max_misalignment").get<int>();
  c.strategy = strategy_from_string(cb.at("strategy").get<std::string>(), "codebook.strategy");

  c.episodes = full.at("episodes").get<int>();
  c.steps_per_episode = full.at("steps_per_episode").get<int>();
  c.agent = agent_kind_from_string(full.at("agent").get<std::string>(), "agent");

  const auto& np = full.at("npg");
  c.npg.alpha_base = np.at("alpha_base").get<double>();
  c.npg.energy_lr_coeff = np.at("energy_lr_coeff").get<double>();
  c.npg.discount = np.at("discount").get<double>();
  c.npg.fisher_damping = np.at("fisher_damping").get<double>();
  c.npg.cg_iterations = np.at("cg_iterations").get<int>();
  c.npg.cg_tolerance = np.at("cg_tolerance").get<double>();
  c.npg.baseline_decay = np.at("baseline_decay").get<double>();
  c.npg.w_critical = np.at("w_critical").get<double>();
  c.npg.w_periodic = np.at("w_periodic").get<double>();
  c.npg.w_best_effort = np.at("w_best_effort").get<double>();

  const auto& dd = full.at("ddpg");
  c.ddpg.hidden_width = dd.at("hidden_width").get<int>();
  c.ddpg.actor_lr = dd.at("actor_lr").get<double>();
  c.ddpg.critic_lr = dd.at("critic_lr").get<double>();
  c.ddpg.discount = dd.at("discount").get<double>();
  c.ddpg.tau = dd.at("tau").get<double>();
  c.ddpg.lambda_quant = dd.at("lambda_quant").get<double>();
  c.ddpg.sigma_initial = dd.at("sigma_initial").get<double>();
  c.ddpg.sigma_decay = dd.at("sigma_decay").get<double>();
  c.ddpg.noise_scale_critical = dd.at("noise_scale_critical").get<double>();
  c.ddpg.noise_scale_periodic = dd.at("noise_scale_periodic").get<double>();
  c.ddpg.noise_scale_best_effort = dd.at("noise_scale_best_effort").get<double>();
  c.ddpg.replay_capacity = dd.at("replay_capacity").get<std::size_t>();
  c.ddpg.replay_alpha = dd.at("replay_alpha").get<double>();
  c.ddpg.replay_epsilon = dd.at("replay_epsilon").get<double>();
  c.ddpg.beta_initial = dd.at("beta_initial").get<double>();
  c.ddpg.beta_anneal_steps = dd.at("beta_anneal_steps").get<long>();
  c.ddpg.batch_size = dd.at("batch_size").get<int>();
  c.ddpg.adaptive_codebook = dd.at("adaptive_codebook").get<bool>();
  c.ddpg.codebook_lr = dd.at("codebook_lr").get<double>();

  const auto& em = full.at("embedding");
  c.embedding.dimension = em.at("dimension").get<int>();
  c.embedding.kappa = em.at("kappa").get<double>();
  c.embedding.max_iters = em.at("max_iters").get<int>();
  c.embedding.learning_rate = em.at("learning_rate").get<double>();

  c.seeds.clear();
  for (const auto& s : full.at("seeds")) c.seeds.push_back(s.get<std::uint64_t>());
  c.output_dir = full.at("output_dir").get<std::string>();

  c.validate();
  return c;
}

/** Inverse of config_from_json over valid configs (round-trip identity). */
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j = default_config_json();
  j["name"] = c.name;
  auto& sc = j["scenario"];
  sc["kind"] = to_string(c.scenario.kind);
  sc["num_devices"] = c.scenario.num_devices;
  sc["class_shares"] = c.scenario.class_shares;
  sc["cell_radius_m"] = c.scenario.cell_radius_m;
  sc["buffer_capacity"] = c.scenario.buffer_capacity;
  sc["cluster_count"] = c.scenario.cluster_count;
  sc["cluster_sigma_m"] = c.scenario.cluster_sigma_m;
  sc["grid_spacing_m"] = c.scenario.grid_spacing_m;
  sc["grid_jitter_m"] = c.scenario.grid_jitter_m;
  sc["tx_power_min_dbm"] = c.scenario.tx_power_min_dbm;
  sc["tx_power_max_dbm"] = c.scenario.tx_power_max_dbm;
  sc["battery_min_j"] = c.scenario.battery_min_j;
  sc["battery_max_j"] = c.scenario.battery_max_j;
  sc["gops_min"] = c.scenario.gops_min;
  sc["gops_max"] = c.scenario.gops_max;
  j["classes"] = {{"critical", detail::class_params_json(c.classes.critical)},
                  {"periodic", detail::class_params_json(c.classes.periodic)},
                  {"best_effort", detail::class_params_json(c.classes.best_effort)}};
  j["traffic"] = {{"event_rate_hz", c.traffic.event_rate_hz},
                  {"periodic_rate_hz", c.traffic.periodic_rate_hz},
                  {"packet_size_bits", c.traffic.packet_size_bits},
                  {"step_duration_s", c.traffic.step_duration_s}};
  auto& ch = j["channel"];
  ch["carrier_freq_ghz"] = c.channel.carrier_freq_ghz;
  ch["bandwidth_hz"] = c.channel.bandwidth_hz;
  ch["noise_psd_dbm_hz"] = c.channel.noise_psd_dbm_hz;
  ch["noise_figure_db"] = c.channel.noise_figure_db;
  ch["external_interference_dbm"] = c.channel.external_interference_dbm;
  ch["cell_radius_m"] = c.channel.cell_radius_m;
  ch["rician_k_db"] = c.channel.rician_k_db;
  ch["shadow_sigma_los_db"] = c.channel.shadow_sigma_los_db;
  ch["shadow_sigma_nlos_db"] = c.channel.shadow_sigma_nlos_db;
  ch["shadow_corr_dist_m"] = c.channel.shadow_corr_dist_m;
  ch["processing_gain"] = c.channel.processing_gain;
  j["reward"] = {{"alpha", c.reward.alpha},   {"beta", c.reward.beta},
                 {"gamma", c.reward.gamma},   {"delta", c.reward.delta},
                 {"epsilon", c.reward.epsilon}, {"eps_small_j", c.reward.eps_small_j}};
  j["interference_sensitivity"] = {{"enabled", c.beta_class_enabled}, {"matrix", c.beta_class}};
  j["codebook"] = {{"degree", c.code_degree},
                   {"num_codes", c.num_codes},
                   {"max_misalignment", c.max_misalignment},
                   {"strategy", to_string(c.strategy)}};
  j["episodes"] = c.episodes;
  j["steps_per_episode"] = c.steps_per_episode;
  j["agent"] = to_string(c.agent);
  auto& np = j["npg"];
  np["alpha_base"] = c.npg.alpha_base;
  np["energy_lr_coeff"] = c.npg.energy_lr_coeff;
  np["discount"] = c.npg.discount;
  np["fisher_damping"] = c.npg.fisher_damping;
  np["cg_iterations"] = c.npg.cg_iterations;
  np["cg_tolerance"] = c.npg.cg_tolerance;
  np["baseline_decay"] = c.npg.baseline_decay;
  np["w_critical"] = c.npg.w_critical;
  np["w_periodic"] = c.npg.w_periodic;
  np["w_best_effort"] = c.npg.w_best_effort;
  auto& dd = j["ddpg"];
  dd["hidden_width"] = c.ddpg.hidden_width;
  dd["actor_lr"] = c.ddpg.actor_lr;
  dd["critic_lr"] = c.ddpg.critic_lr;
  dd["discount"] = c.ddpg.discount;
  dd["tau"] = c.ddpg.tau;
  dd["lambda_quant"] = c.ddpg.lambda_quant;
  dd["sigma_initial"] = c.ddpg.sigma_initial;
  dd["sigma_decay"] = c.ddpg.sigma_decay;
  dd["noise_scale_critical"] = c.ddpg.noise_scale_critical;
  dd["noise_scale_periodic"] = c.ddpg.noise_scale_periodic;
  dd["noise_scale_best_effort"] = c.ddpg.noise_scale_best_effort;
  dd["replay_capacity"] = c.ddpg.replay_capacity;
  dd["replay_alpha"] = c.ddpg.replay_alpha;
  dd["replay_epsilon"] = c.ddpg.replay_epsilon;
  dd["beta_initial"] = c.ddpg.beta_initial;
  dd["beta_anneal_steps"] = c.ddpg.beta_anneal_steps;
  dd["batch_size"] = c.ddpg.batch_size;
  dd["adaptive_codebook"] = c.ddpg.adaptive_codebook;
  dd["codebook_lr"] = c.ddpg.codebook_lr;
  j["embedding"] = {{"dimension", c.embedding.dimension},
                    {"kappa", c.embedding.kappa},
                    {"max_iters", c.embedding.max_iters},
                    {"learning_rate", c.embedding.learning_rate}};
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  return j;
}

inline ExperimentConfig load_config_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config_string(ss.str());
}

/**
 * Apply one `key.path=value` override to a raw document (before schema
 * merging, so unknown keys and type errors still fail).  Values parse as
 * JSON when possible and fall back to strings (so `--set agent=npg` works
 * without quoting).
 */
inline void apply_override(nlohmann::json& doc, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value, got '" + spec + "'");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;  // unquoted string
  }

  nlohmann::json* slot = &doc;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string part = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (part.empty()) throw ConfigError("override path has an empty segment: '" + path + "'");
    if (dot == std::string::npos) {
      (*slot)[part] = value;
      return;
    }
    slot = &(*slot)[part];
    begin = dot + 1;
  }
}

/**
 * Where each schema default comes from: the system description the defaults
 * reproduce ("paper") or an implementation decision recorded in the run
 * manifest ("decision").
 */
inline const std::vector<std::pair<std::string, std::string>>& parameter_provenance() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"scenario.kind", "paper"},
      {"scenario.num_devices", "paper"},
      {"scenario.class_shares", "paper"},
      {"scenario.cell_radius_m", "paper"},
      {"scenario.buffer_capacity", "paper"},
      {"scenario.cluster_count", "decision"},
      {"scenario.cluster_sigma_m", "decision"},
      {"scenario.grid_spacing_m", "decision"},
      {"scenario.grid_jitter_m", "decision"},
      {"scenario.tx_power_min_dbm", "paper"},
      {"scenario.tx_power_max_dbm", "paper"},
      {"scenario.battery_min_j", "paper"},
      {"scenario.battery_max_j", "paper"},
      {"scenario.gops_min", "paper"},
      {"scenario.gops_max", "paper"},
      {"classes.critical.duty_cycle", "paper"},
      {"classes.critical.reliability_target", "paper"},
      {"classes.critical.latency_limit_ms", "paper"},
      {"classes.critical.sinr_req_db", "paper"},
      {"classes.critical.class_weight", "paper"},
      {"classes.periodic.duty_cycle", "paper"},
      {"classes.periodic.reliability_target", "paper"},
      {"classes.periodic.latency_limit_ms", "paper"},
      {"classes.periodic.sinr_req_db", "paper"},
      {"classes.periodic.class_weight", "paper"},
      {"classes.best_effort.duty_cycle", "paper"},
      {"classes.best_effort.reliability_target", "paper"},
      {"classes.best_effort.latency_limit_ms", "paper"},
      {"classes.best_effort.sinr_req_db", "paper"},
      {"classes.best_effort.class_weight", "paper"},
      {"traffic.event_rate_hz", "paper"},
      {"traffic.periodic_rate_hz", "paper"},
      {"traffic.packet_size_bits", "decision"},
      {"traffic.step_duration_s", "paper"},
      {"channel.carrier_freq_ghz", "paper"},
      {"channel.bandwidth_hz", "paper"},
      {"channel.noise_psd_dbm_hz", "paper"},
      {"channel.noise_figure_db", "paper"},
      {"channel.external_interference_dbm", "paper"},
      {"channel.cell_radius_m", "paper"},
      {"channel.rician_k_db", "paper"},
      {"channel.shadow_sigma_los_db", "paper"},
      {"channel.shadow_sigma_nlos_db", "paper"},
      {"channel.shadow_corr_dist_m", "paper"},
      {"channel.processing_gain", "paper"},
      {"reward.alpha", "paper"},
      {"reward.beta", "paper"},
      {"reward.gamma", "paper"},
      {"reward.delta", "paper"},
      {"reward.epsilon", "paper"},
      {"reward.eps_small_j", "decision"},
      {"interference_sensitivity.enabled", "decision"},
      {"interference_sensitivity.matrix", "decision"},
      {"codebook.degree", "paper"},
      {"codebook.num_codes", "paper"},
      {"codebook.max_misalignment", "paper"},
      {"codebook.strategy", "decision"},
      {"episodes", "paper"},
      {"steps_per_episode", "paper"},
      {"agent", "decision"},
      {"npg.alpha_base", "paper"},
      {"npg.energy_lr_coeff", "decision"},
      {"npg.discount", "paper"},
      {"npg.fisher_damping", "decision"},
      {"npg.cg_iterations", "decision"},
      {"npg.cg_tolerance", "decision"},
      {"npg.baseline_decay", "decision"},
      {"npg.w_critical", "decision"},
      {"npg.w_periodic", "decision"},
      {"npg.w_best_effort", "decision"},
      {"ddpg.hidden_width", "decision"},
      {"ddpg.actor_lr", "paper"},
      {"ddpg.critic_lr", "paper"},
      {"ddpg.discount", "paper"},
      {"ddpg.tau", "decision"},
      {"ddpg.lambda_quant", "decision"},
      {"ddpg.sigma_initial", "decision"},
      {"ddpg.sigma_decay", "decision"},
      {"ddpg.noise_scale_critical", "decision"},
      {"ddpg.noise_scale_periodic", "decision"},
      {"ddpg.noise_scale_best_effort", "decision"},
      {"ddpg.replay_capacity", "paper"},
      {"ddpg.replay_alpha", "decision"},
      {"ddpg.replay_epsilon", "decision"},
      {"ddpg.beta_initial", "decision"},
      {"ddpg.beta_anneal_steps", "decision"},
      {"ddpg.batch_size", "paper"},
      {"ddpg.adaptive_codebook", "decision"},
      {"ddpg.codebook_lr", "decision"},
      {"embedding.dimension", "decision"},
      {"embedding.kappa", "decision"},
      {"embedding.max_iters", "decision"},
      {"embedding.learning_rate", "decision"},
      {"seeds", "decision"},
      {"output_dir", "decision"},
      {"name", "decision"},
  };
  return table;
}

}  // namespace nomarl

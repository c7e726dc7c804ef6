#include "macdec/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace macdec {

using nlohmann::json;

TrainConfig resolve_config(const TrainConfig& cfg) {
  TrainConfig c = cfg;
  if (c.env == "bp10")
    c.bp.grid_size = 10;
  else if (c.env == "bp30")
    c.bp.grid_size = 30;
  else if (c.env != "wtd")
    throw std::invalid_argument("unknown env: " + c.env);
  if (c.bp.horizon == 0) c.bp.horizon = c.bp.resolved_horizon();
  if (c.net.lstm_dec == 0) c.net.lstm_dec = c.env == "wtd" ? 64 : 32;
  if (c.learner.epsilon_decay_episodes <= 0)
    c.learner.epsilon_decay_episodes = std::max<long>(
        1, static_cast<long>(std::ceil(0.4 * static_cast<double>(c.episodes))));
  return c;
}

TrainConfig default_config(const std::string& env, const std::string& algo) {
  TrainConfig c;
  c.env = env;
  c.learner.algorithm = algorithm_from_string(algo);
  return resolve_config(c);
}

std::string config_to_json(const TrainConfig& cfg) {
  json j;
  j["env"] = cfg.env;
  j["algo"] = to_string(cfg.learner.algorithm);
  j["seed"] = cfg.seed;
  j["num_runs"] = cfg.num_runs;
  j["episodes"] = cfg.episodes;
  j["eval_interval"] = cfg.eval_interval;
  j["eval_episodes"] = cfg.eval_episodes;
  j["out_dir"] = cfg.out_dir;
  j["smoothing_window"] = cfg.smoothing_window;
  j["jobs"] = cfg.jobs;
  j["deterministic_timing"] = cfg.deterministic_timing;
  j["gamma"] = cfg.learner.gamma;
  j["lr"] = cfg.learner.lr;
  j["hysteretic_beta"] = cfg.learner.hysteretic_beta;
  j["batch_size"] = cfg.learner.batch_size;
  j["train_interval_boundaries"] = cfg.learner.train_interval_boundaries;
  j["target_update_primitive_steps"] = cfg.learner.target_update_primitive_steps;
  j["epsilon_start"] = cfg.learner.epsilon_start;
  j["epsilon_end"] = cfg.learner.epsilon_end;
  j["epsilon_decay_episodes"] = cfg.learner.epsilon_decay_episodes;
  j["exploration_mode"] = to_string(cfg.learner.exploration_mode);
  j["conditional_argmax"] = cfg.learner.conditional_argmax;
  j["plain_sum_gamma_power_1"] = cfg.learner.plain_sum_gamma_power_1;
  j["buffer_capacity"] = cfg.learner.buffer_capacity;
  j["net.hidden"] = cfg.net.hidden;
  j["net.lstm_dec"] = cfg.net.lstm_dec;
  j["net.lstm_cen"] = cfg.net.lstm_cen;
  j["bp.grid_size"] = cfg.bp.grid_size;
  j["bp.horizon"] = cfg.bp.horizon;
  j["bp.reward_big"] = cfg.bp.reward_big;
  j["bp.reward_small"] = cfg.bp.reward_small;
  j["bp.penalty"] = cfg.bp.penalty;
  j["bp.reward_step"] = cfg.bp.reward_step;
  j["wtd.speed"] = cfg.wtd.speed;
  j["wtd.human_step_duration"] = cfg.wtd.human_step_duration;
  j["wtd.staging_capacity"] = cfg.wtd.staging_capacity;
  j["wtd.search_duration"] = cfg.wtd.search_duration;
  j["wtd.pass_duration"] = cfg.wtd.pass_duration;
  j["wtd.get_tool_timeout"] = cfg.wtd.get_tool_timeout;
  j["wtd.horizon"] = cfg.wtd.horizon;
  j["wtd.waypoint_m0"] = cfg.wtd.wp_m0;
  j["wtd.waypoint_m1"] = cfg.wtd.wp_m1;
  j["wtd.waypoint_tr"] = cfg.wtd.wp_tr;
  j["wtd.waypoint_ws"] = cfg.wtd.wp_ws;
  j["wtd.tool_room_y"] = cfg.wtd.tool_room_y;
  j["wtd.reward_step"] = cfg.wtd.reward_step;
  j["wtd.reward_failed_pass"] = cfg.wtd.reward_failed_pass;
  j["wtd.reward_delivery"] = cfg.wtd.reward_delivery;
  return j.dump(2) + "\n";
}

TrainConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::string env = j.value("env", "bp10");
  std::string algo = j.value("algo", "macdec_maddrqn");
  TrainConfig c;
  c.env = env;
  c.learner.algorithm = algorithm_from_string(algo);

  static const std::set<std::string> known = {
      "env", "algo", "seed", "num_runs", "episodes", "eval_interval",
      "eval_episodes", "out_dir", "smoothing_window", "jobs",
      "deterministic_timing", "gamma", "lr", "hysteretic_beta", "batch_size",
      "train_interval_boundaries", "target_update_primitive_steps",
      "epsilon_start", "epsilon_end", "epsilon_decay_episodes",
      "exploration_mode", "conditional_argmax", "plain_sum_gamma_power_1",
      "buffer_capacity", "net.hidden", "net.lstm_dec", "net.lstm_cen",
      "bp.grid_size", "bp.horizon", "bp.reward_big", "bp.reward_small",
      "bp.penalty", "bp.reward_step", "wtd.speed", "wtd.human_step_duration",
      "wtd.staging_capacity", "wtd.search_duration", "wtd.pass_duration",
      "wtd.get_tool_timeout", "wtd.horizon", "wtd.waypoint_m0",
      "wtd.waypoint_m1", "wtd.waypoint_tr", "wtd.waypoint_ws",
      "wtd.tool_room_y", "wtd.reward_step", "wtd.reward_failed_pass",
      "wtd.reward_delivery"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown config key: " + it.key());
  }

  c.seed = j.value("seed", c.seed);
  c.num_runs = j.value("num_runs", c.num_runs);
  c.episodes = j.value("episodes", c.episodes);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.smoothing_window = j.value("smoothing_window", c.smoothing_window);
  c.jobs = j.value("jobs", c.jobs);
  c.deterministic_timing = j.value("deterministic_timing", c.deterministic_timing);
  c.learner.gamma = j.value("gamma", c.learner.gamma);
  c.learner.lr = j.value("lr", c.learner.lr);
  c.learner.hysteretic_beta = j.value("hysteretic_beta", c.learner.hysteretic_beta);
  c.learner.batch_size = j.value("batch_size", c.learner.batch_size);
  c.learner.train_interval_boundaries =
      j.value("train_interval_boundaries", c.learner.train_interval_boundaries);
  c.learner.target_update_primitive_steps = j.value(
      "target_update_primitive_steps", c.learner.target_update_primitive_steps);
  c.learner.epsilon_start = j.value("epsilon_start", c.learner.epsilon_start);
  c.learner.epsilon_end = j.value("epsilon_end", c.learner.epsilon_end);
  c.learner.epsilon_decay_episodes =
      j.value("epsilon_decay_episodes", c.learner.epsilon_decay_episodes);
  if (j.count("exploration_mode"))
    c.learner.exploration_mode =
        exploration_mode_from_string(j.at("exploration_mode").get<std::string>());
  c.learner.conditional_argmax =
      j.value("conditional_argmax", c.learner.conditional_argmax);
  c.learner.plain_sum_gamma_power_1 =
      j.value("plain_sum_gamma_power_1", c.learner.plain_sum_gamma_power_1);
  c.learner.buffer_capacity = j.value("buffer_capacity", c.learner.buffer_capacity);
  c.net.hidden = j.value("net.hidden", c.net.hidden);
  c.net.lstm_dec = j.value("net.lstm_dec", c.net.lstm_dec);
  c.net.lstm_cen = j.value("net.lstm_cen", c.net.lstm_cen);
  c.bp.grid_size = j.value("bp.grid_size", c.bp.grid_size);
  c.bp.horizon = j.value("bp.horizon", c.bp.horizon);
  c.bp.reward_big = j.value("bp.reward_big", c.bp.reward_big);
  c.bp.reward_small = j.value("bp.reward_small", c.bp.reward_small);
  c.bp.penalty = j.value("bp.penalty", c.bp.penalty);
  c.bp.reward_step = j.value("bp.reward_step", c.bp.reward_step);
  c.wtd.speed = j.value("wtd.speed", c.wtd.speed);
  c.wtd.human_step_duration =
      j.value("wtd.human_step_duration", c.wtd.human_step_duration);
  c.wtd.staging_capacity = j.value("wtd.staging_capacity", c.wtd.staging_capacity);
  c.wtd.search_duration = j.value("wtd.search_duration", c.wtd.search_duration);
  c.wtd.pass_duration = j.value("wtd.pass_duration", c.wtd.pass_duration);
  c.wtd.get_tool_timeout = j.value("wtd.get_tool_timeout", c.wtd.get_tool_timeout);
  c.wtd.horizon = j.value("wtd.horizon", c.wtd.horizon);
  if (j.count("wtd.waypoint_m0"))
    c.wtd.wp_m0 = j.at("wtd.waypoint_m0").get<std::array<double, 2>>();
  if (j.count("wtd.waypoint_m1"))
    c.wtd.wp_m1 = j.at("wtd.waypoint_m1").get<std::array<double, 2>>();
  if (j.count("wtd.waypoint_tr"))
    c.wtd.wp_tr = j.at("wtd.waypoint_tr").get<std::array<double, 2>>();
  if (j.count("wtd.waypoint_ws"))
    c.wtd.wp_ws = j.at("wtd.waypoint_ws").get<std::array<double, 2>>();
  c.wtd.tool_room_y = j.value("wtd.tool_room_y", c.wtd.tool_room_y);
  c.wtd.reward_step = j.value("wtd.reward_step", c.wtd.reward_step);
  c.wtd.reward_failed_pass =
      j.value("wtd.reward_failed_pass", c.wtd.reward_failed_pass);
  c.wtd.reward_delivery = j.value("wtd.reward_delivery", c.wtd.reward_delivery);

  if (c.num_runs < 1) throw std::invalid_argument("num_runs must be >= 1");
  if (c.eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");
  if (!(c.learner.gamma > 0.0 && c.learner.gamma <= 1.0))
    throw std::invalid_argument("gamma must be in (0,1]");
  if (c.learner.epsilon_start < 0.0 || c.learner.epsilon_start > 1.0 ||
      c.learner.epsilon_end < 0.0 || c.learner.epsilon_end > 1.0)
    throw std::invalid_argument("epsilon must stay within [0,1]");
  if (!(c.learner.hysteretic_beta > 0.0 && c.learner.hysteretic_beta <= 1.0))
    throw std::invalid_argument("hysteretic_beta must be in (0,1]");
  return c;
}

std::unique_ptr<MacroEnv> make_env(const TrainConfig& cfg) {
  TrainConfig c = resolve_config(cfg);
  if (c.env == "wtd") return std::make_unique<WarehouseEnv>(c.wtd);
  return std::make_unique<BoxPushingEnv>(c.bp);
}

}  // namespace macdec

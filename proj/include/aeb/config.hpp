// Copyright 2026 The aebrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AEB_CONFIG_HPP
#define AEB_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "aeb/dqn.hpp"
#include "aeb/env.hpp"
#include "aeb/errors.hpp"
#include "aeb/net.hpp"
#include "aeb/reward.hpp"

namespace aeb {

// Sampling ranges for training scenarios (uniform draws; side and
// scenario are fair coin flips).
struct ScenarioBounds {
  double v_init_min = 2.78;  // m/s (10 km/h)
  double v_init_max = 16.67; // m/s (60 km/h)
  double v_ped_min = 2.0;
  double v_ped_max = 4.0;
  double ttc_min = 1.5;
  double ttc_max = 4.0;

  friend bool operator==(const ScenarioBounds&, const ScenarioBounds&) = default;
};

// Every tunable of a run, flattened into `key = value` lines by
// format_config() and read back by parse_config().
struct Config {
  ScenarioBounds scenario;
  EnvConfig env;
  RewardParams reward;
  NetworkShape network;
  double learning_rate = 0.0005;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  AgentHyperparams agent;
  int episodes = 3000;
  std::uint64_t seed = 7;
  bool trauma = true;

  friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("config: invalid value '" + std::string(text) + "' for key '" +
                      std::string(key) + "'");
  return value;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config: invalid boolean '" + std::string(text) + "' for key '" +
                    std::string(key) + "'");
}

inline std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
  std::vector<int> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<int>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

// Shortest text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct ConfigKey {
  std::string_view name;
  std::string_view doc;
  std::function<void(Config&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

template <class T>
ConfigKey number_key(std::string_view name, std::string_view doc, T Config::*member) {
  return {name, doc,
          [name, member](Config& c, std::string_view v) { c.*member = parse_number<T>(name, v); },
          [member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
            else return std::to_string(c.*member);
          }};
}

template <class T, class Sub>
ConfigKey nested_key(std::string_view name, std::string_view doc, Sub Config::*outer,
                     T Sub::*member) {
  return {name, doc,
          [name, outer, member](Config& c, std::string_view v) {
            c.*outer.*member = parse_number<T>(name, v);
          },
          [outer, member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*outer.*member);
            else return std::to_string(c.*outer.*member);
          }};
}

inline ConfigKey accel_key(std::string_view name, std::string_view doc, Action a) {
  const auto i = static_cast<std::size_t>(action_index(a));
  return {name, doc,
          [name, i](Config& c, std::string_view v) { c.env.accel[i] = parse_number<double>(name, v); },
          [i](const Config& c) { return format_double(c.env.accel[i]); }};
}

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(nested_key("v_init_min", "initial vehicle speed lower bound, m/s (10 km/h)",
                           &Config::scenario, &ScenarioBounds::v_init_min));
    k.push_back(nested_key("v_init_max", "initial vehicle speed upper bound, m/s (60 km/h)",
                           &Config::scenario, &ScenarioBounds::v_init_max));
    k.push_back(nested_key("v_ped_min", "pedestrian walking speed lower bound, m/s",
                           &Config::scenario, &ScenarioBounds::v_ped_min));
    k.push_back(nested_key("v_ped_max", "pedestrian walking speed upper bound, m/s",
                           &Config::scenario, &ScenarioBounds::v_ped_max));
    k.push_back(nested_key("ttc_min", "time-to-collision lower bound, s", &Config::scenario,
                           &ScenarioBounds::ttc_min));
    k.push_back(nested_key("ttc_max", "time-to-collision upper bound, s", &Config::scenario,
                           &ScenarioBounds::ttc_max));
    k.push_back(nested_key("dt", "control interval, s", &Config::env, &EnvConfig::dt));
    k.push_back(nested_key("safety_line", "safety distance ahead of the pedestrian, m",
                           &Config::env, &EnvConfig::safety_line));
    k.push_back(nested_key("curb_offset", "lateral curb position, m (7 m road)", &Config::env,
                           &EnvConfig::curb_offset));
    k.push_back(nested_key("sensor_noise", "std-dev of relative-position noise, m",
                           &Config::env, &EnvConfig::sensor_noise));
    k.push_back(accel_key("accel_high", "strong brake, m/s^2", Action::High));
    k.push_back(accel_key("accel_mid", "mid brake, m/s^2", Action::Mid));
    k.push_back(accel_key("accel_low", "weak brake, m/s^2", Action::Low));
    k.push_back(accel_key("accel_nothing", "no brake, m/s^2", Action::Nothing));
    k.push_back(nested_key("norm_speed", "observation scale for speed", &Config::env,
                           &EnvConfig::norm_speed));
    k.push_back(nested_key("norm_rel_x", "observation scale for longitudinal offset",
                           &Config::env, &EnvConfig::norm_rel_x));
    k.push_back(nested_key("norm_rel_y", "observation scale for lateral offset", &Config::env,
                           &EnvConfig::norm_rel_y));
    k.push_back(nested_key("max_steps", "hard episode cap, steps", &Config::env,
                           &EnvConfig::max_steps));
    k.push_back(nested_key("reward_alpha", "braking penalty per squared metre",
                           &Config::reward, &RewardParams::alpha));
    k.push_back(nested_key("reward_beta", "constant braking penalty", &Config::reward,
                           &RewardParams::beta));
    k.push_back(nested_key("reward_eta", "collision penalty per squared m/s", &Config::reward,
                           &RewardParams::eta));
    k.push_back(nested_key("reward_lambda", "constant collision penalty", &Config::reward,
                           &RewardParams::lambda));
    k.push_back({"hidden_layers", "hidden layer widths (input 15 and output 4 are fixed)",
                 [](Config& c, std::string_view v) {
                   auto hidden = parse_int_list("hidden_layers", v);
                   c.network.sizes.assign(1, static_cast<int>(kObservationSize));
                   c.network.sizes.insert(c.network.sizes.end(), hidden.begin(), hidden.end());
                   c.network.sizes.push_back(static_cast<int>(kNumActions));
                 },
                 [](const Config& c) {
                   std::string s;
                   for (std::size_t i = 1; i + 1 < c.network.sizes.size(); ++i) {
                     if (i > 1) s += ',';
                     s += std::to_string(c.network.sizes[i]);
                   }
                   return s;
                 }});
    k.push_back(nested_key("leaky_slope", "leaky-ReLU negative slope", &Config::network,
                           &NetworkShape::leaky_slope));
    k.push_back(number_key("learning_rate", "RMSProp learning rate", &Config::learning_rate));
    k.push_back(number_key("rmsprop_decay", "RMSProp accumulator decay", &Config::rmsprop_decay));
    k.push_back(
        number_key("rmsprop_epsilon", "RMSProp denominator epsilon", &Config::rmsprop_epsilon));
    k.push_back(nested_key("gamma", "discount factor", &Config::agent, &AgentHyperparams::gamma));
    k.push_back(nested_key("epsilon_start", "exploration rate at episode 0", &Config::agent,
                           &AgentHyperparams::epsilon_start));
    k.push_back(nested_key("epsilon_end", "exploration rate after decay", &Config::agent,
                           &AgentHyperparams::epsilon_end));
    k.push_back(nested_key("epsilon_decay_episodes", "linear decay horizon, episodes",
                           &Config::agent, &AgentHyperparams::epsilon_decay_episodes));
    k.push_back(nested_key("replay_capacity", "replay memory size", &Config::agent,
                           &AgentHyperparams::replay_capacity));
    k.push_back(nested_key("trauma_capacity", "trauma memory size", &Config::agent,
                           &AgentHyperparams::trauma_capacity));
    k.push_back(nested_key("replay_batch", "replay draws per training step", &Config::agent,
                           &AgentHyperparams::replay_batch));
    k.push_back(nested_key("trauma_batch", "trauma draws per training step", &Config::agent,
                           &AgentHyperparams::trauma_batch));
    k.push_back(nested_key("target_sync_steps", "training steps between target clones",
                           &Config::agent, &AgentHyperparams::target_sync_steps));
    k.push_back(nested_key("min_replay", "replay fill before the first training step",
                           &Config::agent, &AgentHyperparams::min_replay));
    k.push_back(number_key("episodes", "training episodes", &Config::episodes));
    k.push_back(number_key("seed", "master random seed", &Config::seed));
    k.push_back({"trauma", "use the trauma memory when sampling batches",
                 [](Config& c, std::string_view v) { c.trauma = parse_bool("trauma", v); },
                 [](const Config& c) { return std::string(c.trauma ? "true" : "false"); }});
    return k;
  }();
  return keys;
}

}  // namespace detail

/// Range checks; each message names the violated constraint.
inline void validate(const Config& c) {
  const auto& s = c.scenario;
  if (!(s.v_init_min > 0.0 && s.v_init_min <= s.v_init_max))
    throw ConfigError("config: require 0 < v_init_min <= v_init_max");
  if (!(s.v_ped_min > 0.0 && s.v_ped_min <= s.v_ped_max))
    throw ConfigError("config: require 0 < v_ped_min <= v_ped_max");
  if (!(s.ttc_min > 0.0 && s.ttc_min <= s.ttc_max && s.ttc_max <= kPedestrianDistanceSeconds))
    throw ConfigError("config: require 0 < ttc_min <= ttc_max <= 5");
  const auto& e = c.env;
  if (!(e.dt > 0.0)) throw ConfigError("config: dt must be > 0");
  if (!(e.safety_line >= 0.0)) throw ConfigError("config: safety_line must be >= 0");
  if (!(e.curb_offset > 0.0)) throw ConfigError("config: curb_offset must be > 0");
  if (!(e.sensor_noise >= 0.0)) throw ConfigError("config: sensor_noise must be >= 0");
  for (double a : e.accel)
    if (!(a <= 0.0)) throw ConfigError("config: brake accelerations must be <= 0");
  if (!(e.norm_speed > 0.0 && e.norm_rel_x > 0.0 && e.norm_rel_y > 0.0))
    throw ConfigError("config: normalisation scales must be > 0");
  if (e.max_steps <= 0) throw ConfigError("config: max_steps must be > 0");
  const auto& r = c.reward;
  if (!(r.alpha > 0.0 && r.beta > 0.0 && r.eta > 0.0 && r.lambda > 0.0))
    throw ConfigError("config: reward weights alpha, beta, eta, lambda must be > 0");
  if (c.network.sizes.size() < 2 ||
      c.network.sizes.front() != static_cast<int>(kObservationSize) ||
      c.network.sizes.back() != static_cast<int>(kNumActions))
    throw ConfigError("config: network must map 15 inputs to 4 outputs");
  validate(c.network);
  if (!(c.learning_rate > 0.0)) throw ConfigError("config: learning_rate must be > 0");
  if (!(c.rmsprop_decay >= 0.0 && c.rmsprop_decay < 1.0))
    throw ConfigError("config: rmsprop_decay must lie in [0, 1)");
  if (!(c.rmsprop_epsilon > 0.0)) throw ConfigError("config: rmsprop_epsilon must be > 0");
  validate(c.agent);
  if (c.episodes < 0) throw ConfigError("config: episodes must be >= 0");
}

/// Parses `key = value` lines ('#' starts a comment). Missing keys keep
/// their defaults; unknown or repeated keys are errors.
inline Config parse_config(std::string_view text, Config base = {}) {
  Config cfg = std::move(base);
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto& keys = detail::config_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
    if (it == keys.end()) throw ConfigError("config: unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError("config: duplicate key '" + std::string(key) + "'");
    it->set(cfg, value);
  }
  validate(cfg);
  return cfg;
}

/// Fully resolved configuration, one documented key per line.
inline std::string format_config(const Config& c) {
  std::ostringstream os;
  for (const auto& k : detail::config_keys())
    os << k.name << " = " << k.get(c) << "  # " << k.doc << '\n';
  return os.str();
}

}  // namespace aeb

#endif  // AEB_CONFIG_HPP

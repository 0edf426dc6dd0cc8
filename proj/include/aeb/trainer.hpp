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

#ifndef AEB_TRAINER_HPP
#define AEB_TRAINER_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aeb/config.hpp"
#include "aeb/dqn.hpp"
#include "aeb/env.hpp"
#include "aeb/errors.hpp"
#include "aeb/net.hpp"

namespace aeb {

using TrainConfig = Config;

// Random streams derived from the master seed.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kScenario = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kAction = 4;
inline constexpr std::uint64_t kSample = 5;
}  // namespace stream

struct EpisodeLog {
  int index = 0;
  std::optional<EpisodeEvent> outcome;  // empty only if the step cap was hit
  double ret = 0.0;                     // undiscounted sum of rewards
  double discounted_ret = 0.0;
  int steps = 0;
  double v_init = 0.0;
  double ttc = 0.0;
  Scenario scenario = Scenario::Cross;
  Side side = Side::Near;
  double final_gap = 0.0;  // pedestrian x minus vehicle x at the end
  double epsilon = 0.0;
  double mean_loss = 0.0;  // over training steps taken in the episode
  bool truncated = false;

  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

inline ScenarioParams sample_scenario(const Config& cfg, Rng& rng) {
  const auto& b = cfg.scenario;
  std::uniform_real_distribution<double> v_init(b.v_init_min, b.v_init_max);
  std::uniform_real_distribution<double> v_ped(b.v_ped_min, b.v_ped_max);
  std::uniform_real_distribution<double> ttc(b.ttc_min, b.ttc_max);
  std::bernoulli_distribution coin(0.5);
  const double vi = v_init(rng);
  const double vp = v_ped(rng);
  const double t = ttc(rng);
  const Side side = coin(rng) ? Side::Far : Side::Near;
  const Scenario sc = coin(rng) ? Scenario::Stay : Scenario::Cross;
  return make_scenario(vi, t, side, sc, vp, cfg.env);
}

/// Plays one episode. `choose(obs)` picks the action; `on_step(transition)`
/// sees every transition in order (nothing after the terminal one).
template <class Choose, class OnStep>
EpisodeLog play_episode(Environment& env, const ScenarioParams& params, std::uint64_t noise_seed,
                        double gamma, Choose&& choose, OnStep&& on_step) {
  EpisodeLog log;
  log.v_init = params.v_init;
  log.ttc = params.ttc;
  log.scenario = params.scenario;
  log.side = params.side;
  Observation obs = env.reset(params, noise_seed);
  double discount = 1.0;
  while (true) {
    const Action a = choose(obs);
    const StepResult res = env.step(a);
    Transition t{obs, a, res.reward, res.observation, res.event.has_value(),
                 res.event == EpisodeEvent::Bump};
    on_step(t);
    log.ret += res.reward;
    log.discounted_ret += discount * res.reward;
    discount *= gamma;
    obs = res.observation;
    if (res.event) {
      log.outcome = res.event;
      break;
    }
    if (env.at_step_cap()) {
      log.truncated = true;
      break;
    }
  }
  log.steps = env.steps();
  log.final_gap = env.pedestrian().x - env.vehicle().x;
  return log;
}

enum class RunMode { Train, Eval };

/// Agent-driven episode. Train mode explores with `epsilon` and feeds every
/// transition to the agent; eval mode is greedy and leaves memory untouched.
inline EpisodeLog run_episode(Environment& env, const ScenarioParams& params,
                              std::uint64_t noise_seed, DqnAgent& agent, RunMode mode,
                              double epsilon, Rng& action_rng) {
  const double eps = mode == RunMode::Train ? epsilon : 0.0;
  double loss_sum = 0.0;
  int loss_count = 0;
  EpisodeLog log = play_episode(
      env, params, noise_seed, agent.hyperparams().gamma,
      [&](const Observation& o) { return agent.act(o, eps, action_rng); },
      [&](const Transition& t) {
        if (mode != RunMode::Train) return;
        if (auto loss = agent.observe(t)) {
          loss_sum += *loss;
          ++loss_count;
        }
      });
  log.epsilon = eps;
  log.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
  return log;
}

struct TrainResult {
  QNetworkParams net;
  OptimizerState optimizer;
  std::vector<EpisodeLog> logs;
  long train_steps = 0;
  std::uint64_t trauma_reads = 0;
  std::size_t replay_size = 0;
  std::size_t trauma_size = 0;
};

inline QNetworkParams initial_params(const Config& cfg) {
  Rng rng = make_rng(cfg.seed, stream::kInit);
  return init_params(cfg.network, rng());
}

using ProgressFn = std::function<void(const EpisodeLog&)>;

/// Full training run. Deterministic in cfg (single-threaded).
inline TrainResult train(const Config& cfg, const ProgressFn& progress = {}) {
  validate(cfg);
  QNetworkParams net = initial_params(cfg);
  OptimizerState opt =
      make_optimizer(net, cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon);
  DqnAgent agent(std::move(net), std::move(opt), cfg.agent, cfg.trauma,
                 make_rng(cfg.seed, stream::kSample));
  Environment env(cfg.env, cfg.reward);
  Rng scenario_rng = make_rng(cfg.seed, stream::kScenario);
  Rng noise_rng = make_rng(cfg.seed, stream::kNoise);
  Rng action_rng = make_rng(cfg.seed, stream::kAction);

  TrainResult result;
  result.logs.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int k = 0; k < cfg.episodes; ++k) {
    const ScenarioParams params = sample_scenario(cfg, scenario_rng);
    const std::uint64_t noise_seed = noise_rng();
    EpisodeLog log = run_episode(env, params, noise_seed, agent, RunMode::Train,
                                 epsilon_at(cfg.agent, k), action_rng);
    log.index = k;
    if (!std::isfinite(log.ret) || !std::isfinite(log.mean_loss) || !agent.net().all_finite())
      throw NumericError("training diverged at episode " + std::to_string(k) +
                         " (return " + std::to_string(log.ret) + ", mean loss " +
                         std::to_string(log.mean_loss) + ")");
    if (progress) progress(log);
    result.logs.push_back(log);
  }
  result.net = agent.net();
  result.optimizer = agent.optimizer();
  result.train_steps = agent.train_steps();
  result.trauma_reads = agent.trauma().reads();
  result.replay_size = agent.replay().size();
  result.trauma_size = agent.trauma().size();
  return result;
}

/// Trailing moving average; the first window-1 entries average what exists.
inline std::vector<double> moving_average(const std::vector<double>& xs, std::size_t window) {
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= window) sum -= xs[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

inline std::vector<double> returns_of(const std::vector<EpisodeLog>& logs) {
  std::vector<double> r;
  r.reserve(logs.size());
  for (const auto& l : logs) r.push_back(l.ret);
  return r;
}

}  // namespace aeb

#endif  // AEB_TRAINER_HPP

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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "aeb/trainer.hpp"

namespace aeb {
namespace {

Config small_config(int episodes, std::uint64_t seed = 3) {
  Config c;
  c.episodes = episodes;
  c.seed = seed;
  c.agent.min_replay = 64;
  c.agent.epsilon_decay_episodes = std::max(1, episodes / 2);
  return c;
}

TEST(SampleScenario, GeometryFollowsDraw) {
  const auto p = make_scenario(10.0, 2.0, Side::Near, Scenario::Cross, 3.0, EnvConfig{});
  EXPECT_DOUBLE_EQ(p.p_trig, 30.0);
  EXPECT_DOUBLE_EQ(p.ped_x, 50.0);
}

TEST(SampleScenario, StaysInsideBounds) {
  const Config cfg;
  Rng rng = make_rng(1, stream::kScenario);
  for (int i = 0; i < 10000; ++i) {
    const auto p = sample_scenario(cfg, rng);
    ASSERT_GE(p.v_init, cfg.scenario.v_init_min);
    ASSERT_LE(p.v_init, cfg.scenario.v_init_max);
    ASSERT_GE(p.ttc, cfg.scenario.ttc_min);
    ASSERT_LE(p.ttc, cfg.scenario.ttc_max);
    ASSERT_GE(p.v_ped, cfg.scenario.v_ped_min);
    ASSERT_LE(p.v_ped, cfg.scenario.v_ped_max);
    ASSERT_DOUBLE_EQ(p.ped_x, 5.0 * p.v_init);
    ASSERT_DOUBLE_EQ(p.p_trig, (5.0 - p.ttc) * p.v_init);
  }
}

TEST(SampleScenario, Moments) {
  const Config cfg;
  Rng rng = make_rng(2, stream::kScenario);
  const int n = 10000;
  double v_sum = 0.0;
  int far = 0, stay = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_scenario(cfg, rng);
    v_sum += p.v_init;
    far += p.side == Side::Far;
    stay += p.scenario == Scenario::Stay;
  }
  EXPECT_NEAR(v_sum / n, 9.72, 0.2);
  EXPECT_NEAR(static_cast<double>(far) / n, 0.5, 0.02);
  EXPECT_NEAR(static_cast<double>(stay) / n, 0.5, 0.02);
}

DqnAgent stub_agent(const Config& cfg, Action forced) {
  // Zero weights plus a bias that makes `forced` the greedy action.
  auto net = initial_params(cfg).zeros_like();
  net.layers.back().bias(action_index(forced)) = 1.0;
  return DqnAgent(net, make_optimizer(net), cfg.agent, true, Rng(1));
}

TEST(RunEpisode, NothingInStayScenarioPassesWithZeroReturn) {
  const Config cfg;
  auto agent = stub_agent(cfg, Action::Nothing);
  Environment env(cfg.env, cfg.reward);
  Rng rng(1);
  const auto p = make_scenario(10.0, 2.0, Side::Near, Scenario::Stay, 3.0, cfg.env);
  const auto log = run_episode(env, p, 5, agent, RunMode::Eval, 0.0, rng);
  EXPECT_EQ(log.outcome, EpisodeEvent::Pass);
  EXPECT_EQ(log.ret, 0.0);
  EXPECT_EQ(agent.replay().size(), 0u);
}

TEST(RunEpisode, HighBrakingStopsWithNegativeReturn) {
  const Config cfg;
  auto agent = stub_agent(cfg, Action::High);
  Environment env(cfg.env, cfg.reward);
  Rng rng(1);
  const auto p = make_scenario(10.0, 2.0, Side::Near, Scenario::Cross, 3.0, cfg.env);
  const auto log = run_episode(env, p, 5, agent, RunMode::Eval, 0.0, rng);
  EXPECT_EQ(log.outcome, EpisodeEvent::Stop);
  EXPECT_LT(log.ret, 0.0);
  EXPECT_FALSE(log.truncated);
}

TEST(RunEpisode, TrainModeStoresEveryStep) {
  const Config cfg;
  auto agent = stub_agent(cfg, Action::Low);
  Environment env(cfg.env, cfg.reward);
  Rng rng(1);
  std::size_t total = 0;
  Rng scen(4);
  for (int k = 0; k < 5; ++k) {
    const auto log =
        run_episode(env, sample_scenario(cfg, scen), scen(), agent, RunMode::Train, 0.5, rng);
    total += static_cast<std::size_t>(log.steps);
    EXPECT_EQ(agent.replay().size(), total);
  }
}

TEST(RunEpisode, DiscountedReturnMatchesRewards) {
  const Config cfg;
  Environment env(cfg.env, cfg.reward);
  const auto p = make_scenario(12.0, 1.2, Side::Far, Scenario::Cross, 2.0, cfg.env);
  std::vector<double> rewards;
  const auto log = play_episode(
      env, p, 9, 0.9, [](const Observation&) { return Action::Low; },
      [&](const Transition& t) { rewards.push_back(t.r); });
  double g = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) g = rewards[i] + 0.9 * g;
  EXPECT_NEAR(log.discounted_ret, g, 1e-9);
  EXPECT_NEAR(log.ret, std::accumulate(rewards.begin(), rewards.end(), 0.0), 1e-9);
  EXPECT_EQ(rewards.size(), static_cast<std::size_t>(log.steps));
}

TEST(Train, ZeroEpisodesReturnsInitialNetwork) {
  const auto cfg = small_config(0);
  const auto r = train(cfg);
  EXPECT_TRUE(r.logs.empty());
  EXPECT_EQ(r.net, initial_params(cfg));
  EXPECT_EQ(r.train_steps, 0);
}

TEST(Train, SameSeedSameRun) {
  const auto cfg = small_config(40);
  const auto a = train(cfg);
  const auto b = train(cfg);
  EXPECT_EQ(a.logs, b.logs);
  EXPECT_EQ(a.net, b.net);
  EXPECT_EQ(a.optimizer, b.optimizer);
  const auto c = train(small_config(40, 4));
  EXPECT_NE(a.logs, c.logs);
}

TEST(Train, MemoryAccounting) {
  const auto cfg = small_config(60);
  const auto r = train(cfg);
  std::size_t steps = 0, bumps = 0;
  for (const auto& l : r.logs) {
    steps += static_cast<std::size_t>(l.steps);
    bumps += l.outcome == EpisodeEvent::Bump;
  }
  EXPECT_EQ(r.replay_size, std::min(cfg.agent.replay_capacity, steps));
  EXPECT_EQ(r.trauma_size, std::min(cfg.agent.trauma_capacity, bumps));
  EXPECT_EQ(r.train_steps, static_cast<long>(steps - cfg.agent.min_replay + 1));
  for (std::size_t k = 0; k < r.logs.size(); ++k) {
    EXPECT_EQ(r.logs[k].index, static_cast<int>(k));
    EXPECT_EQ(r.logs[k].epsilon, epsilon_at(cfg.agent, static_cast<int>(k)));
  }
}

TEST(Train, AblationNeverReadsTrauma) {
  auto cfg = small_config(60);
  cfg.trauma = false;
  const auto r = train(cfg);
  EXPECT_EQ(r.trauma_reads, 0u);
  cfg.trauma = true;
  const auto with = train(cfg);
  if (with.trauma_size > 0) {
    EXPECT_GT(with.trauma_reads, 0u);
  }
}

TEST(MovingAverage, Trailing) {
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const auto m = moving_average(xs, 2);
  EXPECT_EQ(m, (std::vector<double>{1, 1.5, 2.5, 3.5, 4.5}));
  EXPECT_EQ(moving_average(xs, 10).back(), 3.0);
}

}  // namespace
}  // namespace aeb

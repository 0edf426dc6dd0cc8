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

#include "aeb/eval.hpp"
#include "aeb/trainer.hpp"

namespace aeb {
namespace {

const ConstantPolicy kHigh{Action::High};
const ConstantPolicy kNothing{Action::Nothing};

TEST(Feasibility, Examples) {
  EXPECT_FALSE(min_brake_feasible(16.67, 0.9, 3.0, 9.8));
  EXPECT_TRUE(min_brake_feasible(16.67, 1.5, 3.0, 9.8));
  EXPECT_FALSE(min_brake_feasible(2.78, 0.9, 3.0, 9.8));
  EXPECT_THROW(min_brake_feasible(0.0, 1.0, 3.0, 9.8), UsageError);
}

TEST(Feasibility, AgreesWithFullBrakingFromTrigger) {
  // Policy that brakes fully once the pedestrian starts moving.
  auto brake_on_trigger = [](const Environment& env) {
    return env.pedestrian().mode == PedestrianMode::Stay ? Action::Nothing : Action::High;
  };
  const Config cfg;
  Rng rng(3);
  std::uniform_real_distribution<double> v(3.0, 16.67), t(0.9, 4.0);
  for (int i = 0; i < 500; ++i) {
    const double vi = v(rng), ttc = t(rng);
    // A slow pedestrian keeps the lane occupied for the whole episode.
    const auto p = make_scenario(vi, ttc, Side::Far, Scenario::Cross, 0.1, cfg.env);
    Environment env(cfg.env, cfg.reward);
    env.reset(p, 0);
    std::optional<EpisodeEvent> ev;
    while (!ev) ev = env.step(brake_on_trigger(env)).event;
    const bool feasible = min_brake_feasible(vi, ttc, p.l, 9.8);
    // Braking starts one step after the trigger, so the margin is one step of travel.
    const double slack = vi * cfg.env.dt;
    const double margin = ttc * vi - (vi * vi / 19.6 + p.l);
    if (margin > slack) {
      EXPECT_EQ(*ev, EpisodeEvent::Stop) << vi << " " << ttc;
    }
    if (!feasible) {
      EXPECT_EQ(*ev, EpisodeEvent::Bump) << vi << " " << ttc;
    }
  }
}

TEST(EvaluateEpisode, HighStubStopsFarAway) {
  const Config cfg;
  Environment env(cfg.env, cfg.reward);
  const auto p = make_scenario(10.0, 4.0, Side::Near, Scenario::Cross, 3.0, cfg.env);
  const auto log = evaluate_episode(kHigh, env, p, 1);
  EXPECT_EQ(log.outcome, EpisodeEvent::Stop);
  EXPECT_NEAR(log.final_gap, 50.0 - 100.0 / 19.6, 1e-9);
  EXPECT_NEAR(log.final_gap, 44.9, 0.01);
}

TEST(TtcSweep, HighStubNeverCollidesAtLongTtc) {
  const Config cfg;
  const auto r = ttc_sweep(kHigh, cfg, {4.0}, 200, 1, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].collisions, 0);
  EXPECT_EQ(r[0].rate, 0.0);
}

TEST(TtcSweep, OutcomesPartitionTrials) {
  const Config cfg;
  const auto r = ttc_sweep(kNothing, cfg, default_ttc_values(), 50, 2, 1);
  ASSERT_EQ(r.size(), 16u);
  for (const auto& s : r) {
    EXPECT_EQ(s.collisions + s.stops + s.passes + s.crosses + s.truncated, s.trials);
    EXPECT_EQ(s.stops, 0);
    EXPECT_GE(s.infeasible_fraction, 0.0);
    EXPECT_LE(s.infeasible_fraction, 1.0);
  }
  EXPECT_NEAR(r.front().ttc, 0.9, 1e-12);
  EXPECT_NEAR(r.back().ttc, 3.9, 1e-12);
  EXPECT_THROW(ttc_sweep(kNothing, cfg, {}, 10, 1), UsageError);
}

TEST(TtcSweep, InfeasibleShareShrinksWithTtc) {
  const Config cfg;
  const auto r = ttc_sweep(kHigh, cfg, {0.9, 1.5, 2.5}, 300, 3, 1);
  EXPECT_GT(r[0].infeasible_fraction, r[1].infeasible_fraction);
  EXPECT_GE(r[1].infeasible_fraction, r[2].infeasible_fraction);
  EXPECT_EQ(r[2].infeasible, 0);
}

TEST(TtcSweep, ThreadCountDoesNotChangeResults) {
  const Config cfg;
  const auto a = ttc_sweep(kNothing, cfg, {1.1, 2.9}, 40, 4, 1);
  const auto b = ttc_sweep(kNothing, cfg, {1.1, 2.9}, 40, 4, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].collisions, b[i].collisions);
    EXPECT_EQ(a[i].crosses, b[i].crosses);
    EXPECT_EQ(a[i].infeasible, b[i].infeasible);
  }
}

TEST(Trace, RowsAndConstantSpeed) {
  const Config cfg;
  const auto p = make_scenario(16.67, 1.5, Side::Near, Scenario::Cross, 3.0, cfg.env);
  const auto rows = trace_episode(kNothing, cfg, p, 1);
  Environment env(cfg.env, cfg.reward);
  const auto log = evaluate_episode(kNothing, env, p, 1);
  ASSERT_EQ(rows.size(), static_cast<std::size_t>(log.steps) + 1);
  EXPECT_FALSE(rows.front().action.has_value());
  for (const auto& r : rows) EXPECT_EQ(r.v, 16.67);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].t, i * 0.1, 1e-12);
    EXPECT_EQ(rows[i].action, Action::Nothing);
  }
}

TEST(GapStats, HighStubGapsAreLarge) {
  const Config cfg;
  const auto s = stopping_gap_stats(kHigh, cfg, 200, 5, 1);
  EXPECT_EQ(s.episodes, 200);
  EXPECT_EQ(s.stops, 200);
  EXPECT_EQ(s.mid_cross_inside_line, 0);
  EXPECT_GT(s.min, cfg.env.safety_line);
  EXPECT_LE(s.min, s.median);
  EXPECT_LE(s.median, s.max);
  int total = 0;
  for (int h : s.histogram) total += h;
  EXPECT_EQ(total, s.stops);
}

TEST(GapStats, MedianOf) {
  EXPECT_EQ(median_of({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median_of({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_EQ(median_of({}), 0.0);
}

TEST(StayLiveness, StubsBehaveAsExpected) {
  const Config cfg;
  EXPECT_EQ(stay_liveness(kNothing, cfg, 100, 6, 1).pass_rate, 1.0);
  const auto high = stay_liveness(kHigh, cfg, 100, 6, 1);
  EXPECT_EQ(high.stops, 100);
  EXPECT_EQ(high.pass_rate, 0.0);
}

TEST(Ncap, Points) {
  EXPECT_EQ(ncap_points_available(20), 1.0);
  EXPECT_EQ(ncap_points_available(35), 3.0);
  EXPECT_EQ(ncap_points_available(60), 1.0);
  EXPECT_THROW(ncap_points_available(33), UsageError);
  double total = 0.0;
  for (double p : kNcapPoints) total += p;
  EXPECT_EQ(total, 18.0);
}

TEST(Ncap, Scores) {
  NcapCase c;
  c.v_test_kmh = 40;
  c.collided = false;
  EXPECT_EQ(ncap_score(c), 3.0);
  c.collided = true;
  c.v_impact = kmh_to_ms(40);
  EXPECT_EQ(ncap_score(c), 0.0);
  c.v_impact = kmh_to_ms(40) * 2.0 / 3.0;
  EXPECT_NEAR(ncap_score(c), 1.0, 1e-12);
}

TEST(Ncap, NothingStubHitsNearSideChild) {
  const Config cfg;
  for (int v : kNcapSpeedsKmh) {
    const auto c = ncap_run(kNothing, cfg, NcapTest::CVNA, v);
    EXPECT_TRUE(c.collided) << v;
    EXPECT_DOUBLE_EQ(c.v_impact, kmh_to_ms(v));
    EXPECT_EQ(c.points_awarded, 0.0);
  }
}

TEST(Ncap, NothingStubMissesFastFarSideAdult) {
  // The far-side pedestrian clears the road before the vehicle arrives.
  const Config cfg;
  for (int v : kNcapSpeedsKmh) {
    const auto c = ncap_run(kNothing, cfg, NcapTest::CVFA, v);
    EXPECT_EQ(c.outcome, EpisodeEvent::Cross) << v;
  }
}

TEST(Ncap, HighStubAvoidsAndSuiteIsDeterministic) {
  const Config cfg;
  const auto c = ncap_run(kHigh, cfg, NcapTest::CVNA, 20);
  EXPECT_FALSE(c.collided);
  EXPECT_EQ(c.points_awarded, 1.0);
  const auto a = ncap_suite(kHigh, cfg);
  ASSERT_EQ(a.size(), 18u);
  EXPECT_EQ(a, ncap_suite(kHigh, cfg));
  EXPECT_EQ(a.front().test, NcapTest::CVFA);
  EXPECT_EQ(a.back().test, NcapTest::CVNA);
  double total = 0.0;
  for (const auto& x : a) total += x.points_awarded;
  EXPECT_EQ(total, 36.0);
}

TEST(Ncap, NoiseSettingIsIgnored) {
  Config cfg;
  cfg.env.sensor_noise = 0.5;
  const Config quiet;
  EXPECT_EQ(ncap_suite(kNothing, cfg), ncap_suite(kNothing, quiet));
}

}  // namespace
}  // namespace aeb

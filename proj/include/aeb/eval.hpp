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

#ifndef AEB_EVAL_HPP
#define AEB_EVAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

#include "aeb/config.hpp"
#include "aeb/dqn.hpp"
#include "aeb/env.hpp"
#include "aeb/errors.hpp"
#include "aeb/net.hpp"
#include "aeb/trainer.hpp"

namespace aeb {

// Greedy policy over a trained network. Read-only; safe to share.
struct GreedyPolicy {
  const QNetworkParams* net;
  Action operator()(const Observation& o) const { return greedy_action(*net, o); }
};

struct ConstantPolicy {
  Action action;
  Action operator()(const Observation&) const { return action; }
};

namespace eval_stream {
inline constexpr std::uint64_t kSweep = 100;
inline constexpr std::uint64_t kGap = 200;
inline constexpr std::uint64_t kStay = 300;
}  // namespace eval_stream

/// Greedy episode with no learning. The returned environment state is left
/// at the terminal step for inspection.
template <class Policy>
EpisodeLog evaluate_episode(const Policy& policy, Environment& env, const ScenarioParams& params,
                            std::uint64_t noise_seed) {
  return play_episode(env, params, noise_seed, 1.0, policy, [](const Transition&) {});
}

/// True iff full braking from the trigger instant stops the vehicle short of
/// the safety line: ttc*v >= v^2/(2*a_max) + l.
inline bool min_brake_feasible(double v, double ttc, double l, double a_max) {
  if (!(v > 0.0)) throw UsageError("min_brake_feasible: v must be positive");
  return ttc * v >= v * v / (2.0 * a_max) + l;
}

inline double max_brake(const EnvConfig& env) {
  return -*std::min_element(env.accel.begin(), env.accel.end());
}

// Runs fn(i) for i in [0, n) across worker threads. Each index writes only
// its own output slot, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct SweepResult {
  double ttc = 0.0;
  int trials = 0;
  int collisions = 0;
  double rate = 0.0;
  int stops = 0;
  int passes = 0;
  int crosses = 0;
  int truncated = 0;
  int infeasible = 0;  // draws for which full braking at the trigger cannot avoid the line
  double infeasible_fraction = 0.0;
};

// Crossing scenario at a fixed ttc, other parameters drawn as in training.
inline ScenarioParams sample_sweep_scenario(const Config& cfg, double ttc, Rng& rng) {
  const auto& b = cfg.scenario;
  std::uniform_real_distribution<double> v_init(b.v_init_min, b.v_init_max);
  std::uniform_real_distribution<double> v_ped(b.v_ped_min, b.v_ped_max);
  std::bernoulli_distribution coin(0.5);
  const double vi = v_init(rng);
  const double vp = v_ped(rng);
  const Side side = coin(rng) ? Side::Far : Side::Near;
  return make_scenario(vi, ttc, side, Scenario::Cross, vp, cfg.env);
}

/// Collision rate over `trials` crossing episodes per ttc value. The
/// feasibility bound is evaluated on the very same v_init draws.
template <class Policy>
std::vector<SweepResult> ttc_sweep(const Policy& policy, const Config& cfg,
                                   const std::vector<double>& ttc_values, int trials,
                                   std::uint64_t seed, unsigned threads = 0) {
  if (ttc_values.empty()) throw UsageError("ttc_sweep: no ttc values");
  std::vector<SweepResult> out;
  for (std::size_t ti = 0; ti < ttc_values.size(); ++ti) {
    const double ttc = ttc_values[ti];
    std::vector<EpisodeLog> logs(static_cast<std::size_t>(trials));
    std::vector<char> feasible(static_cast<std::size_t>(trials));
    parallel_for(logs.size(), threads, [&](std::size_t i) {
      Rng rng = make_rng(seed, eval_stream::kSweep + ti, i);
      const ScenarioParams p = sample_sweep_scenario(cfg, ttc, rng);
      Environment env(cfg.env, cfg.reward);
      logs[i] = evaluate_episode(policy, env, p, rng());
      feasible[i] = min_brake_feasible(p.v_init, ttc, p.l, max_brake(cfg.env));
    });
    SweepResult r;
    r.ttc = ttc;
    r.trials = trials;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const auto& l = logs[i];
      if (l.truncated) ++r.truncated;
      else if (*l.outcome == EpisodeEvent::Bump) ++r.collisions;
      else if (*l.outcome == EpisodeEvent::Stop) ++r.stops;
      else if (*l.outcome == EpisodeEvent::Pass) ++r.passes;
      else ++r.crosses;
      if (!feasible[i]) ++r.infeasible;
    }
    r.rate = trials > 0 ? static_cast<double>(r.collisions) / trials : 0.0;
    r.infeasible_fraction = trials > 0 ? static_cast<double>(r.infeasible) / trials : 0.0;
    out.push_back(r);
  }
  return out;
}

// 0.9, 1.1, ..., 3.9 s.
inline std::vector<double> default_ttc_values() {
  std::vector<double> v;
  for (int i = 0; i < 16; ++i) v.push_back((9 + 2 * i) / 10.0);
  return v;
}

struct TraceRow {
  double t = 0.0;
  double veh_x = 0.0;
  double ped_x = 0.0;
  double ped_y = 0.0;
  double v = 0.0;
  std::optional<Action> action;  // empty on the initial row
  double reward = 0.0;
};

/// Per-step trajectory, initial state first.
template <class Policy>
std::vector<TraceRow> trace_episode(const Policy& policy, const Config& cfg,
                                    const ScenarioParams& params, std::uint64_t noise_seed) {
  Environment env(cfg.env, cfg.reward);
  std::vector<TraceRow> rows;
  Observation obs = env.reset(params, noise_seed);
  auto row = [&](std::optional<Action> a, double r) {
    rows.push_back({env.steps() * params.dt, env.vehicle().x, env.pedestrian().x,
                    env.pedestrian().y, env.vehicle().v, a, r});
  };
  row(std::nullopt, 0.0);
  while (!env.done() && !env.at_step_cap()) {
    const Action a = policy(obs);
    const StepResult res = env.step(a);
    obs = res.observation;
    row(a, res.reward);
  }
  return rows;
}

struct GapStats {
  int episodes = 0;
  int stops = 0;
  std::vector<double> gaps;  // one per Stop episode, in trial order
  int stops_mid_cross = 0;
  int mid_cross_inside_line = 0;  // must stay 0: would have been a Bump
  double min = 0.0, median = 0.0, max = 0.0;
  std::vector<int> histogram;  // 1 m bins from 0
};

inline double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// Stopping-gap distribution over crossing episodes drawn as in training.
template <class Policy>
GapStats stopping_gap_stats(const Policy& policy, const Config& cfg, int trials,
                            std::uint64_t seed, unsigned threads = 0) {
  struct Outcome {
    bool stop = false;
    bool mid_cross = false;
    double gap = 0.0;
  };
  std::vector<Outcome> outs(static_cast<std::size_t>(trials));
  Config crossing = cfg;
  parallel_for(outs.size(), threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, eval_stream::kGap, i);
    ScenarioParams p = sample_scenario(crossing, rng);
    p = make_scenario(p.v_init, p.ttc, p.side, Scenario::Cross, p.v_ped, cfg.env);
    Environment env(cfg.env, cfg.reward);
    const EpisodeLog log = evaluate_episode(policy, env, p, rng());
    outs[i].stop = log.outcome == EpisodeEvent::Stop;
    outs[i].mid_cross = env.pedestrian().mode == PedestrianMode::Cross;
    outs[i].gap = log.final_gap;
  });
  GapStats s;
  s.episodes = trials;
  for (const auto& o : outs) {
    if (!o.stop) continue;
    ++s.stops;
    s.gaps.push_back(o.gap);
    if (o.mid_cross) {
      ++s.stops_mid_cross;
      if (o.gap < cfg.env.safety_line) ++s.mid_cross_inside_line;
    }
  }
  if (!s.gaps.empty()) {
    s.min = *std::min_element(s.gaps.begin(), s.gaps.end());
    s.max = *std::max_element(s.gaps.begin(), s.gaps.end());
    s.median = median_of(s.gaps);
    s.histogram.assign(static_cast<std::size_t>(std::floor(s.max)) + 1, 0);
    for (double g : s.gaps) ++s.histogram[static_cast<std::size_t>(std::max(0.0, std::floor(g)))];
  }
  return s;
}

struct StayStats {
  int episodes = 0;
  int passes = 0;
  int stops = 0;
  int other = 0;
  double pass_rate = 0.0;
};

/// Non-crossing pedestrians: the vehicle should pass without stopping.
template <class Policy>
StayStats stay_liveness(const Policy& policy, const Config& cfg, int trials, std::uint64_t seed,
                        unsigned threads = 0) {
  std::vector<std::optional<EpisodeEvent>> outcomes(static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, eval_stream::kStay, i);
    ScenarioParams p = sample_scenario(cfg, rng);
    p = make_scenario(p.v_init, p.ttc, p.side, Scenario::Stay, p.v_ped, cfg.env);
    Environment env(cfg.env, cfg.reward);
    outcomes[i] = evaluate_episode(policy, env, p, rng()).outcome;
  });
  StayStats s;
  s.episodes = trials;
  for (const auto& o : outcomes) {
    if (o == EpisodeEvent::Pass) ++s.passes;
    else if (o == EpisodeEvent::Stop) ++s.stops;
    else ++s.other;
  }
  s.pass_rate = trials > 0 ? static_cast<double>(s.passes) / trials : 0.0;
  return s;
}

// ---- simplified Euro NCAP pedestrian AEB harness ----

enum class NcapTest { CVFA, CVNA };

inline constexpr std::string_view ncap_name(NcapTest t) { return t == NcapTest::CVFA ? "CVFA" : "CVNA"; }

inline constexpr std::array<int, 9> kNcapSpeedsKmh{20, 25, 30, 35, 40, 45, 50, 55, 60};
inline constexpr std::array<double, 9> kNcapPoints{1, 2, 2, 3, 3, 3, 2, 1, 1};
inline constexpr double kNcapTtc = 4.0;

inline double kmh_to_ms(double kmh) { return kmh / 3.6; }

inline double ncap_points_available(double v_test_kmh) {
  for (std::size_t i = 0; i < kNcapSpeedsKmh.size(); ++i)
    if (v_test_kmh == kNcapSpeedsKmh[i]) return kNcapPoints[i];
  throw UsageError("ncap: " + std::to_string(v_test_kmh) + " km/h is not a test speed");
}

struct NcapCase {
  NcapTest test = NcapTest::CVFA;
  double v_test_kmh = 0.0;
  bool collided = false;
  double v_impact = 0.0;  // m/s, 0 if avoided
  double points_available = 0.0;
  double points_awarded = 0.0;
  std::optional<EpisodeEvent> outcome;
  int steps = 0;

  friend bool operator==(const NcapCase&, const NcapCase&) = default;
};

/// Full points when avoided; otherwise credit for the speed reduction,
/// points * max(0, 1 - v_impact / v_test).
inline double ncap_score(const NcapCase& c) {
  const double available = ncap_points_available(c.v_test_kmh);
  if (!c.collided) return available;
  return available * std::max(0.0, 1.0 - c.v_impact / kmh_to_ms(c.v_test_kmh));
}

inline ScenarioParams ncap_scenario(NcapTest test, double v_test_kmh, const EnvConfig& env) {
  const bool far = test == NcapTest::CVFA;
  return make_scenario(kmh_to_ms(v_test_kmh), kNcapTtc, far ? Side::Far : Side::Near,
                       Scenario::Cross, kmh_to_ms(far ? 8.0 : 5.0), env);
}

/// One deterministic noise-free crossing episode.
template <class Policy>
NcapCase ncap_run(const Policy& policy, const Config& cfg, NcapTest test, double v_test_kmh) {
  NcapCase c;
  c.test = test;
  c.v_test_kmh = v_test_kmh;
  c.points_available = ncap_points_available(v_test_kmh);
  EnvConfig quiet = cfg.env;
  quiet.sensor_noise = 0.0;
  Environment env(quiet, cfg.reward);
  const EpisodeLog log = evaluate_episode(policy, env, ncap_scenario(test, v_test_kmh, quiet), 0);
  c.outcome = log.outcome;
  c.steps = log.steps;
  c.collided = log.outcome == EpisodeEvent::Bump;
  c.v_impact = c.collided ? env.vehicle().v : 0.0;
  c.points_awarded = ncap_score(c);
  return c;
}

/// Both tests at every test speed, CVFA first.
template <class Policy>
std::vector<NcapCase> ncap_suite(const Policy& policy, const Config& cfg) {
  std::vector<NcapCase> out;
  for (NcapTest t : {NcapTest::CVFA, NcapTest::CVNA})
    for (int v : kNcapSpeedsKmh) out.push_back(ncap_run(policy, cfg, t, v));
  return out;
}

}  // namespace aeb

#endif  // AEB_EVAL_HPP

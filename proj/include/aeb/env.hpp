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

#ifndef AEB_ENV_HPP
#define AEB_ENV_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "aeb/errors.hpp"
#include "aeb/reward.hpp"

namespace aeb {

// Brake actions, strongest first. The index is the Q-network output slot.
enum class Action : int { High = 0, Mid = 1, Low = 2, Nothing = 3 };

inline constexpr std::size_t kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions{Action::High, Action::Mid,
                                                            Action::Low, Action::Nothing};

inline constexpr int action_index(Action a) { return static_cast<int>(a); }

inline constexpr std::string_view action_name(Action a) {
  switch (a) {
    case Action::High: return "high";
    case Action::Mid: return "mid";
    case Action::Low: return "low";
    case Action::Nothing: return "nothing";
  }
  return "?";
}

enum class PedestrianMode { Nobody, Stay, Cross, Crossed };
enum class Side { Near, Far };
enum class Scenario { Cross, Stay };
enum class EpisodeEvent { Stop, Bump, Pass, Cross };

inline constexpr std::string_view event_name(EpisodeEvent e) {
  switch (e) {
    case EpisodeEvent::Stop: return "stop";
    case EpisodeEvent::Bump: return "bump";
    case EpisodeEvent::Pass: return "pass";
    case EpisodeEvent::Cross: return "cross";
  }
  return "?";
}

inline constexpr std::string_view side_name(Side s) { return s == Side::Near ? "near" : "far"; }
inline constexpr std::string_view scenario_name(Scenario s) {
  return s == Scenario::Cross ? "cross" : "stay";
}

// Simulator constants. Defaults reproduce the reference setup.
struct EnvConfig {
  double dt = 0.1;            // s
  double safety_line = 3.0;   // m
  double curb_offset = 3.5;   // m, curbs at y = -3.5 (near) and +3.5 (far)
  double sensor_noise = 0.1;  // m, std-dev on both relative coordinates
  // Indexed by action_index(): High, Mid, Low, Nothing.
  std::array<double, kNumActions> accel{-9.8, -5.9, -2.9, 0.0};
  double norm_speed = 16.67;
  double norm_rel_x = 100.0;
  double norm_rel_y = 10.0;
  int max_steps = 600;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

inline constexpr double kPedestrianDistanceSeconds = 5.0;

struct ScenarioParams {
  double v_init = 0.0;
  double ttc = 0.0;
  Side side = Side::Near;
  Scenario scenario = Scenario::Cross;
  double v_ped = 0.0;
  double ped_x = 0.0;   // 5 * v_init
  double p_trig = 0.0;  // (5 - ttc) * v_init
  double l = 3.0;
  double dt = 0.1;
};

// Fills in the derived positions from the free parameters.
inline ScenarioParams make_scenario(double v_init, double ttc, Side side, Scenario scenario,
                                    double v_ped, const EnvConfig& env) {
  ScenarioParams p;
  p.v_init = v_init;
  p.ttc = ttc;
  p.side = side;
  p.scenario = scenario;
  p.v_ped = v_ped;
  p.ped_x = kPedestrianDistanceSeconds * v_init;
  p.p_trig = (kPedestrianDistanceSeconds - ttc) * v_init;
  p.l = env.safety_line;
  p.dt = env.dt;
  return p;
}

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
};

struct PedestrianState {
  double x = 0.0;
  double y = 0.0;
  double v_ped = 0.0;
  PedestrianMode mode = PedestrianMode::Nobody;
  Side side = Side::Near;
};

// Constant-acceleration step. Exact for piecewise-constant acceleration,
// including the case where the vehicle comes to rest inside the step.
inline VehicleState update_vehicle(const VehicleState& s, double accel, double dt) {
  VehicleState out = s;
  const double v_next = s.v + accel * dt;
  if (v_next > 0.0) {
    out.v = v_next;
    out.x = s.x + 0.5 * (s.v + v_next) * dt;
  } else {
    out.v = 0.0;
    if (s.v > 0.0) out.x = s.x + s.v * s.v / (2.0 * -accel);
  }
  return out;
}

// Pedestrian Markov step. Triggering and the first stride happen on the same
// step; the walk ends clamped on the opposite curb.
inline PedestrianState update_pedestrian(const PedestrianState& p, const VehicleState& veh,
                                         const ScenarioParams& params, double curb_offset) {
  PedestrianState out = p;
  if (out.mode == PedestrianMode::Stay && params.scenario == Scenario::Cross &&
      veh.x >= params.p_trig) {
    out.mode = PedestrianMode::Cross;
  }
  if (out.mode == PedestrianMode::Cross) {
    const double dir = p.side == Side::Near ? 1.0 : -1.0;
    out.y += dir * p.v_ped * params.dt;
    if (dir * out.y >= curb_offset) {
      out.y = dir * curb_offset;
      out.mode = PedestrianMode::Crossed;
    }
  }
  return out;
}

// Terminal event for the post-step state. Precedence Bump > Stop > Cross > Pass.
inline std::optional<EpisodeEvent> classify_event(const VehicleState& veh,
                                                  const PedestrianState& ped,
                                                  const ScenarioParams& params) {
  if (ped.mode == PedestrianMode::Cross && veh.x >= ped.x - params.l) return EpisodeEvent::Bump;
  if (veh.v == 0.0) return EpisodeEvent::Stop;
  if (ped.mode == PedestrianMode::Crossed) return EpisodeEvent::Cross;
  if (veh.x > ped.x) return EpisodeEvent::Pass;
  return std::nullopt;
}

inline constexpr std::size_t kHistoryFrames = 5;
inline constexpr std::size_t kFrameSize = 3;
inline constexpr std::size_t kObservationSize = kHistoryFrames * kFrameSize;

using Frame = std::array<double, kFrameSize>;
using Observation = std::array<double, kObservationSize>;

// Fixed-length frame history, oldest first.
class FrameHistory {
 public:
  void fill(const Frame& f) { frames_.fill(f); }

  void push(const Frame& f) {
    std::rotate(frames_.begin(), frames_.begin() + 1, frames_.end());
    frames_.back() = f;
  }

  const Frame& newest() const { return frames_.back(); }
  const std::array<Frame, kHistoryFrames>& frames() const { return frames_; }

  Observation flatten() const {
    Observation o{};
    for (std::size_t i = 0; i < kHistoryFrames; ++i)
      for (std::size_t j = 0; j < kFrameSize; ++j) o[i * kFrameSize + j] = frames_[i][j];
    return o;
  }

 private:
  std::array<Frame, kHistoryFrames> frames_{};
};

// Normalised sensor frame: (v, rel_x + noise, rel_y + noise).
template <class URBG>
Frame sense(const VehicleState& veh, const PedestrianState& ped, const EnvConfig& cfg,
            URBG& noise) {
  double ex = 0.0, ey = 0.0;
  if (cfg.sensor_noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, cfg.sensor_noise);
    ex = gauss(noise);
    ey = gauss(noise);
  }
  return {veh.v / cfg.norm_speed, (ped.x - veh.x + ex) / cfg.norm_rel_x,
          (ped.y - veh.y + ey) / cfg.norm_rel_y};
}

template <class URBG>
Observation observe(FrameHistory& history, const VehicleState& veh, const PedestrianState& ped,
                    const EnvConfig& cfg, URBG& noise) {
  history.push(sense(veh, ped, cfg, noise));
  return history.flatten();
}

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  std::optional<EpisodeEvent> event;
};

inline void validate(const ScenarioParams& p) {
  if (!(p.v_init > 0.0) || !std::isfinite(p.v_init))
    throw ConfigError("scenario: v_init must be positive and finite");
  if (!(p.dt > 0.0)) throw ConfigError("scenario: dt must be positive");
  if (!(p.l >= 0.0)) throw ConfigError("scenario: safety line must be non-negative");
  if (p.scenario == Scenario::Cross && !(p.v_ped > 0.0))
    throw ConfigError("scenario: crossing pedestrian needs a positive speed");
  if (!std::isfinite(p.ttc)) throw ConfigError("scenario: ttc must be finite");
}

// One episode of the vehicle/pedestrian encounter.
class Environment {
 public:
  explicit Environment(EnvConfig cfg = {}, RewardParams reward = {})
      : cfg_(cfg), reward_(reward) {}

  Observation reset(const ScenarioParams& params, std::uint64_t noise_seed) {
    validate(params);
    params_ = params;
    noise_.seed(noise_seed);
    vehicle_ = VehicleState{0.0, 0.0, params.v_init};
    pedestrian_ = PedestrianState{params.ped_x,
                                  params.side == Side::Near ? -cfg_.curb_offset : cfg_.curb_offset,
                                  params.v_ped, PedestrianMode::Stay, params.side};
    history_.fill(sense(vehicle_, pedestrian_, cfg_, noise_));
    steps_ = 0;
    done_ = false;
    return history_.flatten();
  }

  StepResult step(Action a) {
    if (done_) throw UsageError("step() called on a terminated episode");
    const double rel_x = pedestrian_.x - vehicle_.x;
    const double v_prev = vehicle_.v;
    vehicle_ = update_vehicle(vehicle_, cfg_.accel[action_index(a)], params_.dt);
    pedestrian_ = update_pedestrian(pedestrian_, vehicle_, params_, cfg_.curb_offset);
    StepResult out;
    out.event = classify_event(vehicle_, pedestrian_, params_);
    out.reward = reward(rel_x, v_prev, vehicle_.v, out.event == EpisodeEvent::Bump, reward_);
    out.observation = observe(history_, vehicle_, pedestrian_, cfg_, noise_);
    ++steps_;
    done_ = out.event.has_value();
    return out;
  }

  const VehicleState& vehicle() const { return vehicle_; }
  const PedestrianState& pedestrian() const { return pedestrian_; }
  const ScenarioParams& params() const { return params_; }
  const EnvConfig& config() const { return cfg_; }
  const RewardParams& reward_params() const { return reward_; }
  const FrameHistory& history() const { return history_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  bool at_step_cap() const { return steps_ >= cfg_.max_steps; }

 private:
  EnvConfig cfg_;
  RewardParams reward_;
  ScenarioParams params_{};
  VehicleState vehicle_{};
  PedestrianState pedestrian_{};
  FrameHistory history_{};
  Rng noise_{};
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace aeb

#endif  // AEB_ENV_HPP

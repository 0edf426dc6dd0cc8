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

#ifndef AEB_REWARD_HPP
#define AEB_REWARD_HPP

namespace aeb {

/// Weights of the shaped braking reward. All four must be strictly positive.
struct RewardParams {
  double alpha = 0.001;  ///< braking penalty per squared metre of remaining distance
  double beta = 0.1;     ///< distance-independent braking penalty
  double eta = 0.01;     ///< collision penalty per squared m/s of impact speed
  double lambda = 100.0; ///< fixed collision penalty

  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

/// Per-step reward.
///
///   r = -(alpha * rel_x^2 + beta) * decel - (eta * v_cur^2 + lambda) * [bumped]
///
/// with decel = v_prev - v_cur (non-negative while braking, so braking is
/// always penalised). rel_x is the noise-free pedestrian-minus-vehicle
/// longitudinal distance at the start of the step.
inline double reward(double rel_x, double v_prev, double v_cur, bool bumped,
                     const RewardParams& p) {
  const double decel = v_prev - v_cur;
  double r = -(p.alpha * rel_x * rel_x + p.beta) * decel;
  if (bumped) {
    r -= p.eta * v_cur * v_cur + p.lambda;
  }
  return r;
}

}  // namespace aeb

#endif  // AEB_REWARD_HPP

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

#ifndef AEB_DQN_HPP
#define AEB_DQN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include "aeb/env.hpp"
#include "aeb/errors.hpp"
#include "aeb/net.hpp"

namespace aeb {

// One-step backup (s, a, r, s', terminal); `bump` marks collision transitions.
struct Transition {
  Observation s{};
  Action a = Action::Nothing;
  double r = 0.0;
  Observation s_next{};
  bool terminal = false;
  bool bump = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct AgentHyperparams {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  int epsilon_decay_episodes = 1500;
  std::size_t replay_capacity = 10000;
  std::size_t trauma_capacity = 1000;
  std::size_t replay_batch = 32;
  std::size_t trauma_batch = 10;
  long target_sync_steps = 500;
  std::size_t min_replay = 500;

  friend bool operator==(const AgentHyperparams&, const AgentHyperparams&) = default;
};

inline void validate(const AgentHyperparams& h) {
  if (!(h.gamma > 0.0 && h.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  auto unit = [](double e) { return e >= 0.0 && e <= 1.0; };
  if (!unit(h.epsilon_start) || !unit(h.epsilon_end))
    throw ConfigError("epsilon_start and epsilon_end must lie in [0, 1]");
  if (h.epsilon_decay_episodes < 0) throw ConfigError("epsilon_decay_episodes must be >= 0");
  if (h.replay_capacity == 0) throw ConfigError("replay_capacity must be positive");
  if (h.replay_batch == 0) throw ConfigError("replay_batch must be positive");
  if (h.replay_batch > h.replay_capacity)
    throw ConfigError("replay_batch must not exceed replay_capacity");
  if (h.trauma_batch > h.trauma_capacity && h.trauma_capacity > 0)
    throw ConfigError("trauma_batch must not exceed trauma_capacity");
  if (h.target_sync_steps <= 0) throw ConfigError("target_sync_steps must be positive");
  if (h.min_replay < h.replay_batch) throw ConfigError("min_replay must be >= replay_batch");
  if (h.min_replay > h.replay_capacity)
    throw ConfigError("min_replay must not exceed replay_capacity");
}

/// Linear decay from epsilon_start to epsilon_end over the decay horizon,
/// constant afterwards. `episode` is zero-based.
inline double epsilon_at(const AgentHyperparams& h, int episode) {
  if (h.epsilon_decay_episodes <= 0 || episode >= h.epsilon_decay_episodes) return h.epsilon_end;
  const double frac = static_cast<double>(episode) / h.epsilon_decay_episodes;
  return h.epsilon_start + (h.epsilon_end - h.epsilon_start) * frac;
}

// Fixed-capacity FIFO; the oldest element is overwritten once full.
template <class T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) { data_.reserve(capacity); }

  void push(const T& item) {
    if (capacity_ == 0) return;
    if (data_.size() < capacity_) {
      data_.push_back(item);
    } else {
      data_[head_] = item;
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }

  // Age order: 0 is the oldest element still held.
  const T& operator[](std::size_t i) const { return data_[(head_ + i) % data_.size()]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> data_;
};

class ReplayMemory : public RingBuffer<Transition> {
 public:
  explicit ReplayMemory(std::size_t capacity = 10000) : RingBuffer(capacity) {}
};

// Holds only collision transitions. Reads are counted so that ablation runs
// can prove they never touched it.
class TraumaMemory {
 public:
  explicit TraumaMemory(std::size_t capacity = 1000) : buffer_(capacity) {}

  void push(const Transition& t) {
    if (!t.bump) throw UsageError("trauma memory accepts collision transitions only");
    buffer_.push(t);
  }

  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return buffer_.capacity(); }
  bool empty() const { return buffer_.empty(); }

  const Transition& read(std::size_t i) const {
    ++reads_;
    return buffer_[i];
  }
  // Inspection without touching the read counter.
  const Transition& peek(std::size_t i) const { return buffer_[i]; }
  std::uint64_t reads() const { return reads_; }

 private:
  RingBuffer<Transition> buffer_;
  mutable std::uint64_t reads_ = 0;
};

inline void push_transition(ReplayMemory& replay, TraumaMemory& trauma, const Transition& t) {
  replay.push(t);
  if (t.bump) trauma.push(t);
}

// k distinct indices from [0, n), Floyd's algorithm. Output order is the
// insertion order, which is deterministic for a given generator state.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  std::unordered_set<std::size_t> chosen;
  for (std::size_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    std::size_t t = dist(rng);
    if (chosen.count(t)) t = j;
    chosen.insert(t);
    out.push_back(t);
  }
  return out;
}

struct Batch {
  std::vector<Transition> items;  // replay draws first, then trauma draws
  std::size_t replay_count = 0;
  std::size_t trauma_count = 0;
};

/// Uniform draws without replacement: replay_batch from replay plus
/// min(trauma_batch, trauma.size()) from trauma. nullopt until the replay
/// memory holds min_replay transitions.
inline std::optional<Batch> sample_batch(const ReplayMemory& replay, const TraumaMemory& trauma,
                                         const AgentHyperparams& h, Rng& rng) {
  if (replay.size() < std::max(h.min_replay, h.replay_batch)) return std::nullopt;
  Batch b;
  for (std::size_t i : sample_indices(replay.size(), h.replay_batch, rng))
    b.items.push_back(replay[i]);
  b.replay_count = h.replay_batch;
  const std::size_t k = std::min(h.trauma_batch, trauma.size());
  if (k > 0) {
    for (std::size_t i : sample_indices(trauma.size(), k, rng)) b.items.push_back(trauma.read(i));
  }
  b.trauma_count = k;
  return b;
}

inline std::size_t argmax_lowest(const Eigen::VectorXd& q) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q[i] > q[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  return best;
}

inline Action greedy_action(const QNetworkParams& net, const Observation& obs) {
  return static_cast<Action>(argmax_lowest(forward(net, obs)));
}

/// Epsilon-greedy: uniform random action with probability epsilon, otherwise
/// argmax Q with ties going to the lowest index (the strongest brake).
inline Action select_action(const QNetworkParams& net, const Observation& obs, double epsilon,
                            Rng& rng) {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(kNumActions) - 1);
      return static_cast<Action>(pick(rng));
    }
  }
  return greedy_action(net, obs);
}

/// TD error against the target network; bootstrap masked on terminal steps.
inline double td_error(const Transition& t, const QNetworkParams& net,
                       const QNetworkParams& target, double gamma) {
  const double q = forward(net, t.s)[action_index(t.a)];
  double y = t.r;
  if (!t.terminal) y += gamma * forward(target, t.s_next).maxCoeff();
  return y - q;
}

/// One gradient step on L = sum over the batch of delta^2 (replay and
/// trauma draws weighted alike). Only `net` is updated. Returns L.
inline double train_step(QNetworkParams& net, const QNetworkParams& target,
                         std::span<const Transition> batch, OptimizerState& opt, double gamma) {
  if (batch.empty()) throw UsageError("train_step: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto dim = static_cast<Eigen::Index>(kObservationSize);
  Eigen::MatrixXd s(dim, n), s_next(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = batch[static_cast<std::size_t>(j)];
    s.col(j) = Eigen::Map<const Eigen::VectorXd>(t.s.data(), dim);
    s_next.col(j) = Eigen::Map<const Eigen::VectorXd>(t.s_next.data(), dim);
  }
  const Eigen::MatrixXd q_next = forward_batch(target, s_next);
  ForwardCache cache;
  const Eigen::MatrixXd q = forward_batch(net, s, &cache);
  Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(q.rows(), n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = batch[static_cast<std::size_t>(j)];
    double y = t.r;
    if (!t.terminal) y += gamma * q_next.col(j).maxCoeff();
    const double delta = y - q(action_index(t.a), j);
    loss += delta * delta;
    out_grad(action_index(t.a), j) = -2.0 * delta;
  }
  if (!std::isfinite(loss)) throw NumericError("train_step: non-finite loss");
  rmsprop_step(net, backward(net, cache, out_grad), opt);
  return loss;
}

inline QNetworkParams sync_target(const QNetworkParams& net) { return net; }

// Everything the learner owns during training.
class DqnAgent {
 public:
  DqnAgent(QNetworkParams net, OptimizerState opt, AgentHyperparams h, bool use_trauma,
           Rng sample_rng)
      : hp_(h),
        net_(std::move(net)),
        target_(sync_target(net_)),
        opt_(std::move(opt)),
        replay_(h.replay_capacity),
        trauma_(h.trauma_capacity),
        use_trauma_(use_trauma),
        sample_rng_(std::move(sample_rng)) {}

  Action act(const Observation& obs, double epsilon, Rng& rng) const {
    return select_action(net_, obs, epsilon, rng);
  }

  // Stores the transition and, once the replay memory is warm, runs one
  // training step. Returns the loss when a step was taken.
  std::optional<double> observe(const Transition& t) {
    push_transition(replay_, trauma_, t);
    AgentHyperparams h = hp_;
    if (!use_trauma_) h.trauma_batch = 0;
    auto batch = sample_batch(replay_, trauma_, h, sample_rng_);
    if (!batch) return std::nullopt;
    const double loss = train_step(net_, target_, batch->items, opt_, hp_.gamma);
    if (++train_steps_ % hp_.target_sync_steps == 0) target_ = sync_target(net_);
    return loss;
  }

  const QNetworkParams& net() const { return net_; }
  const QNetworkParams& target() const { return target_; }
  const OptimizerState& optimizer() const { return opt_; }
  const ReplayMemory& replay() const { return replay_; }
  const TraumaMemory& trauma() const { return trauma_; }
  const AgentHyperparams& hyperparams() const { return hp_; }
  long train_steps() const { return train_steps_; }

 private:
  AgentHyperparams hp_;
  QNetworkParams net_;
  QNetworkParams target_;
  OptimizerState opt_;
  ReplayMemory replay_;
  TraumaMemory trauma_;
  bool use_trauma_;
  Rng sample_rng_;
  long train_steps_ = 0;
};

}  // namespace aeb

#endif  // AEB_DQN_HPP

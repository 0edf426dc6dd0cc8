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

#ifndef AEB_NET_HPP
#define AEB_NET_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aeb/errors.hpp"

namespace aeb {

struct NetworkShape {
  std::vector<int> sizes{15, 100, 70, 50, 70, 100, 4};
  double leaky_slope = 0.01;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Fully-connected network: leaky-ReLU on every hidden layer, linear output.
// Also used as the container for gradients and optimizer accumulators.
struct QNetworkParams {
  std::vector<DenseLayer> layers;
  double leaky_slope = 0.01;

  std::vector<int> sizes() const {
    std::vector<int> s;
    if (layers.empty()) return s;
    s.push_back(static_cast<int>(layers.front().weight.cols()));
    for (const auto& l : layers) s.push_back(static_cast<int>(l.weight.rows()));
    return s;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  int input_size() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers.back().weight.rows()); }

  bool all_finite() const {
    for (const auto& l : layers)
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

  // Same shape, every entry zero.
  QNetworkParams zeros_like() const {
    QNetworkParams z;
    z.leaky_slope = leaky_slope;
    for (const auto& l : layers)
      z.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                          Eigen::VectorXd::Zero(l.bias.size())});
    return z;
  }

  friend bool operator==(const QNetworkParams& a, const QNetworkParams& b) {
    if (a.leaky_slope != b.leaky_slope || a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
      const auto& x = a.layers[i];
      const auto& y = b.layers[i];
      if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols()) return false;
      if (x.weight != y.weight || x.bias != y.bias) return false;
    }
    return true;
  }
};

using ParamGradients = QNetworkParams;

inline void validate(const NetworkShape& shape) {
  if (shape.sizes.size() < 2) throw ConfigError("network needs at least input and output layers");
  for (int s : shape.sizes)
    if (s <= 0) throw ConfigError("network layer sizes must be positive");
  if (!(shape.leaky_slope >= 0.0 && shape.leaky_slope < 1.0))
    throw ConfigError("leaky_slope must lie in [0, 1)");
}

/// He-uniform weights, bound sqrt(6 / fan_in); zero biases.
inline QNetworkParams init_params(const NetworkShape& shape, std::uint64_t seed) {
  validate(shape);
  Rng rng(seed);
  QNetworkParams p;
  p.leaky_slope = shape.leaky_slope;
  for (std::size_t i = 0; i + 1 < shape.sizes.size(); ++i) {
    const int in = shape.sizes[i];
    const int out = shape.sizes[i + 1];
    const double bound = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    // Column-major fill order is fixed so the same seed always gives the same net.
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r) layer.weight(r, c) = dist(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

// Activations kept by forward_batch for backward(). Columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

inline Eigen::MatrixXd leaky_relu(const Eigen::MatrixXd& z, double slope) {
  return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

/// Batched forward pass; one sample per column. Fills `cache` when given.
inline Eigen::MatrixXd forward_batch(const QNetworkParams& p, const Eigen::MatrixXd& inputs,
                                     ForwardCache* cache = nullptr) {
  if (inputs.rows() != p.input_size())
    throw UsageError("forward: expected " + std::to_string(p.input_size()) + " inputs, got " +
                     std::to_string(inputs.rows()));
  if (!inputs.allFinite()) throw NumericError("forward: non-finite input");
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd a = inputs;
  const std::size_t last = p.layers.size() - 1;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& layer = p.layers[i];
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(z);
    }
    a = i == last ? std::move(z) : leaky_relu(z, p.leaky_slope);
  }
  return a;
}

/// Q-values for a single input.
inline Eigen::VectorXd forward(const QNetworkParams& p, std::span<const double> input) {
  Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(p, x);
}

/// Gradient of a loss w.r.t. every weight and bias, summed over the batch,
/// given dL/d(output) for each column of the cached forward pass.
inline ParamGradients backward(const QNetworkParams& p, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_grad) {
  if (cache.pre.size() != p.layers.size())
    throw UsageError("backward: cache does not belong to this network");
  if (output_grad.rows() != p.output_size() || output_grad.cols() != cache.pre.back().cols())
    throw UsageError("backward: output gradient shape mismatch");
  ParamGradients g;
  g.leaky_slope = p.leaky_slope;
  g.layers.resize(p.layers.size());
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t i = p.layers.size(); i-- > 0;) {
    if (i + 1 != p.layers.size()) {
      const double slope = p.leaky_slope;
      delta.array() *= cache.pre[i].unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; })
                           .array();
    }
    g.layers[i].weight = delta * cache.inputs[i].transpose();
    g.layers[i].bias = delta.rowwise().sum();
    if (i > 0) delta = p.layers[i].weight.transpose() * delta;
  }
  return g;
}

struct OptimizerState {
  double learning_rate = 0.0005;
  double decay = 0.9;
  double epsilon = 1e-8;
  QNetworkParams mean_square;  // same shape as the parameters

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

inline OptimizerState make_optimizer(const QNetworkParams& p, double learning_rate = 0.0005,
                                     double decay = 0.9, double epsilon = 1e-8) {
  return OptimizerState{learning_rate, decay, epsilon, p.zeros_like()};
}

/// RMSProp: acc <- decay*acc + (1-decay)*g^2; theta <- theta - lr*g/(sqrt(acc)+eps).
inline void rmsprop_step(QNetworkParams& p, const ParamGradients& g, OptimizerState& o) {
  if (g.layers.size() != p.layers.size() || o.mean_square.layers.size() != p.layers.size())
    throw UsageError("rmsprop_step: shape mismatch");
  const double rho = o.decay;
  const double lr = o.learning_rate;
  const double eps = o.epsilon;
  auto update = [&](auto& theta, const auto& grad, auto& acc) {
    acc.array() = rho * acc.array() + (1.0 - rho) * grad.array().square();
    theta.array() -= lr * grad.array() / (acc.array().sqrt() + eps);
  };
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    update(p.layers[i].weight, g.layers[i].weight, o.mean_square.layers[i].weight);
    update(p.layers[i].bias, g.layers[i].bias, o.mean_square.layers[i].bias);
  }
}

}  // namespace aeb

#endif  // AEB_NET_HPP

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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "aeb/checkpoint.hpp"
#include "aeb/trainer.hpp"

namespace aeb {
namespace {

struct Sample {
  Config cfg;
  QNetworkParams params;
  OptimizerState opt;
};

Sample make_sample(std::uint64_t seed) {
  Sample s;
  s.cfg.seed = seed;
  s.cfg.env.safety_line = 3.25;
  s.params = init_params(s.cfg.network, seed);
  s.opt = make_optimizer(s.params);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& l : s.opt.mean_square.layers) {
    l.weight = l.weight.unaryExpr([&](double) { return std::abs(n(rng)); });
    l.bias = l.bias.unaryExpr([&](double) { return std::abs(n(rng)); });
  }
  for (auto& l : s.params.layers) l.bias = l.bias.unaryExpr([&](double) { return n(rng); });
  return s;
}

template <class T>
void put(std::vector<char>& b, std::size_t at, T v) {
  std::memcpy(b.data() + at, &v, sizeof v);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto s = make_sample(1);
  const auto ck = decode_checkpoint(encode_checkpoint(s.params, s.opt, s.cfg));
  EXPECT_EQ(ck.params, s.params);
  EXPECT_EQ(ck.optimizer, s.opt);
  EXPECT_EQ(ck.config, s.cfg);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Observation o;
    for (auto& x : o) x = u(rng);
    ASSERT_EQ(forward(ck.params, o), forward(s.params, o));
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto s = make_sample(3);
  const auto path = (std::filesystem::temp_directory_path() / "aeb_ckpt_test.bin").string();
  save_checkpoint(s.params, s.opt, s.cfg, path);
  const NetworkShape shape = s.cfg.network;
  const auto ck = load_checkpoint(path, &shape);
  EXPECT_EQ(ck.params, s.params);
  EXPECT_EQ(ck.optimizer, s.opt);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
}

TEST(Checkpoint, LayoutIsLittleEndianHeader) {
  const auto s = make_sample(4);
  const auto b = encode_checkpoint(s.params, s.opt, s.cfg);
  EXPECT_EQ(std::string(b.data(), 8), std::string("AEBCKPT\0", 8));
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 1);  // version, low byte first
  EXPECT_EQ(static_cast<unsigned char>(b[12]), 7);  // 7 layer sizes
  EXPECT_EQ(static_cast<unsigned char>(b[16]), 15);
}

TEST(Checkpoint, BadMagicAndVersion) {
  const auto s = make_sample(5);
  auto b = encode_checkpoint(s.params, s.opt, s.cfg);
  auto bad = b;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
  bad = b;
  put<std::uint32_t>(bad, 8, 2);
  try {
    decode_checkpoint(bad);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
  }
}

TEST(Checkpoint, TamperedLayerHeaderRejected) {
  const auto s = make_sample(6);
  auto b = encode_checkpoint(s.params, s.opt, s.cfg);
  put<std::uint32_t>(b, 16 + 4, 99);  // first hidden width
  EXPECT_THROW(decode_checkpoint(b), CheckpointError);
}

TEST(Checkpoint, DifferentSizesRejectedWhenExpected) {
  Sample s;
  s.cfg.network.sizes = {15, 20, 4};
  s.params = init_params(s.cfg.network, 1);
  s.opt = make_optimizer(s.params);
  const auto b = encode_checkpoint(s.params, s.opt, s.cfg);
  EXPECT_NO_THROW(decode_checkpoint(b));
  const NetworkShape standard;
  EXPECT_THROW(decode_checkpoint(b, &standard), CheckpointError);
}

TEST(Checkpoint, TruncationAndTrailingBytes) {
  const auto s = make_sample(7);
  const auto b = encode_checkpoint(s.params, s.opt, s.cfg);
  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, b.size() / 2, b.size() - 1}) {
    std::vector<char> t(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_checkpoint(t), CheckpointError) << cut;
  }
  auto longer = b;
  longer.push_back(0);
  EXPECT_THROW(decode_checkpoint(longer), CheckpointError);
}

TEST(Checkpoint, MismatchedParamsRefusedOnWrite) {
  auto s = make_sample(8);
  s.cfg.network.sizes = {15, 10, 4};
  EXPECT_THROW(encode_checkpoint(s.params, s.opt, s.cfg), CheckpointError);
}

TEST(Checkpoint, TrainedNetworkRoundTrip) {
  Config cfg;
  cfg.episodes = 20;
  cfg.agent.min_replay = 64;
  const auto r = train(cfg);
  const auto ck = decode_checkpoint(encode_checkpoint(r.net, r.optimizer, cfg));
  EXPECT_EQ(ck.params, r.net);
  EXPECT_EQ(ck.optimizer, r.optimizer);
  EXPECT_EQ(ck.config, cfg);
}

}  // namespace
}  // namespace aeb

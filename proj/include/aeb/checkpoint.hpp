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

#ifndef AEB_CHECKPOINT_HPP
#define AEB_CHECKPOINT_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "aeb/config.hpp"
#include "aeb/errors.hpp"
#include "aeb/net.hpp"

// Binary checkpoint, all integers and doubles little-endian:
//
//   magic      8 bytes  "AEBCKPT\0"
//   version    u32      kCheckpointVersion
//   n_sizes    u32      number of layer sizes (layers + 1)
//   sizes      u32 x n_sizes
//   slope      f64      leaky-ReLU slope
//   cfg_len    u64      length of the config text
//   cfg        cfg_len bytes, format_config() output
//   params     per layer: weight (row-major, out x in) then bias, f64
//   opt        learning_rate, decay, epsilon (f64), then the mean-square
//              accumulators in the same layout as params
//
// The file must end exactly after the accumulators.

namespace aeb {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::array<char, 8> kCheckpointMagic{'A', 'E', 'B', 'C', 'K', 'P', 'T', '\0'};

struct Checkpoint {
  QNetworkParams params;
  OptimizerState optimizer;
  Config config;
};

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  const std::vector<char>& data() const { return buf_; }

  template <class M>
  void matrix(const M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> data) : buf_(std::move(data)) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }

  template <class M>
  void matrix(M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
  }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw CheckpointError("checkpoint: truncated file");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

inline std::string sizes_text(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

inline void write_params(ByteWriter& w, const QNetworkParams& p) {
  for (const auto& l : p.layers) {
    w.matrix(l.weight);
    w.matrix(l.bias);
  }
}

inline QNetworkParams read_params(ByteReader& r, const std::vector<int>& sizes, double slope) {
  QNetworkParams p;
  p.leaky_slope = slope;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer l{Eigen::MatrixXd(sizes[i + 1], sizes[i]), Eigen::VectorXd(sizes[i + 1])};
    r.matrix(l.weight);
    r.matrix(l.bias);
    p.layers.push_back(std::move(l));
  }
  return p;
}

}  // namespace detail

inline std::vector<char> encode_checkpoint(const QNetworkParams& params,
                                           const OptimizerState& opt, const Config& cfg) {
  const auto sizes = params.sizes();
  if (sizes != cfg.network.sizes)
    throw CheckpointError("checkpoint: parameters " + detail::sizes_text(sizes) +
                          " do not match config network " +
                          detail::sizes_text(cfg.network.sizes));
  if (opt.mean_square.sizes() != sizes)
    throw CheckpointError("checkpoint: optimizer state does not match parameters");
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) w.u32(static_cast<std::uint32_t>(s));
  w.f64(params.leaky_slope);
  const std::string text = format_config(cfg);
  w.u64(text.size());
  w.bytes(text.data(), text.size());
  detail::write_params(w, params);
  w.f64(opt.learning_rate);
  w.f64(opt.decay);
  w.f64(opt.epsilon);
  detail::write_params(w, opt.mean_square);
  return w.data();
}

/// Decodes a checkpoint. When `expected` is given, the stored layer sizes
/// must equal it.
inline Checkpoint decode_checkpoint(std::vector<char> bytes,
                                    const NetworkShape* expected = nullptr) {
  detail::ByteReader r(std::move(bytes));
  const std::string magic = r.bytes(kCheckpointMagic.size());
  if (magic != std::string(kCheckpointMagic.data(), kCheckpointMagic.size()))
    throw CheckpointError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint: version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 64) throw CheckpointError("checkpoint: implausible layer count " + std::to_string(n));
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t s = r.u32();
    if (s == 0 || s > (1u << 20)) throw CheckpointError("checkpoint: implausible layer size");
    sizes.push_back(static_cast<int>(s));
  }
  const double slope = r.f64();
  const std::uint64_t len = r.u64();
  if (len > (1u << 20)) throw CheckpointError("checkpoint: implausible config length");
  Checkpoint ck;
  try {
    ck.config = parse_config(r.bytes(static_cast<std::size_t>(len)));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint: embedded config invalid: ") + e.what());
  }
  if (sizes != ck.config.network.sizes)
    throw CheckpointError("checkpoint: layer header " + detail::sizes_text(sizes) +
                          " does not match embedded config " +
                          detail::sizes_text(ck.config.network.sizes));
  if (expected && sizes != expected->sizes)
    throw CheckpointError("checkpoint: network sizes " + detail::sizes_text(sizes) +
                          " differ from the requested " + detail::sizes_text(expected->sizes));
  if (slope != ck.config.network.leaky_slope)
    throw CheckpointError("checkpoint: leaky slope does not match embedded config");
  ck.params = detail::read_params(r, sizes, slope);
  ck.optimizer.learning_rate = r.f64();
  ck.optimizer.decay = r.f64();
  ck.optimizer.epsilon = r.f64();
  ck.optimizer.mean_square = detail::read_params(r, sizes, slope);
  if (!r.at_end()) throw CheckpointError("checkpoint: trailing bytes");
  return ck;
}

inline void save_checkpoint(const QNetworkParams& params, const OptimizerState& opt,
                            const Config& cfg, const std::string& path) {
  const auto bytes = encode_checkpoint(params, opt, cfg);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path, const NetworkShape* expected = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("checkpoint: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(std::move(bytes), expected);
}

}  // namespace aeb

#endif  // AEB_CHECKPOINT_HPP

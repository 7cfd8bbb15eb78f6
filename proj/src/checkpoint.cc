// Copyright 2026 The fsed Authors.
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

#include "fsed/checkpoint.h"

#include <cstring>
#include <optional>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "fsed/error.h"

namespace fsed {
namespace {

constexpr char kMagic[8] = {'F', 'S', 'E', 'D', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, size_t n) {
    const auto* p = static_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string source) : bytes_(std::move(bytes)), source_(std::move(source)) {}

  template <typename T>
  T get() {
    T value;
    get_bytes(&value, sizeof(T));
    return value;
  }
  void get_bytes(void* out, size_t n) {
    if (n > bytes_.size() - pos_) fail("truncated");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kCorruptCheckpoint, source_ + ": " + why);
  }

 private:
  std::vector<char> bytes_;
  std::string source_;
  size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Network<float>& net, const std::filesystem::path& path) {
  const NetworkConfig& cfg = net.config();
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<uint32_t>(kCheckpointVersion);
  w.put<uint32_t>(static_cast<uint32_t>(cfg.mel_channels));
  w.put<uint32_t>(static_cast<uint32_t>(cfg.frames));
  w.put<uint32_t>(static_cast<uint32_t>(cfg.stem_channels));
  w.put<uint32_t>(static_cast<uint32_t>(cfg.blocks.size()));
  for (const auto& b : cfg.blocks) {
    w.put<uint32_t>(static_cast<uint32_t>(b.channels));
    w.put<uint32_t>(static_cast<uint32_t>(b.stride));
  }
  w.put<uint32_t>(static_cast<uint32_t>(cfg.embed_dim));
  w.put<uint64_t>(cfg.seed);
  w.put<uint32_t>(cfg.standardize_input ? 1u : 0u);
  w.put<uint64_t>(net.parameter_count());
  w.put<uint32_t>(static_cast<uint32_t>(net.tensors().size()));
  const auto params = net.params();
  for (const auto& t : net.tensors()) {
    w.put<uint32_t>(static_cast<uint32_t>(t.name.size()));
    w.put_bytes(t.name.data(), t.name.size());
    w.put<uint32_t>(static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) w.put<uint32_t>(static_cast<uint32_t>(d));
    w.put_bytes(params.data() + t.offset, t.size * sizeof(float));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Network<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  Reader r(std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()),
           path.string());
  char magic[8];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) r.fail("bad magic");
  const uint32_t version = r.get<uint32_t>();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));

  NetworkConfig cfg;
  cfg.mel_channels = static_cast<int>(r.get<uint32_t>());
  cfg.frames = static_cast<int>(r.get<uint32_t>());
  cfg.stem_channels = static_cast<int>(r.get<uint32_t>());
  const uint32_t n_blocks = r.get<uint32_t>();
  if (n_blocks > 1024) r.fail("implausible block count");
  cfg.blocks.clear();
  for (uint32_t i = 0; i < n_blocks; ++i) {
    BlockSpec b;
    b.channels = static_cast<int>(r.get<uint32_t>());
    b.stride = static_cast<int>(r.get<uint32_t>());
    cfg.blocks.push_back(b);
  }
  cfg.embed_dim = static_cast<int>(r.get<uint32_t>());
  cfg.seed = r.get<uint64_t>();
  const uint32_t standardize = r.get<uint32_t>();
  if (standardize > 1) throw Error(ErrorCode::kCorruptCheckpoint, "bad input standardization flag");
  cfg.standardize_input = standardize == 1;

  std::optional<Network<float>> net;
  try {
    net.emplace(cfg);
  } catch (const Error& e) {
    r.fail(std::string("invalid network config: ") + e.what());
  }
  const uint64_t count = r.get<uint64_t>();
  if (count != net->parameter_count()) r.fail("parameter count does not match config");
  const uint32_t n_tensors = r.get<uint32_t>();
  if (n_tensors != net->tensors().size()) r.fail("tensor count does not match config");
  auto params = net->mutable_params();
  for (const auto& t : net->tensors()) {
    const uint32_t name_len = r.get<uint32_t>();
    if (name_len > 4096) r.fail("implausible tensor name length");
    std::string name(name_len, '\0');
    r.get_bytes(name.data(), name_len);
    if (name != t.name) r.fail("expected tensor " + t.name + ", found " + name);
    const uint32_t rank = r.get<uint32_t>();
    if (rank != t.shape.size()) r.fail("rank mismatch for " + t.name);
    for (int d : t.shape) {
      if (r.get<uint32_t>() != static_cast<uint32_t>(d)) r.fail("shape mismatch for " + t.name);
    }
    r.get_bytes(params.data() + t.offset, t.size * sizeof(float));
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return std::move(*net);
}

}  // namespace fsed

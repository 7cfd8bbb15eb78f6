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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "fsed/checkpoint.h"
#include "fsed/optimizer.h"
#include "oracles.h"
#include "test_util.h"

using namespace fsed;

namespace {

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("adam") {
  TEST_CASE("first step on a scalar moves by lr") {
    std::vector<double> w = {1.0};
    const std::vector<double> g = {1.0};
    AdamState<double> state(AdamConfig{}, 1);
    adam_update(std::span<double>(w), std::span<const double>(g), state);
    CHECK(w[0] == doctest::Approx(0.999).epsilon(1e-6));
    CHECK(state.step == 1);
    // Hand evaluation: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1.
    CHECK(state.m[0] == doctest::Approx(0.1));
    CHECK(state.v[0] == doctest::Approx(0.001));
    CHECK(w[0] == doctest::Approx(1.0 - 1e-3 / (1.0 + 1e-8)));
  }

  TEST_CASE("second step follows the bias-corrected recurrence") {
    std::vector<double> w = {0.5};
    AdamState<double> state(AdamConfig{}, 1);
    const std::vector<double> g1 = {2.0}, g2 = {-1.0};
    adam_update(std::span<double>(w), std::span<const double>(g1), state);
    adam_update(std::span<double>(w), std::span<const double>(g2), state);
    const double m = 0.9 * (0.1 * 2.0) + 0.1 * -1.0;
    const double v = 0.999 * (0.001 * 4.0) + 0.001 * 1.0;
    const double m_hat = m / (1.0 - 0.81), v_hat = v / (1.0 - 0.999 * 0.999);
    const double first = 0.5 - 1e-3 * 1.0 / (1.0 + 1e-8);
    CHECK(w[0] == doctest::Approx(first - 1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8)));
  }

  TEST_CASE("zero gradients and zero learning rate leave parameters unchanged") {
    std::vector<float> w = {0.3f, -2.0f, 7.0f};
    const std::vector<float> zero(3, 0.0f), g = {1.0f, -4.0f, 0.5f};
    AdamState<float> state(AdamConfig{}, 3);
    adam_update(std::span<float>(w), std::span<const float>(zero), state);
    CHECK(w == std::vector<float>{0.3f, -2.0f, 7.0f});
    CHECK(state.step == 1);
    AdamConfig frozen;
    frozen.lr = 0.0;
    AdamState<float> fs(frozen, 3);
    for (int i = 0; i < 5; ++i) adam_update(std::span<float>(w), std::span<const float>(g), fs);
    CHECK(w == std::vector<float>{0.3f, -2.0f, 7.0f});
  }

  TEST_CASE("non-finite and mismatched gradients are rejected without side effects") {
    std::vector<float> w = {1.0f, 2.0f};
    std::vector<float> g = {0.5f, std::numeric_limits<float>::quiet_NaN()};
    AdamState<float> state(AdamConfig{}, 2);
    CHECK_ERROR_CODE(adam_update(std::span<float>(w), std::span<const float>(g), state),
                     ErrorCode::kNonFiniteGradient);
    CHECK(w == std::vector<float>{1.0f, 2.0f});
    CHECK(state.step == 0);
    g[1] = std::numeric_limits<float>::infinity();
    CHECK_ERROR_CODE(adam_update(std::span<float>(w), std::span<const float>(g), state),
                     ErrorCode::kNonFiniteGradient);
    const std::vector<float> short_g = {1.0f};
    CHECK_ERROR_CODE(adam_update(std::span<float>(w), std::span<const float>(short_g), state),
                     ErrorCode::kShapeMismatch);
  }

  TEST_CASE("adam_step invalidates caches") {
    Rng rng(1);
    Network<float> net = init_network<float>(NetworkConfig{}, rng);
    const uint64_t before = net.generation();
    const std::vector<float> g(net.parameter_count(), 0.1f);
    AdamState<float> state(AdamConfig{}, net.parameter_count());
    adam_step(net, std::span<const float>(g), state);
    CHECK(net.generation() != before);
  }
}

TEST_SUITE("checkpoint") {
  const std::filesystem::path dir = oracle::scratch_dir("checkpoint_test");

  TEST_CASE("round trip preserves config and parameters exactly") {
    NetworkConfig cfg;
    cfg.seed = 77;
    cfg.standardize_input = false;
    cfg.blocks = {{12, 2}, {20, 1}};
    cfg.embed_dim = 24;
    Rng rng(cfg.seed);
    const Network<float> net = init_network<float>(cfg, rng);
    const auto path = dir / "a.bin";
    save_checkpoint(net, path);
    const Network<float> back = load_checkpoint(path);
    CHECK(back.config() == cfg);
    REQUIRE(back.parameter_count() == net.parameter_count());
    CHECK(std::memcmp(back.params().data(), net.params().data(), net.parameter_count() * sizeof(float)) == 0);
    save_checkpoint(back, dir / "b.bin");
    CHECK(read_bytes(path) == read_bytes(dir / "b.bin"));
  }

  TEST_CASE("header records the parameter count") {
    Rng rng(2);
    const Network<float> net = init_network<float>(NetworkConfig{}, rng);
    save_checkpoint(net, dir / "c.bin");
    const std::vector<char> bytes = read_bytes(dir / "c.bin");
    REQUIRE(bytes.size() > 76);
    CHECK(std::memcmp(bytes.data(), "FSEDCKPT", 8) == 0);
    // magic, version, four config words, three blocks, embed dim, seed, flag.
    const size_t at = 8 + 4 + 16 + 3 * 8 + 4 + 8 + 4;
    uint64_t count = 0;
    std::memcpy(&count, bytes.data() + at, sizeof(count));
    CHECK(count == net.parameter_count());
  }

  TEST_CASE("corrupt files are rejected") {
    Rng rng(3);
    const Network<float> net = init_network<float>(NetworkConfig{}, rng);
    save_checkpoint(net, dir / "d.bin");
    const std::vector<char> good = read_bytes(dir / "d.bin");

    std::vector<char> truncated(good.begin(), good.end() - 10);
    write_bytes(dir / "trunc.bin", truncated);
    CHECK_ERROR_CODE(load_checkpoint(dir / "trunc.bin"), ErrorCode::kCorruptCheckpoint);

    std::vector<char> trailing = good;
    trailing.push_back('x');
    write_bytes(dir / "trail.bin", trailing);
    CHECK_ERROR_CODE(load_checkpoint(dir / "trail.bin"), ErrorCode::kCorruptCheckpoint);

    std::vector<char> magic = good;
    magic[0] = 'X';
    write_bytes(dir / "magic.bin", magic);
    CHECK_ERROR_CODE(load_checkpoint(dir / "magic.bin"), ErrorCode::kCorruptCheckpoint);

    std::vector<char> count = good;
    count[8 + 4 + 16 + 3 * 8 + 4 + 8 + 4] ^= 1;
    write_bytes(dir / "count.bin", count);
    CHECK_ERROR_CODE(load_checkpoint(dir / "count.bin"), ErrorCode::kCorruptCheckpoint);

    CHECK_ERROR_CODE(load_checkpoint(dir / "missing.bin"), ErrorCode::kIo);
  }
}

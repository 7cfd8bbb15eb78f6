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

#ifndef FSED_CHECKPOINT_H_
#define FSED_CHECKPOINT_H_

#include <filesystem>

#include "fsed/network.h"

namespace fsed {

// Layout: "FSEDCKPT", u32 version, NetworkConfig fields, u64 parameter
// count, u32 tensor count, then per tensor: u32 name length, name bytes,
// u32 rank, u32 dims, f32 values. All integers and floats little-endian.
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Network<float>& net, const std::filesystem::path& path);

// Throws kCorruptCheckpoint on bad magic, version mismatch, truncation,
// trailing bytes, or tensors that disagree with the recorded config.
Network<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace fsed

#endif  // FSED_CHECKPOINT_H_

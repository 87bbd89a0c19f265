// Copyright 2026 The LAM Acoustics Authors
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

#pragma once

#include <filesystem>
#include <string>

#include "lam/model.hpp"

namespace lam {

/// Checkpoint layout, little-endian:
///   "LAMM" | version u16 | M u16 | N u16 | F u16 | band_freqs F x f64 |
///   per band: B as 2*M*N f64 (column-major re/im), kernels 24 x f64, biases 4 x f64 |
///   u32 length + UTF-8 JSON config (geometry, tessellation, speed of sound, extras).
inline constexpr std::uint16_t kCheckpointVersion = 1;

/// `extra_config` is embedded verbatim under the "experiment" key when non-empty.
std::string serialize_checkpoint(const LamModel& model, const std::string& extra_config = {});
LamModel deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const LamModel& model, const std::filesystem::path& path,
                     const std::string& extra_config = {});
LamModel load_checkpoint(const std::filesystem::path& path);

}  // namespace lam

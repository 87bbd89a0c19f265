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

#include "lam/dsp.hpp"

namespace lam {

/// CSM store, little-endian:
///   "LAMC" | version u16 | M u16 | F u16 | W u32 | sample_rate f64 |
///   band_freqs F x f64 | W x F records of { timestamp f64, M*M complex64 }
/// Matrices are row-major with interleaved re/im float32 pairs.
inline constexpr std::uint16_t kCsmStoreVersion = 1;

void write_csm_store(const CsmSequence& seq, const std::filesystem::path& path);
CsmSequence read_csm_store(const std::filesystem::path& path);

}  // namespace lam

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

/// Reads RIFF/WAVE with 16- or 24-bit integer PCM or 32-bit float samples
/// (plain or WAVE_FORMAT_EXTENSIBLE headers).
MultichannelAudio read_wav(const std::filesystem::path& path);

/// Writes 32-bit float WAVE, atomically.
void write_wav(const MultichannelAudio& audio, const std::filesystem::path& path);

}  // namespace lam

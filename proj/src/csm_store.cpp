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

#include "lam/csm_store.hpp"

#include "lam/io_util.hpp"

namespace lam {

void write_csm_store(const CsmSequence& seq, const std::filesystem::path& path) {
  if (seq.channels < 1 || seq.channels > 0xFFFF) throw ConfigError("csm store: bad channel count");
  ByteWriter w;
  w.bytes("LAMC");
  w.u16(kCsmStoreVersion);
  w.u16(static_cast<std::uint16_t>(seq.channels));
  w.u16(static_cast<std::uint16_t>(seq.bands()));
  w.u32(static_cast<std::uint32_t>(seq.window_count()));
  w.f64(seq.sample_rate);
  for (double f : seq.band_freqs) w.f64(f);
  for (const auto& window : seq.windows) {
    for (const auto& c : window) {
      w.f64(c.timestamp);
      for (int i = 0; i < seq.channels; ++i) {
        for (int j = 0; j < seq.channels; ++j) {
          w.f32(static_cast<float>(c.entries(i, j).real()));
          w.f32(static_cast<float>(c.entries(i, j).imag()));
        }
      }
    }
  }
  write_file_atomic(path, w.data());
}

CsmSequence read_csm_store(const std::filesystem::path& path) {
  ByteReader r(read_file(path));
  if (r.bytes(4) != "LAMC") throw IoError(path.string() + ": not a CSM store");
  const auto version = r.u16();
  if (version != kCsmStoreVersion) {
    throw IoError(path.string() + ": unsupported CSM store version " + std::to_string(version));
  }
  CsmSequence seq;
  seq.channels = r.u16();
  const int bands = r.u16();
  const auto windows = r.u32();
  seq.sample_rate = r.f64();
  for (int f = 0; f < bands; ++f) seq.band_freqs.push_back(r.f64());
  seq.windows.resize(windows);
  for (auto& window : seq.windows) {
    window.resize(bands);
    for (int f = 0; f < bands; ++f) {
      auto& c = window[f];
      c.band_hz = seq.band_freqs[f];
      c.timestamp = r.f64();
      c.entries.resize(seq.channels, seq.channels);
      for (int i = 0; i < seq.channels; ++i) {
        for (int j = 0; j < seq.channels; ++j) {
          const float re = r.f32();
          const float im = r.f32();
          c.entries(i, j) = cplx(re, im);
        }
      }
    }
  }
  if (!r.at_end()) throw IoError(path.string() + ": trailing bytes in CSM store");
  return seq;
}

}  // namespace lam

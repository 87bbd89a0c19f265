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

#include "lam/wav.hpp"

#include <cmath>
#include <cstring>

#include "lam/io_util.hpp"

namespace lam {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

MultichannelAudio read_wav(const std::filesystem::path& path) {
  ByteReader r(read_file(path));
  if (r.bytes(4) != "RIFF") throw IoError(path.string() + ": not a RIFF file");
  r.u32();
  if (r.bytes(4) != "WAVE") throw IoError(path.string() + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (true) {
    const std::string id = r.bytes(4);
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      const std::string body = r.bytes(size + (size & 1u));
      ByteReader f(body);
      format = f.u16();
      channels = f.u16();
      rate = f.u32();
      f.u32();
      f.u16();
      bits = f.u16();
      if (format == kFormatExtensible && size >= 40) {
        f.u16();
        f.u16();
        f.u32();
        format = f.u16();
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError(path.string() + ": data chunk before fmt chunk");
      if (channels == 0) throw IoError(path.string() + ": zero channels");
      const int bytes_per = bits / 8;
      const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24)) ||
                      (format == kFormatFloat && bits == 32);
      if (!ok) {
        throw IoError(path.string() + ": unsupported sample format (" + std::to_string(format) +
                      ", " + std::to_string(bits) + " bit)");
      }
      const std::uint32_t frames = size / (bytes_per * channels);
      const std::string data = r.bytes(static_cast<size_t>(frames) * bytes_per * channels);
      MultichannelAudio audio;
      audio.sample_rate = rate;
      audio.samples.resize(channels, frames);
      const auto* p = reinterpret_cast<const unsigned char*>(data.data());
      for (std::uint32_t t = 0; t < frames; ++t) {
        for (int m = 0; m < channels; ++m, p += bytes_per) {
          double v = 0.0;
          if (format == kFormatFloat) {
            float f;
            std::memcpy(&f, p, 4);
            v = f;
          } else if (bits == 16) {
            std::int16_t s;
            std::memcpy(&s, p, 2);
            v = s / 32768.0;
          } else {
            const std::uint32_t u = (std::uint32_t{p[0]} << 8) | (std::uint32_t{p[1]} << 16) |
                                  (std::uint32_t{p[2]} << 24);
            v = (static_cast<std::int32_t>(u) >> 8) / 8388608.0;
          }
          audio.samples(m, t) = v;
        }
      }
      return audio;
    } else {
      r.bytes(size + (size & 1u));
    }
  }
}

void write_wav(const MultichannelAudio& audio, const std::filesystem::path& path) {
  const auto channels = static_cast<std::uint16_t>(audio.channels());
  const auto frames = static_cast<std::uint32_t>(audio.length());
  const std::uint32_t data_bytes = frames * channels * 4u;
  ByteWriter w;
  w.bytes("RIFF");
  w.u32(4 + 8 + 16 + 8 + data_bytes);
  w.bytes("WAVE");
  w.bytes("fmt ");
  w.u32(16);
  w.u16(kFormatFloat);
  w.u16(channels);
  w.u32(static_cast<std::uint32_t>(std::lround(audio.sample_rate)));
  w.u32(static_cast<std::uint32_t>(std::lround(audio.sample_rate)) * channels * 4u);
  w.u16(static_cast<std::uint16_t>(channels * 4));
  w.u16(32);
  w.bytes("data");
  w.u32(data_bytes);
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (int m = 0; m < channels; ++m) w.f32(static_cast<float>(audio.samples(m, t)));
  }
  write_file_atomic(path, w.data());
}

}  // namespace lam

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

#include "lam/io_util.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lam/common.hpp"

namespace lam {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {
template <typename T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}
}  // namespace

void ByteWriter::u16(std::uint16_t v) { put(buf_, v); }
void ByteWriter::u32(std::uint32_t v) { put(buf_, v); }
void ByteWriter::f32(float v) { put(buf_, v); }
void ByteWriter::f64(double v) { put(buf_, v); }
void ByteWriter::bytes(std::string_view b) { buf_.append(b); }

void ByteReader::need(size_t n) const {
  if (pos_ + n > buf_.size()) throw IoError("truncated binary file");
}

#define LAM_READ(T)                          \
  need(sizeof(T));                           \
  T v;                                       \
  std::memcpy(&v, buf_.data() + pos_, sizeof(T)); \
  pos_ += sizeof(T);                         \
  return v;

std::uint16_t ByteReader::u16() { LAM_READ(std::uint16_t) }
std::uint32_t ByteReader::u32() { LAM_READ(std::uint32_t) }
float ByteReader::f32() { LAM_READ(float) }
double ByteReader::f64() { LAM_READ(double) }
#undef LAM_READ

std::string ByteReader::bytes(size_t n) {
  need(n);
  std::string out = buf_.substr(pos_, n);
  pos_ += n;
  return out;
}

}  // namespace lam

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

#include "lam/checkpoint.hpp"

#include <json.hpp>

#include "lam/io_util.hpp"

namespace lam {

std::string serialize_checkpoint(const LamModel& model, const std::string& extra_config) {
  const int m = model.channels();
  const int n = model.tess.size();
  ByteWriter w;
  w.bytes("LAMM");
  w.u16(kCheckpointVersion);
  w.u16(static_cast<std::uint16_t>(m));
  w.u16(static_cast<std::uint16_t>(n));
  w.u16(static_cast<std::uint16_t>(model.band_count()));
  for (const auto& band : model.bands) w.f64(band.band_hz);
  for (const auto& band : model.bands) {
    if (band.channels() != m || band.directions() != n) {
      throw ConfigError("checkpoint: band shape does not match the model");
    }
    for (double v : band.pack()) w.f64(v);
  }

  nlohmann::ordered_json cfg;
  cfg["geometry"] = model.geometry_name;
  cfg["positions"] = nlohmann::ordered_json::array();
  for (int c = 0; c < m; ++c) {
    cfg["positions"].push_back(
        {model.positions(0, c), model.positions(1, c), model.positions(2, c)});
  }
  cfg["n_points"] = n;
  cfg["k_neighbors"] = model.k_neighbors;
  cfg["speed_of_sound"] = model.speed_of_sound;
  if (!extra_config.empty()) cfg["experiment"] = nlohmann::ordered_json::parse(extra_config);
  const std::string blob = cfg.dump();
  w.u32(static_cast<std::uint32_t>(blob.size()));
  w.bytes(blob);
  return w.data();
}

LamModel deserialize_checkpoint(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != "LAMM") throw IoError("not a LAM checkpoint");
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  const int m = r.u16();
  const int n = r.u16();
  const int f_count = r.u16();
  std::vector<double> freqs;
  for (int f = 0; f < f_count; ++f) freqs.push_back(r.f64());
  std::vector<std::vector<double>> flat(f_count);
  for (int f = 0; f < f_count; ++f) {
    flat[f].resize(static_cast<size_t>(2 * m * n + 28));
    for (auto& v : flat[f]) v = r.f64();
  }
  const std::uint32_t len = r.u32();
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(r.bytes(len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint config blob: ") + e.what());
  }

  Eigen::Matrix3Xd pos(3, m);
  const auto& rows = cfg.at("positions");
  if (static_cast<int>(rows.size()) != m) throw IoError("checkpoint: position count mismatch");
  for (int c = 0; c < m; ++c) {
    for (int d = 0; d < 3; ++d) pos(d, c) = rows[c][d].get<double>();
  }
  LamModel model;
  model.geometry_name = cfg.value("geometry", "custom");
  model.positions = pos;
  model.k_neighbors = cfg.at("k_neighbors");
  model.speed_of_sound = cfg.at("speed_of_sound");
  model.tess = fibonacci_tessellation(n, model.k_neighbors);
  for (int f = 0; f < f_count; ++f) {
    model.steering.push_back(steering_matrix(pos, model.tess, freqs[f], model.speed_of_sound));
    LamBandModel band;
    band.band_hz = freqs[f];
    band.back_projection.resize(m, n);
    for (int t = 0; t < kDenoiseSteps; ++t) band.kernels[t].resize(kKernelSizes[t]);
    band.unpack(flat[f]);
    model.bands.push_back(std::move(band));
  }
  return model;
}

void save_checkpoint(const LamModel& model, const std::filesystem::path& path,
                     const std::string& extra_config) {
  write_file_atomic(path, serialize_checkpoint(model, extra_config));
}

LamModel load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace lam

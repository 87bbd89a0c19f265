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

#include "lam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <optional>
#include <random>

#include <Eigen/Geometry>
#include <json.hpp>

#include "lam/csm_store.hpp"
#include "lam/io_util.hpp"
#include "lam/wav.hpp"

namespace lam {

int validation_count(int n_scenes) {
  return static_cast<int>(std::lround(0.2 * n_scenes));
}

SceneSpec sample_scene(const SceneDistribution& dist, const ArrayGeometry& geometry,
                       std::uint64_t seed, int index) {
  const std::uint64_t scene_seed = derive_seed(seed, static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(scene_seed);
  std::uniform_int_distribution<int> count(dist.min_sources, dist.max_sources);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SceneSpec spec;
  spec.geometry = geometry;
  spec.duration = dist.duration;
  spec.seed = scene_seed;
  spec.label_frame = dist.label_frame;
  spec.speed_of_sound = dist.speed_of_sound;
  spec.snr_db = dist.snr_db_min + (dist.snr_db_max - dist.snr_db_min) * unit(rng);

  const int n_sources = count(rng);
  const auto samples = static_cast<std::size_t>(std::llround(dist.duration * dist.sample_rate));
  std::vector<Eigen::Vector3d> starts;
  for (int s = 0; s < n_sources; ++s) {
    Eigen::Vector3d dir;
    for (int attempt = 0;; ++attempt) {
      dir = random_direction(rng());
      bool ok = true;
      for (const auto& other : starts) {
        if (rad2deg(angle_between(dir, other)) < dist.min_separation_deg) ok = false;
      }
      if (ok || attempt > 1000) break;
    }
    starts.push_back(dir);

    SourceTrajectory src;
    src.sample_rate = dist.sample_rate;
    src.waveform = generate_waveform(dist.waveform, samples, dist.sample_rate, rng());
    src.track.push_back({0.0, dir});
    if (unit(rng) < dist.moving_fraction) {
      const Eigen::Vector3d axis = dir.cross(random_direction(rng())).normalized();
      const double step = deg2rad(dist.angular_speed_deg) * dist.label_frame;
      const int frames = static_cast<int>(std::ceil(dist.duration / dist.label_frame - 1e-9));
      for (int i = 1; i < frames; ++i) {
        const Eigen::Vector3d d = Eigen::AngleAxisd(step * i, axis) * dir;
        src.track.push_back({i * dist.label_frame, d.normalized()});
      }
    }
    spec.sources.push_back(std::move(src));
  }
  return spec;
}

std::vector<const ManifestEntry*> Manifest::split(const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : scenes) {
    if (name == "all" || e.split == name) out.push_back(&e);
  }
  return out;
}

Manifest make_dataset(int n_scenes, const ArrayGeometry& geometry, const DatasetOptions& opts,
                      std::uint64_t seed, const std::filesystem::path& output_dir) {
  if (n_scenes < 1) throw ConfigError("dataset: n_scenes must be >= 1");
  std::filesystem::create_directories(output_dir);
  std::optional<ArrayGeometry> subset;
  if (!opts.subset_channels.empty()) subset = subset_channels(geometry, opts.subset_channels);

  Manifest manifest;
  manifest.seed = seed;
  manifest.geometry = geometry.name();
  manifest.subset_channels = opts.subset_channels;
  manifest.scenes.resize(n_scenes);

  std::vector<int> order(n_scenes);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(derive_seed(seed, 0x73706c6974ull));
  std::shuffle(order.begin(), order.end(), split_rng);
  const int n_val = validation_count(n_scenes);
  std::vector<std::string> split(n_scenes, "train");
  for (int i = 0; i < n_val; ++i) split[order[i]] = "validation";
  if (n_val == 0) {
    manifest.warnings.push_back("dataset has no validation scenes (n_scenes=" +
                                std::to_string(n_scenes) + ")");
  }

  std::vector<std::exception_ptr> errors(n_scenes);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_scenes; ++i) {
    try {
      const SceneSpec spec = sample_scene(opts.distribution, geometry, seed, i);
      const RenderedScene scene = render_scene(spec);
      char id[32];
      std::snprintf(id, sizeof(id), "scene_%04d", i);
      ManifestEntry e;
      e.id = id;
      e.split = split[i];
      e.seed = spec.seed;
      if (opts.write_audio) {
        e.audio = e.id + ".wav";
        write_wav(scene.audio, output_dir / e.audio);
        e.audio_hash = fnv1a_hex(read_file(output_dir / e.audio));
      }
      e.csm = e.id + ".lamc";
      write_csm_store(csm_sequence(scene.audio, opts.csm), output_dir / e.csm);
      e.csm_hash = fnv1a_hex(read_file(output_dir / e.csm));
      if (subset) {
        MultichannelAudio low;
        low.sample_rate = scene.audio.sample_rate;
        low.samples.resize(static_cast<Eigen::Index>(opts.subset_channels.size()),
                           scene.audio.length());
        for (size_t c = 0; c < opts.subset_channels.size(); ++c) {
          low.samples.row(static_cast<Eigen::Index>(c)) =
              scene.audio.samples.row(opts.subset_channels[c] - 1);
        }
        e.csm_subset = e.id + "_sub.lamc";
        write_csm_store(csm_sequence(low, opts.csm), output_dir / e.csm_subset);
        e.csm_subset_hash = fnv1a_hex(read_file(output_dir / e.csm_subset));
      }
      e.ground_truth = e.id + "_gt.csv";
      write_ground_truth_csv(scene.truth, output_dir / e.ground_truth);
      e.ground_truth_hash = fnv1a_hex(read_file(output_dir / e.ground_truth));
      manifest.scenes[i] = std::move(e);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  write_manifest(manifest, output_dir / "manifest.json");
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["seed"] = manifest.seed;
  j["geometry"] = manifest.geometry;
  j["subset_channels"] = manifest.subset_channels;
  j["scenes"] = nlohmann::ordered_json::array();
  for (const auto& e : manifest.scenes) {
    nlohmann::ordered_json s;
    s["id"] = e.id;
    s["split"] = e.split;
    s["seed"] = e.seed;
    s["audio"] = e.audio;
    s["csm"] = e.csm;
    s["csm_subset"] = e.csm_subset;
    s["ground_truth"] = e.ground_truth;
    s["hashes"] = {{"audio", e.audio_hash},
                   {"csm", e.csm_hash},
                   {"csm_subset", e.csm_subset_hash},
                   {"ground_truth", e.ground_truth_hash}};
    j["scenes"].push_back(std::move(s));
  }
  write_file_atomic(path, j.dump(2) + "\n");
}

Manifest read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("manifest not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw IoError("manifest " + path.string() + ": " + ex.what());
  }
  Manifest m;
  m.seed = j.value("seed", std::uint64_t{0});
  m.geometry = j.value("geometry", "");
  m.subset_channels = j.value("subset_channels", std::vector<int>{});
  for (const auto& s : j.at("scenes")) {
    ManifestEntry e;
    e.id = s.at("id");
    e.split = s.at("split");
    e.seed = s.at("seed");
    e.audio = s.value("audio", "");
    e.csm = s.at("csm");
    e.csm_subset = s.value("csm_subset", "");
    e.ground_truth = s.at("ground_truth");
    const auto& h = s.at("hashes");
    e.audio_hash = h.value("audio", "");
    e.csm_hash = h.value("csm", "");
    e.csm_subset_hash = h.value("csm_subset", "");
    e.ground_truth_hash = h.value("ground_truth", "");
    m.scenes.push_back(std::move(e));
  }
  return m;
}

}  // namespace lam

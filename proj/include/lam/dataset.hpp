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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lam/dsp.hpp"
#include "lam/simulator.hpp"

namespace lam {

/// Random scene generator parameters.
struct SceneDistribution {
  double sample_rate = 48000.0;
  double duration = 1.0;
  int min_sources = 1;
  int max_sources = 1;
  double snr_db_min = 20.0;
  double snr_db_max = 30.0;
  double min_separation_deg = 30.0;  // between simultaneous sources
  double moving_fraction = 0.0;      // probability that a source moves
  double angular_speed_deg = 30.0;   // deg/s for moving sources
  WaveformKind waveform = WaveformKind::kWhiteNoise;
  double label_frame = 0.1;
  double speed_of_sound = kDefaultSpeedOfSound;
};

/// Draws scene `index` of a dataset seeded with `seed`.
SceneSpec sample_scene(const SceneDistribution& dist, const ArrayGeometry& geometry,
                       std::uint64_t seed, int index);

struct ManifestEntry {
  std::string id;
  std::string split;  // "train" or "validation"
  std::uint64_t seed = 0;
  std::string audio;         // paths relative to the manifest directory
  std::string csm;
  std::string csm_subset;    // optional paired low-channel store
  std::string ground_truth;
  std::string audio_hash;
  std::string csm_hash;
  std::string csm_subset_hash;
  std::string ground_truth_hash;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::string geometry;
  std::vector<int> subset_channels;
  std::vector<ManifestEntry> scenes;
  std::vector<std::string> warnings;  // not serialized

  std::vector<const ManifestEntry*> split(const std::string& name) const;
};

struct DatasetOptions {
  SceneDistribution distribution;
  CsmConfig csm;
  std::vector<int> subset_channels;  // 1-based; empty = no paired subset store
  bool write_audio = true;
};

/// Renders n_scenes scenes in parallel, writes WAV, CSM store(s) and ground
/// truth per scene, and a manifest with a seeded 80/20 train/validation split.
Manifest make_dataset(int n_scenes, const ArrayGeometry& geometry, const DatasetOptions& opts,
                      std::uint64_t seed, const std::filesystem::path& output_dir);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Number of validation scenes for a dataset of n scenes (20%, rounded).
int validation_count(int n_scenes);

}  // namespace lam

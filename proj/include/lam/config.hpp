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
#include <limits>
#include <string>
#include <vector>

#include "lam/dataset.hpp"
#include "lam/doae.hpp"
#include "lam/dsp.hpp"
#include "lam/train.hpp"

namespace lam {

struct ExperimentConfig {
  std::string geometry = "em32";   // builtin name or path to a geometry JSON file
  std::vector<int> channels;       // 1-based subset for paired low-channel stores
  int n_points = 242;
  int k_neighbors = 6;
  double speed_of_sound = kDefaultSpeedOfSound;
  CsmConfig csm;
  TrainConfig train;
  KMeansParams doae;
  double gate_deg = std::numeric_limits<double>::infinity();
  SceneDistribution simulation;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// Range checks across sections; throws ConfigError naming the field.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types throw ConfigError. Missing keys
/// keep their defaults.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace lam

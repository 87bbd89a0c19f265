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
#include <optional>
#include <string>

#include "lam/config.hpp"

namespace lam::cli {

struct Context {
  ExperimentConfig cfg;
  std::filesystem::path out;
};

struct SimulateArgs {
  int n_scenes = 10;
  bool write_audio = true;
};

struct CsmArgs {
  std::string input;
  std::string output;
  bool subset = false;  // restrict to cfg.channels before computing
};

struct TrainArgs {
  std::string manifest;
  std::string upsampler;  // optional: train on upsampled subset stores
  int bands = 0;          // 0 = all bands of the stores
  std::string checkpoint = "model.lamm";
};

struct CheckGradsArgs {
  std::string checkpoint;  // optional; fresh model from the config otherwise
  std::string csm;         // optional; synthetic CSMs otherwise
  int pairs = 20;
  int parameters = 200;
  double tolerance = 1e-4;
};

// Source of maps shared by `map` and `doae`.
struct MapSource {
  std::string checkpoint;
  std::string method;  // das | music, when no checkpoint
  int sources = 2;     // MUSIC signal subspace size
  std::string csm;
};

struct MapArgs {
  MapSource source;
  int window = 0;
  std::string prefix = "map";
};

struct DoaeArgs {
  MapSource source;
  std::string ground_truth;  // frame grid from a ground-truth CSV
  int frames = -1;
  std::string output = "estimates.csv";
};

struct EvalArgs {
  std::string estimates;
  std::string ground_truth;
  std::optional<double> gate_deg;
  std::string prefix = "eval";
};

struct UpsampleTrainArgs {
  std::string manifest;
  double ridge = 1e-6;
  std::string output = "upsampler.lamu";
};

int cmd_simulate(const Context& ctx, const SimulateArgs& args);
int cmd_csm(const Context& ctx, const CsmArgs& args);
int cmd_train(const Context& ctx, const TrainArgs& args);
int cmd_check_grads(const Context& ctx, const CheckGradsArgs& args);
int cmd_map(const Context& ctx, const MapArgs& args);
int cmd_doae(const Context& ctx, const DoaeArgs& args);
int cmd_eval(const Context& ctx, const EvalArgs& args);
int cmd_upsample_train(const Context& ctx, const UpsampleTrainArgs& args);

}  // namespace lam::cli

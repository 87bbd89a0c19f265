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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lam/dataset.hpp"
#include "lam/model.hpp"
#include "lam/upsampler.hpp"

namespace lam {

struct TrainConfig {
  double learning_rate = 1e-6;
  double gamma = 1e-4;
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 20;
  std::uint64_t seed = 0;
  double divergence_factor = 1e3;  // abort when a batch loss exceeds this x initial loss
  bool parallel_bands = true;

  void validate() const;
};

/// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// In-place update. Throws NumericError on a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate);

/// CSMs grouped by band: `csms[f]` are all training windows of band f.
struct TrainingData {
  std::vector<double> band_freqs;
  std::vector<std::vector<Eigen::MatrixXcd>> csms;

  std::size_t size() const { return csms.empty() ? 0 : csms.front().size(); }
  void add(const CsmSequence& seq);
};

/// Loads the CSM stores of one split ("train", "validation" or "all") from a
/// manifest. With an upsampler the paired low-channel stores are read and
/// upsampled instead.
TrainingData load_training_data(const Manifest& manifest, const std::filesystem::path& root,
                                const std::string& split, const std::vector<double>& band_freqs,
                                const LearnedUpsampler* upsampler = nullptr);

struct EpochRecord {
  int epoch = 0;
  int band = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> records;  // epoch 0 is the untrained model
  std::vector<int> best_epoch;       // per band
  double wall_seconds = 0.0;

  std::vector<EpochRecord> band_records(int band) const;
};

/// CSV columns: epoch, band, train_loss, val_loss.
void write_report_csv(const TrainReport& report, const std::filesystem::path& path);

struct TrainResult {
  LamModel model;
  TrainReport report;
};

/// Minimizes the mean batch loss per band; keeps the parameters of the epoch
/// with the lowest validation loss (training loss when there is no validation
/// data). Bands train independently with seeds derived from cfg.seed.
TrainResult train(const LamModel& model, const TrainingData& train_data,
                  const TrainingData& val_data, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Mean loss of a band over a set of CSMs.
LossTerms mean_loss(const LamBandModel& band, const SteeringMatrix& steering, double gamma,
                    const std::vector<std::vector<int>>& neighbors,
                    const std::vector<Eigen::MatrixXcd>& csms);

struct GradCheckOptions {
  double tolerance = 1e-4;
  int parameters = 200;   // minimum number of checked parameters
  double step = 1e-5;     // central-difference step
  double kink_margin = 1e-3;
  double gamma = 1e-4;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  int checked = 0;
  int excluded_kinks = 0;
  int worst_parameter = -1;
  bool passed = false;
};

/// Central finite differences on a random subset of parameters (all kernel taps
/// and biases plus random entries of B). Parameters whose perturbation moves a
/// ReLU pre-activation, |x4| or TV difference lying within kink_margin of zero
/// are excluded and counted. Relative error uses the denominator
/// max(|fd|, |analytic|, 1e-6 (1 + |L|)). Passes iff tolerance > 0 and the max
/// relative error is <= tolerance.
GradCheckReport check_gradients(const LamBandModel& band, const SteeringMatrix& steering,
                                const std::vector<std::vector<int>>& neighbors,
                                const Eigen::MatrixXcd& csm, const GradCheckOptions& opts);

}  // namespace lam

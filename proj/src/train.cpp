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

#include "lam/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "lam/csm_store.hpp"
#include "lam/io_util.hpp"

namespace lam {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(gamma > 0.0)) throw ConfigError("train.gamma must be positive");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (max_epochs < 0) throw ConfigError("train.max_epochs must be >= 0");
  if (patience < 1) throw ConfigError("train.patience must be >= 1");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate) {
  if (params.size() != grads.size()) throw ConfigError("adam: parameter/gradient size mismatch");
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("adam: non-finite gradient at parameter " + std::to_string(i));
    }
  }
  if (state.first_moment.size() != params.size()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grads[i] * grads[i];
    params[i] -= learning_rate * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
}

void TrainingData::add(const CsmSequence& seq) {
  if (csms.empty()) csms.resize(band_freqs.size());
  std::vector<int> lookup;
  for (double f : band_freqs) {
    int found = -1;
    for (int b = 0; b < seq.bands(); ++b) {
      if (std::abs(seq.band_freqs[b] - f) < 1e-6) found = b;
    }
    if (found < 0) {
      throw ConfigError("training data: band " + std::to_string(f) + " Hz missing from store");
    }
    lookup.push_back(found);
  }
  for (const auto& window : seq.windows) {
    for (size_t f = 0; f < band_freqs.size(); ++f) csms[f].push_back(window[lookup[f]].entries);
  }
}

TrainingData load_training_data(const Manifest& manifest, const std::filesystem::path& root,
                                const std::string& split, const std::vector<double>& band_freqs,
                                const LearnedUpsampler* upsampler) {
  TrainingData data;
  data.band_freqs = band_freqs;
  data.csms.resize(band_freqs.size());
  for (const ManifestEntry* e : manifest.split(split)) {
    if (upsampler) {
      if (e->csm_subset.empty()) {
        throw ConfigError("training data: manifest has no paired subset stores to upsample");
      }
      data.add(upsample_sequence(read_csm_store(root / e->csm_subset), *upsampler));
    } else {
      data.add(read_csm_store(root / e->csm));
    }
  }
  return data;
}

std::vector<EpochRecord> TrainReport::band_records(int band) const {
  std::vector<EpochRecord> out;
  for (const auto& r : records) {
    if (r.band == band) out.push_back(r);
  }
  return out;
}

void write_report_csv(const TrainReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,band,train_loss,val_loss\n";
  out.precision(17);
  for (const auto& r : report.records) {
    out << r.epoch << "," << r.band << "," << r.train_loss << "," << r.val_loss << "\n";
  }
  write_file_atomic(path, out.str());
}

LossTerms mean_loss(const LamBandModel& band, const SteeringMatrix& steering, double gamma,
                    const std::vector<std::vector<int>>& neighbors,
                    const std::vector<Eigen::MatrixXcd>& csms) {
  LossTerms sum;
  for (const auto& c : csms) {
    const LossTerms t = evaluate_loss(c, band, steering, gamma, neighbors);
    sum.total += t.total;
    sum.mse += t.mse;
    sum.l1 += t.l1;
    sum.tv += t.tv;
  }
  if (!csms.empty()) {
    const double n = static_cast<double>(csms.size());
    sum.total /= n;
    sum.mse /= n;
    sum.l1 /= n;
    sum.tv /= n;
  }
  return sum;
}

namespace {

struct BandOutcome {
  LamBandModel best;
  std::vector<EpochRecord> records;
  int best_epoch = 0;
};

BandOutcome train_band(const LamBandModel& init, const SteeringMatrix& steering,
                       const std::vector<std::vector<int>>& neighbors,
                       const std::vector<Eigen::MatrixXcd>& train_set,
                       const std::vector<Eigen::MatrixXcd>& val_set, const TrainConfig& cfg,
                       int band_index, const std::function<void(const EpochRecord&)>& on_epoch) {
  BandOutcome out;
  LamBandModel band = init;
  std::vector<double> params = band.pack();
  AdamState adam;
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x7472000ull + static_cast<std::uint64_t>(band_index)));

  auto record_epoch = [&](int epoch, const LossTerms& train_terms) {
    EpochRecord r;
    r.epoch = epoch;
    r.band = band_index;
    r.train_loss = train_terms.total;
    r.train_mse = train_terms.mse;
    if (val_set.empty()) {
      // No validation split: model selection falls back to the training loss.
      r.val_loss = r.train_loss;
      r.val_mse = r.train_mse;
    } else {
      const LossTerms v = mean_loss(band, steering, cfg.gamma, neighbors, val_set);
      r.val_loss = v.total;
      r.val_mse = v.mse;
    }
    if (!std::isfinite(r.train_loss) || !std::isfinite(r.val_loss)) {
      throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", band " +
                         std::to_string(band_index));
    }
    out.records.push_back(r);
    if (on_epoch) on_epoch(r);
    return r;
  };

  const LossTerms initial = mean_loss(band, steering, cfg.gamma, neighbors, train_set);
  double best_val = record_epoch(0, initial).val_loss;
  out.best = band;
  out.best_epoch = 0;

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossTerms epoch_sum;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      LamBandModel grad = band.zeros_like();
      LossTerms batch;
      for (size_t i = start; i < stop; ++i) {
        const BandLossGradient lg =
            loss_and_gradient(train_set[order[i]], band, steering, cfg.gamma, neighbors);
        batch.total += lg.terms.total;
        batch.mse += lg.terms.mse;
        grad.back_projection += lg.gradient.back_projection;
        for (int t = 0; t < kDenoiseSteps; ++t) {
          grad.kernels[t] += lg.gradient.kernels[t];
          grad.biases[t] += lg.gradient.biases[t];
        }
      }
      const double count = static_cast<double>(stop - start);
      batch.total /= count;
      batch.mse /= count;
      if (!std::isfinite(batch.total)) {
        throw NumericError("train: non-finite loss in batch " + std::to_string(batches) +
                           " of epoch " + std::to_string(epoch) + ", band " +
                           std::to_string(band_index));
      }
      if (batch.total > cfg.divergence_factor * std::max(initial.total, 1e-300)) {
        throw NumericError("train: diverged (batch loss " + std::to_string(batch.total) +
                           " > " + std::to_string(cfg.divergence_factor) + " x initial " +
                           std::to_string(initial.total) + ") in batch " +
                           std::to_string(batches) + " of epoch " + std::to_string(epoch));
      }
      std::vector<double> g = grad.pack();
      for (auto& v : g) v /= count;
      try {
        adam_step(params, g, adam, cfg.learning_rate);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (batch " + std::to_string(batches) +
                           ", epoch " + std::to_string(epoch) + ", band " +
                           std::to_string(band_index) + ")");
      }
      band.unpack(params);
      epoch_sum.total += batch.total;
      epoch_sum.mse += batch.mse;
      ++batches;
    }
    if (batches > 0) {
      epoch_sum.total /= batches;
      epoch_sum.mse /= batches;
    }
    const EpochRecord r = record_epoch(epoch, epoch_sum);
    if (r.val_loss < best_val) {
      best_val = r.val_loss;
      out.best = band;
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return out;
}

}  // namespace

TrainResult train(const LamModel& model, const TrainingData& train_data,
                  const TrainingData& val_data, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  if (train_data.size() == 0) throw ConfigError("train: empty training set");
  if (train_data.band_freqs.size() != static_cast<size_t>(model.band_count())) {
    throw ConfigError("train: dataset and model have different band counts");
  }
  for (int f = 0; f < model.band_count(); ++f) {
    if (std::abs(train_data.band_freqs[f] - model.bands[f].band_hz) > 1e-6) {
      throw ConfigError("train: dataset band frequencies do not match the model");
    }
  }
  const bool has_val = val_data.size() > 0;
  const int bands = model.band_count();
  std::vector<BandOutcome> outcomes(bands);
  std::vector<std::exception_ptr> errors(bands);
  auto run = [&](int f) {
    try {
      static const std::vector<Eigen::MatrixXcd> kEmpty;
      outcomes[f] = train_band(model.bands[f], model.steering[f], model.tess.neighbors,
                               train_data.csms[f], has_val ? val_data.csms[f] : kEmpty, cfg, f,
                               cfg.parallel_bands ? std::function<void(const EpochRecord&)>{}
                                                  : on_epoch);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };
  if (cfg.parallel_bands) {
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < bands; ++f) run(f);
  } else {
    for (int f = 0; f < bands; ++f) run(f);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  TrainResult result{model, {}};
  for (int f = 0; f < bands; ++f) {
    result.model.bands[f] = outcomes[f].best;
    result.report.best_epoch.push_back(outcomes[f].best_epoch);
    if (cfg.parallel_bands && on_epoch) {
      for (const auto& r : outcomes[f].records) on_epoch(r);
    }
    result.report.records.insert(result.report.records.end(), outcomes[f].records.begin(),
                                 outcomes[f].records.end());
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace lam

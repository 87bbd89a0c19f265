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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lam/beamform.hpp"
#include "lam/dsp.hpp"
#include "lam/geometry.hpp"

namespace lam {

inline constexpr std::array<int, 4> kKernelSizes = {3, 5, 7, 9};
inline constexpr int kDenoiseSteps = 4;

/// Learnable parameters of one frequency band. Also used to hold gradients.
struct LamBandModel {
  Eigen::MatrixXcd back_projection;          // B, M x N
  std::array<Eigen::VectorXd, 4> kernels;    // lengths 3, 5, 7, 9
  std::array<double, 4> biases{};
  double band_hz = 0.0;

  int channels() const { return static_cast<int>(back_projection.rows()); }
  int directions() const { return static_cast<int>(back_projection.cols()); }
  /// 2*M*N + 24 + 4 real parameters.
  std::int64_t parameter_count() const;

  /// Same shapes, all zeros.
  LamBandModel zeros_like() const;
  /// Flat real view: B as (re, im) pairs column-major, then kernels, then biases.
  std::vector<double> pack() const;
  void unpack(const std::vector<double>& flat);
};

/// B <- A, kernels are unit impulses plus U(-0.01, 0.01) noise, biases 0.
LamBandModel init_band_model(const SteeringMatrix& steering, std::uint64_t seed);

/// Intensities after each denoising stage; x[0] is the back-projection.
struct LatentTrace {
  std::array<Eigen::VectorXd, 5> x;
  std::array<Eigen::VectorXd, 4> pre_activation;  // z_t, x[t] = ReLU(z_t)

  const Eigen::VectorXd& output() const { return x[4]; }
};

/// x0_n = real(b_n^H C b_n).
Eigen::VectorXd encode(const Eigen::MatrixXcd& csm, const LamBandModel& band);

/// "Same" cross-correlation with zero padding: y_i = sum_j k_j x_{i+j-h},
/// h = (len(k) - 1) / 2. Runs over the tessellation index order.
Eigen::VectorXd conv_same(const Eigen::VectorXd& kernel, const Eigen::VectorXd& x);

/// x_t = ReLU(conv_same(k_t, x_{t-1}) + x_0 + bias_t), t = 1..4.
LatentTrace denoise(const Eigen::VectorXd& x0, const LamBandModel& band);

/// C_hat = A diag(x4) A^H. Rejects entries below -1e-9.
CrossSpectralMatrix decode(const Eigen::VectorXd& x4, const SteeringMatrix& steering);

struct LossTerms {
  double total = 0.0;
  double mse = 0.0;  // (1/M^2) sum |C - C_hat|^2
  double l1 = 0.0;   // ||x4||_1
  double tv = 0.0;   // sum_i sum_{j in N_i} |x4_i - x4_j|
};

/// MSE(C, C_hat) + gamma (||x4||_1 + TV(x4)), gamma > 0.
LossTerms loss(const Eigen::MatrixXcd& csm, const Eigen::MatrixXcd& reconstruction,
               const Eigen::VectorXd& x4, double gamma,
               const std::vector<std::vector<int>>& neighbors);

/// Loss of one CSM plus its gradient with respect to every band parameter.
struct BandLossGradient {
  LossTerms terms;
  LamBandModel gradient;
};

BandLossGradient loss_and_gradient(const Eigen::MatrixXcd& csm, const LamBandModel& band,
                                   const SteeringMatrix& steering, double gamma,
                                   const std::vector<std::vector<int>>& neighbors);

/// Loss only (same value as loss_and_gradient().terms).
LossTerms evaluate_loss(const Eigen::MatrixXcd& csm, const LamBandModel& band,
                        const SteeringMatrix& steering, double gamma,
                        const std::vector<std::vector<int>>& neighbors);

/// Full multi-band model with its fixed physical operators.
struct LamModel {
  std::string geometry_name;
  Eigen::Matrix3Xd positions;
  Tessellation tess;
  int k_neighbors = 6;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::vector<LamBandModel> bands;
  std::vector<SteeringMatrix> steering;

  int band_count() const { return static_cast<int>(bands.size()); }
  int channels() const { return static_cast<int>(positions.cols()); }
  std::vector<double> band_freqs() const;
  /// Index of the band at `band_hz` (1e-6 Hz tolerance), or -1.
  int find_band(double band_hz) const;
};

LamModel init_model(const ArrayGeometry& geometry, int n_points, int k_neighbors,
                    const std::vector<double>& band_freqs, double speed_of_sound,
                    std::uint64_t seed);

struct ForwardResult {
  MapSequence maps;                               // x4 per window/band
  std::vector<std::vector<LatentTrace>> traces;   // filled when requested
};

/// encode -> denoise for every window and band, in parallel.
ForwardResult forward(const CsmSequence& seq, const LamModel& model, bool keep_trace = false);

namespace serial {
ForwardResult forward(const CsmSequence& seq, const LamModel& model, bool keep_trace = false);
}  // namespace serial

}  // namespace lam

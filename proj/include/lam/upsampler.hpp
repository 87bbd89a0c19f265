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
#include <vector>

#include <Eigen/Core>

#include "lam/dsp.hpp"

namespace lam {

/// Per-band complex linear map vec(C_low) -> vec(C_high), fitted by ridge
/// least squares on paired CSMs recorded from the same scenes.
struct LearnedUpsampler {
  int channels_in = 0;
  int channels_out = 0;
  std::vector<double> band_freqs;
  std::vector<Eigen::MatrixXcd> maps;  // per band, (M_out^2) x (M_in^2)

  int bands() const { return static_cast<int>(band_freqs.size()); }
  /// Index of the band whose frequency matches `band_hz` within 1e-6 Hz.
  int band_index(double band_hz) const;
};

struct CsmPair {
  Eigen::MatrixXcd low;
  Eigen::MatrixXcd high;
};

/// `pairs[f]` holds training pairs for band f. `ridge` is relative to the mean
/// input energy.
LearnedUpsampler fit_upsampler(const std::vector<double>& band_freqs,
                               const std::vector<std::vector<CsmPair>>& pairs,
                               double ridge = 1e-6);

/// Untrained map (all zeros); its reconstruction error is exactly 1.
LearnedUpsampler zero_upsampler(int channels_in, int channels_out,
                                const std::vector<double>& band_freqs);

/// Applies the band's map, Hermitian-symmetrizes, then clips negative
/// eigenvalues.
CrossSpectralMatrix upsample_csm(const CrossSpectralMatrix& low, const LearnedUpsampler& up);

CsmSequence upsample_sequence(const CsmSequence& low, const LearnedUpsampler& up);

/// ||C_hat - C|| / ||C|| (Frobenius).
double relative_frobenius_error(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth);

/// "LAMU" | version u16 | M_in u16 | M_out u16 | F u16 | band_freqs F x f64 |
/// per band the map as column-major complex128 (re, im f64 pairs).
void save_upsampler(const LearnedUpsampler& up, const std::filesystem::path& path);
LearnedUpsampler load_upsampler(const std::filesystem::path& path);

}  // namespace lam

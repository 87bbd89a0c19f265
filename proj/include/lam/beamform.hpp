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

#include <vector>

#include <Eigen/Core>

#include "lam/dsp.hpp"
#include "lam/geometry.hpp"

namespace lam {

/// Nonnegative intensity per tessellation node for one band.
struct SphericalAcousticMap {
  Eigen::VectorXd intensities;
  double band_hz = 0.0;

  int size() const { return static_cast<int>(intensities.size()); }
};

/// Maps indexed [window][band].
using MapSequence = std::vector<std::vector<SphericalAcousticMap>>;

/// Delay-and-sum image: real(a_n^H C a_n), negatives zeroed.
SphericalAcousticMap das_map(const CrossSpectralMatrix& csm, const SteeringMatrix& steering);

inline constexpr double kMusicEpsilon = 1e-12;

/// MUSIC pseudo-spectrum 1 / (a_n^H E E^H a_n + eps), where E spans the
/// eigenvectors of the M - n_sources smallest eigenvalues. Eigenvalues tied
/// (within 1e-9 relative) with the largest noise eigenvalue join the noise
/// subspace, so an isotropic C yields a flat spectrum.
SphericalAcousticMap music_spectrum(const CrossSpectralMatrix& csm, const SteeringMatrix& steering,
                                    int n_sources);

/// Per-window, per-band maps; `steering[f]` must match seq band f.
MapSequence das_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering);
MapSequence music_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering,
                       int n_sources);

namespace serial {
MapSequence das_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering);
MapSequence music_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering,
                       int n_sources);
}  // namespace serial

/// Steering matrices for every band of a sequence.
std::vector<SteeringMatrix> steering_for_bands(const Eigen::Matrix3Xd& positions,
                                               const Tessellation& tess,
                                               const std::vector<double>& band_freqs,
                                               double speed_of_sound);

/// Sum over bands of min-max normalized maps (constant bands contribute 0).
Eigen::VectorXd fuse_bands(const std::vector<SphericalAcousticMap>& bands);

}  // namespace lam

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

#include "lam/beamform.hpp"

#include <algorithm>

#include "lam/linalg.hpp"

namespace lam {
namespace {

void check_dims(const CrossSpectralMatrix& csm, const SteeringMatrix& steering) {
  if (csm.entries.rows() != csm.entries.cols() || csm.channels() != steering.channels()) {
    throw ConfigError("beamform: CSM has " + std::to_string(csm.channels()) +
                      " channels but steering matrix has " +
                      std::to_string(steering.channels()));
  }
}

void check_bands(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering) {
  if (static_cast<int>(steering.size()) != seq.bands()) {
    throw ConfigError("beamform: band count mismatch between sequence and steering");
  }
}

}  // namespace

SphericalAcousticMap das_map(const CrossSpectralMatrix& csm, const SteeringMatrix& steering) {
  check_dims(csm, steering);
  const Eigen::MatrixXcd& a = steering.entries;
  const Eigen::MatrixXcd ca = csm.entries * a;
  SphericalAcousticMap map;
  map.band_hz = csm.band_hz;
  map.intensities = (a.conjugate().cwiseProduct(ca)).colwise().sum().real().transpose();
  map.intensities = map.intensities.cwiseMax(0.0);
  return map;
}

SphericalAcousticMap music_spectrum(const CrossSpectralMatrix& csm, const SteeringMatrix& steering,
                                    int n_sources) {
  check_dims(csm, steering);
  const int m = csm.channels();
  if (n_sources < 1 || n_sources >= m) {
    throw ConfigError("music: n_sources must be in [1, M-1], got " + std::to_string(n_sources));
  }
  const HermitianEigen eig = hermitian_eigen(csm.entries);
  // Descending order: noise subspace starts at index n_sources, extended over ties.
  const double scale = std::max(std::abs(eig.values(0)), 1e-300);
  const double boundary = eig.values(n_sources);
  int first_noise = n_sources;
  while (first_noise > 0 && eig.values(first_noise - 1) - boundary <= 1e-9 * scale) {
    --first_noise;
  }
  const Eigen::MatrixXcd noise = eig.vectors.rightCols(m - first_noise);
  const Eigen::MatrixXcd proj = noise.adjoint() * steering.entries;
  SphericalAcousticMap map;
  map.band_hz = csm.band_hz;
  map.intensities =
      (proj.colwise().squaredNorm().transpose().array() + kMusicEpsilon).inverse().matrix();
  return map;
}

MapSequence das_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering) {
  check_bands(seq, steering);
  MapSequence out(seq.window_count(), std::vector<SphericalAcousticMap>(seq.bands()));
#pragma omp parallel for collapse(2) schedule(static)
  for (int w = 0; w < seq.window_count(); ++w) {
    for (int f = 0; f < seq.bands(); ++f) out[w][f] = das_map(seq.windows[w][f], steering[f]);
  }
  return out;
}

MapSequence music_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering,
                       int n_sources) {
  check_bands(seq, steering);
  MapSequence out(seq.window_count(), std::vector<SphericalAcousticMap>(seq.bands()));
#pragma omp parallel for collapse(2) schedule(static)
  for (int w = 0; w < seq.window_count(); ++w) {
    for (int f = 0; f < seq.bands(); ++f) {
      out[w][f] = music_spectrum(seq.windows[w][f], steering[f], n_sources);
    }
  }
  return out;
}

namespace serial {

MapSequence das_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering) {
  check_bands(seq, steering);
  MapSequence out(seq.window_count());
  for (int w = 0; w < seq.window_count(); ++w) {
    for (int f = 0; f < seq.bands(); ++f) out[w].push_back(das_map(seq.windows[w][f], steering[f]));
  }
  return out;
}

MapSequence music_maps(const CsmSequence& seq, const std::vector<SteeringMatrix>& steering,
                       int n_sources) {
  check_bands(seq, steering);
  MapSequence out(seq.window_count());
  for (int w = 0; w < seq.window_count(); ++w) {
    for (int f = 0; f < seq.bands(); ++f) {
      out[w].push_back(music_spectrum(seq.windows[w][f], steering[f], n_sources));
    }
  }
  return out;
}

}  // namespace serial

std::vector<SteeringMatrix> steering_for_bands(const Eigen::Matrix3Xd& positions,
                                               const Tessellation& tess,
                                               const std::vector<double>& band_freqs,
                                               double speed_of_sound) {
  std::vector<SteeringMatrix> out;
  for (double f : band_freqs) out.push_back(steering_matrix(positions, tess, f, speed_of_sound));
  return out;
}

Eigen::VectorXd fuse_bands(const std::vector<SphericalAcousticMap>& bands) {
  if (bands.empty()) return {};
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(bands.front().size());
  for (const auto& b : bands) {
    const double lo = b.intensities.minCoeff();
    const double hi = b.intensities.maxCoeff();
    if (hi > lo) sum.array() += (b.intensities.array() - lo) / (hi - lo);
  }
  return sum;
}

}  // namespace lam

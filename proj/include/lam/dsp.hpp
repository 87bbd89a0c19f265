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

#include "lam/common.hpp"

namespace lam {

/// M x T real samples, nominally in [-1, 1].
struct MultichannelAudio {
  Eigen::MatrixXd samples;
  double sample_rate = 0.0;

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index length() const { return samples.cols(); }
};

/// Complex STFT. `bins[k]` holds an M x frames matrix for frequency bin k, so a
/// column is the array snapshot Y(n, k).
struct StftTensor {
  std::vector<Eigen::MatrixXcd> bins;
  std::vector<double> frame_times;  // seconds, frame centers
  std::vector<double> bin_freqs;    // Hz, 0 .. fs/2
  int window_len = 0;
  int hop = 0;

  int channels() const { return bins.empty() ? 0 : static_cast<int>(bins.front().rows()); }
  int frames() const { return static_cast<int>(frame_times.size()); }
  Eigen::VectorXcd snapshot(int frame, int bin) const { return bins[bin].col(frame); }
};

/// Hann-windowed one-sided STFT. Frame n covers samples [n*hop, n*hop + window_len).
///
/// The analysis kernel is exp(+j 2 pi k t / L). With that sign a far-field plane
/// wave arriving from direction r gives snapshots proportional to the steering
/// vector a(r) = exp(-j k p . r), which is the convention every imaging routine
/// here relies on.
StftTensor stft(const MultichannelAudio& audio, int window_len, int hop);

/// Periodic Hann window of length n.
Eigen::VectorXd hann_window(int n);

struct BandSelection {
  std::vector<double> targets;  // Hz, linearly spaced
  std::vector<int> bins;        // nearest STFT bin per target
  bool has_duplicates = false;
};

/// Nearest-bin lookup for n_bands linearly spaced targets in [f_lo, f_hi].
BandSelection band_bins(const std::vector<double>& bin_freqs, double f_lo, double f_hi,
                        int n_bands);

struct CrossSpectralMatrix {
  Eigen::MatrixXcd entries;
  double band_hz = 0.0;
  int n_frames_averaged = 0;
  double timestamp = 0.0;  // seconds, window center

  int channels() const { return static_cast<int>(entries.rows()); }
};

/// C = (1/N) sum_n Y(n,k) Y(n,k)^H over frames [first, first + count), optionally
/// averaged over bins k-halfwidth .. k+halfwidth.
CrossSpectralMatrix csm(const StftTensor& stft, int bin, int first_frame, int frame_count,
                        int bin_halfwidth = 0);

struct CsmConfig {
  int window_len = 1024;
  int hop = 512;
  int frames_per_csm = 10;
  double f_lo = 1500.0;
  double f_hi = 4500.0;
  int n_bands = 9;
  int bin_halfwidth = 0;
};

/// F bands x W windows of CSMs. `windows[w][f]`.
struct CsmSequence {
  int channels = 0;
  double sample_rate = 0.0;
  std::vector<double> band_freqs;
  std::vector<std::vector<CrossSpectralMatrix>> windows;

  int bands() const { return static_cast<int>(band_freqs.size()); }
  int window_count() const { return static_cast<int>(windows.size()); }
  /// Appends the windows of `other`; band layout and channel count must agree.
  void append(const CsmSequence& other);
  /// Keeps only the listed band indices.
  CsmSequence select_bands(const std::vector<int>& band_indices) const;
};

/// Tiles the recording into consecutive groups of frames_per_csm STFT frames and
/// computes one CSM per band per group. A short tail group is dropped. Windows
/// and bands are computed in parallel.
CsmSequence csm_sequence(const MultichannelAudio& audio, const CsmConfig& cfg);

namespace serial {
/// Reference single-threaded version of lam::csm_sequence.
CsmSequence csm_sequence(const MultichannelAudio& audio, const CsmConfig& cfg);
}  // namespace serial

}  // namespace lam

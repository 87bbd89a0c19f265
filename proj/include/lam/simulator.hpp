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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lam/dsp.hpp"
#include "lam/geometry.hpp"

namespace lam {

struct DirectionBreakpoint {
  double time = 0.0;  // seconds
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
};

/// Mono source with a piecewise-constant direction track: the direction at time
/// t is the one of the last breakpoint with time <= t.
struct SourceTrajectory {
  std::vector<double> waveform;
  double sample_rate = 0.0;
  std::vector<DirectionBreakpoint> track;
  double gain = 1.0;

  Eigen::Vector3d direction_at(double t) const;
};

struct SceneSpec {
  std::vector<SourceTrajectory> sources;
  double duration = 1.0;
  double snr_db = std::numeric_limits<double>::infinity();
  ArrayGeometry geometry = ArrayGeometry::builtin("em32");
  std::uint64_t seed = 0;
  double speed_of_sound = kDefaultSpeedOfSound;
  double label_frame = 0.1;       // seconds
  double crossfade = 0.010;       // seconds, at direction changes
};

struct ActiveSource {
  int source_id = 0;
  Eigen::Vector3d direction;
};

/// Active sources per label frame; frame i covers [i, i+1) * frame_length.
struct GroundTruth {
  double frame_length = 0.1;
  std::vector<std::vector<ActiveSource>> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

struct RenderedScene {
  MultichannelAudio audio;
  GroundTruth truth;
  double noise_power = 0.0;   // per-sample variance of the added noise
  double signal_power = 0.0;  // mean per-sample power of the summed sources
};

/// Far-field plane-wave rendering. Channel m receives each source delayed by
/// tau_m = -(p_m . r) / c (fractional delays applied as frequency-domain phase
/// ramps per constant-direction segment); white Gaussian noise sets the SNR
/// against the summed source power. Deterministic given spec.seed.
RenderedScene render_scene(const SceneSpec& spec);

/// Ground truth only (no audio), frame grid covering [0, duration).
GroundTruth scene_ground_truth(const SceneSpec& spec);

enum class WaveformKind { kWhiteNoise, kSpeechShaped, kAmTones };

WaveformKind parse_waveform_kind(const std::string& name);
std::string to_string(WaveformKind kind);

/// Bundled source generators, RMS-normalized to `rms`.
std::vector<double> generate_waveform(WaveformKind kind, std::size_t samples, double sample_rate,
                                      std::uint64_t seed, double rms = 0.1);

/// Model CSM sum_s p_s a(r_s) a(r_s)^H + noise_power I, with steering vectors in
/// the same convention as steering_matrix.
Eigen::MatrixXcd synthetic_csm(const Eigen::Matrix3Xd& positions,
                               const std::vector<Eigen::Vector3d>& directions,
                               const std::vector<double>& powers, double noise_power,
                               double band_hz, double speed_of_sound = kDefaultSpeedOfSound);

/// Uniformly distributed unit vector.
Eigen::Vector3d random_direction(std::uint64_t seed);

// Ground-truth CSV: "frame_index,source_id,azimuth_deg,elevation_deg" preceded by
// a "# n_frames=<count>" comment line.
void write_ground_truth_csv(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth_csv(const std::filesystem::path& path, double frame_length = 0.1);

}  // namespace lam

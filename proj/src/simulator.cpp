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

#include "lam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "lam/io_util.hpp"

namespace lam {
namespace {

int frame_count_for(double duration, double frame_length) {
  return std::max(1, static_cast<int>(std::ceil(duration / frame_length - 1e-9)));
}

void validate(const SceneSpec& spec) {
  if (!(spec.duration > 0.0)) throw ConfigError("scene: duration must be positive");
  if (spec.sources.empty() || spec.sources.size() > 8) {
    throw ConfigError("scene: between 1 and 8 sources are required");
  }
  if (!(spec.label_frame > 0.0)) throw ConfigError("scene: label_frame must be positive");
  if (!(spec.speed_of_sound > 0.0)) throw ConfigError("scene: speed_of_sound must be positive");
  const double fs = spec.sources.front().sample_rate;
  if (!(fs > 0.0)) throw ConfigError("scene: source sample_rate must be positive");
  const auto needed = static_cast<std::size_t>(std::llround(spec.duration * fs));
  for (const auto& s : spec.sources) {
    if (s.sample_rate != fs) throw ConfigError("scene: all sources must share a sample rate");
    if (s.waveform.size() < needed) throw ConfigError("scene: source waveform shorter than scene");
    if (s.track.empty() || s.track.front().time > 0.0) {
      throw ConfigError("scene: direction track must cover [0, duration)");
    }
    for (size_t i = 0; i < s.track.size(); ++i) {
      if (std::abs(s.track[i].direction.norm() - 1.0) > 1e-6) {
        throw ConfigError("scene: track directions must be unit vectors");
      }
      if (i > 0 && !(s.track[i].time > s.track[i - 1].time)) {
        throw ConfigError("scene: track breakpoint times must be strictly increasing");
      }
    }
    if (!(s.gain >= 0.0) || !std::isfinite(s.gain)) throw ConfigError("scene: gain must be >= 0");
  }
}

struct Run {
  Eigen::Index begin = 0;  // samples, before crossfade extension
  Eigen::Index end = 0;
  Eigen::Vector3d direction;
};

// Consecutive label frames with identical direction merge into one run.
std::vector<Run> direction_runs(const SourceTrajectory& src, const SceneSpec& spec,
                                Eigen::Index total) {
  const double fs = src.sample_rate;
  const int frames = frame_count_for(spec.duration, spec.label_frame);
  std::vector<Run> runs;
  for (int i = 0; i < frames; ++i) {
    const Eigen::Vector3d dir = src.direction_at(i * spec.label_frame);
    const auto b = std::min<Eigen::Index>(total, std::llround(i * spec.label_frame * fs));
    const auto e = std::min<Eigen::Index>(total, std::llround((i + 1) * spec.label_frame * fs));
    if (!runs.empty() && runs.back().direction == dir) {
      runs.back().end = e;
    } else {
      runs.push_back({b, e, dir});
    }
  }
  runs.back().end = total;
  return runs;
}

// Crossfade weight of a run at sample t; ramps are centered on run boundaries.
double run_weight(const Run& run, Eigen::Index t, Eigen::Index half, bool first, bool last) {
  auto ramp = [&](Eigen::Index boundary) {
    // 0 before boundary - half, 1 after boundary + half.
    if (half == 0) return t >= boundary ? 1.0 : 0.0;
    const double x = (static_cast<double>(t - boundary) + half) / (2.0 * half);
    return std::clamp(x, 0.0, 1.0);
  };
  const double up = first ? 1.0 : ramp(run.begin);
  const double down = last ? 1.0 : 1.0 - ramp(run.end);
  return up * down;
}

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Renders one source with unit gain into `out` (M x T), accumulating.
void render_source(const SourceTrajectory& src, const SceneSpec& spec, Eigen::MatrixXd& out) {
  const Eigen::Index total = out.cols();
  const double fs = src.sample_rate;
  const auto& pos = spec.geometry.positions();
  const int m_count = spec.geometry.channels();
  const double max_delay = pos.colwise().norm().maxCoeff() / spec.speed_of_sound * fs;
  const Eigen::Index pad = 64 + static_cast<Eigen::Index>(std::ceil(max_delay));
  const Eigen::Index half = std::llround(0.5 * spec.crossfade * fs);

  const std::vector<Run> runs = direction_runs(src, spec, total);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  for (size_t r = 0; r < runs.size(); ++r) {
    const Run& run = runs[r];
    const bool first = r == 0;
    const bool last = r + 1 == runs.size();
    const Eigen::Index region_begin = first ? 0 : std::max<Eigen::Index>(0, run.begin - half);
    const Eigen::Index region_end = last ? total : std::min(total, run.end + half);
    if (region_end <= region_begin) continue;
    const Eigen::Index len = next_pow2(region_end - region_begin + 2 * pad);
    const Eigen::Index offset = region_begin - pad;  // sample index of buffer position 0

    std::vector<double> buf(len, 0.0);
    for (Eigen::Index i = 0; i < len; ++i) {
      const Eigen::Index t = offset + i;
      if (t >= 0 && t < static_cast<Eigen::Index>(src.waveform.size())) buf[i] = src.waveform[t];
    }
    std::vector<cplx> spectrum;
    fft.fwd(spectrum, buf);
    std::vector<cplx> shifted(spectrum.size());
    std::vector<double> delayed;
    for (int m = 0; m < m_count; ++m) {
      const double tau = -pos.col(m).dot(run.direction) / spec.speed_of_sound;
      for (size_t k = 0; k < spectrum.size(); ++k) {
        const double f = static_cast<double>(k) * fs / static_cast<double>(len);
        shifted[k] = spectrum[k] * std::polar(1.0, -2.0 * kPi * f * tau);
      }
      fft.inv(delayed, shifted, len);
      for (Eigen::Index t = region_begin; t < region_end; ++t) {
        out(m, t) += run_weight(run, t, half, first, last) * delayed[t - offset];
      }
    }
  }
}

}  // namespace

Eigen::Vector3d SourceTrajectory::direction_at(double t) const {
  Eigen::Vector3d dir = track.front().direction;
  for (const auto& bp : track) {
    if (bp.time <= t) dir = bp.direction;
    else break;
  }
  return dir;
}

GroundTruth scene_ground_truth(const SceneSpec& spec) {
  GroundTruth truth;
  truth.frame_length = spec.label_frame;
  truth.frames.resize(frame_count_for(spec.duration, spec.label_frame));
  for (size_t i = 0; i < truth.frames.size(); ++i) {
    for (size_t s = 0; s < spec.sources.size(); ++s) {
      if (spec.sources[s].gain <= 0.0) continue;
      truth.frames[i].push_back(
          {static_cast<int>(s), spec.sources[s].direction_at(i * spec.label_frame).normalized()});
    }
  }
  return truth;
}

RenderedScene render_scene(const SceneSpec& spec) {
  validate(spec);
  const double fs = spec.sources.front().sample_rate;
  const auto total = static_cast<Eigen::Index>(std::llround(spec.duration * fs));
  const int m_count = spec.geometry.channels();

  RenderedScene scene;
  scene.audio.sample_rate = fs;
  scene.audio.samples = Eigen::MatrixXd::Zero(m_count, total);
  Eigen::MatrixXd unit_mix = Eigen::MatrixXd::Zero(m_count, total);
  for (const auto& src : spec.sources) {
    Eigen::MatrixXd single = Eigen::MatrixXd::Zero(m_count, total);
    render_source(src, spec, single);
    scene.audio.samples += src.gain * single;
    unit_mix += single;
  }
  scene.signal_power = scene.audio.samples.squaredNorm() / static_cast<double>(m_count * total);

  if (std::isfinite(spec.snr_db)) {
    // Silent mixes (all gains zero) take the noise level from the unit-gain mix.
    const double reference = scene.signal_power > 0.0
                                 ? scene.signal_power
                                 : unit_mix.squaredNorm() / static_cast<double>(m_count * total);
    scene.noise_power = reference / std::pow(10.0, spec.snr_db / 10.0);
    std::mt19937_64 rng(derive_seed(spec.seed, 0x6e6f697365ull));
    std::normal_distribution<double> normal(0.0, std::sqrt(scene.noise_power));
    for (Eigen::Index t = 0; t < total; ++t) {
      for (int m = 0; m < m_count; ++m) scene.audio.samples(m, t) += normal(rng);
    }
  }
  scene.truth = scene_ground_truth(spec);
  return scene;
}

WaveformKind parse_waveform_kind(const std::string& name) {
  if (name == "white") return WaveformKind::kWhiteNoise;
  if (name == "speech") return WaveformKind::kSpeechShaped;
  if (name == "am") return WaveformKind::kAmTones;
  throw ConfigError("waveform: unknown kind '" + name + "' (white, speech, am)");
}

std::string to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::kWhiteNoise: return "white";
    case WaveformKind::kSpeechShaped: return "speech";
    case WaveformKind::kAmTones: return "am";
  }
  return "white";
}

std::vector<double> generate_waveform(WaveformKind kind, std::size_t samples, double sample_rate,
                                      std::uint64_t seed, double rms) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(samples, 0.0);
  switch (kind) {
    case WaveformKind::kWhiteNoise:
      for (auto& x : w) x = normal(rng);
      break;
    case WaveformKind::kSpeechShaped: {
      // Leaky integrator: -6 dB/octave above ~150 Hz at 48 kHz.
      double state = 0.0;
      for (auto& x : w) {
        state = normal(rng) + 0.98 * state;
        x = state;
      }
      break;
    }
    case WaveformKind::kAmTones: {
      std::uniform_real_distribution<double> freq(300.0, 4000.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      for (int tone = 0; tone < 5; ++tone) {
        const double f = freq(rng);
        const double p = phase(rng);
        const double pm = phase(rng);
        for (std::size_t t = 0; t < samples; ++t) {
          const double time = static_cast<double>(t) / sample_rate;
          w[t] += (1.0 + 0.5 * std::sin(2.0 * kPi * 4.0 * time + pm)) *
                  std::sin(2.0 * kPi * f * time + p);
        }
      }
      break;
    }
  }
  double energy = 0.0;
  for (double x : w) energy += x * x;
  if (energy > 0.0) {
    const double scale = rms / std::sqrt(energy / static_cast<double>(samples));
    for (auto& x : w) x *= scale;
  }
  return w;
}

Eigen::Vector3d random_direction(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> phi(0.0, 2.0 * kPi);
  const double z = u(rng);
  const double p = phi(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Eigen::Vector3d(r * std::cos(p), r * std::sin(p), z).normalized();
}

Eigen::MatrixXcd synthetic_csm(const Eigen::Matrix3Xd& positions,
                               const std::vector<Eigen::Vector3d>& directions,
                               const std::vector<double>& powers, double noise_power,
                               double band_hz, double speed_of_sound) {
  if (directions.size() != powers.size()) {
    throw ConfigError("synthetic_csm: directions and powers differ in length");
  }
  const Eigen::Index m = positions.cols();
  Eigen::MatrixXcd c = noise_power * Eigen::MatrixXcd::Identity(m, m);
  for (size_t s = 0; s < directions.size(); ++s) {
    const Eigen::VectorXcd a = steering_vector(positions, directions[s], band_hz, speed_of_sound);
    c += powers[s] * a * a.adjoint();
  }
  return c;
}

void write_ground_truth_csv(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# n_frames=" << truth.frame_count() << "\n";
  out << "frame_index,source_id,azimuth_deg,elevation_deg\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (int i = 0; i < truth.frame_count(); ++i) {
    for (const auto& s : truth.frames[i]) {
      const AzEl ae = to_azel(s.direction);
      out << i << "," << s.source_id << "," << ae.azimuth_deg << "," << ae.elevation_deg << "\n";
    }
  }
  write_file_atomic(path, out.str());
}

GroundTruth read_ground_truth_csv(const std::filesystem::path& path, double frame_length) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth " + path.string());
  GroundTruth truth;
  truth.frame_length = frame_length;
  int declared = -1;
  std::string line;
  int max_frame = -1;
  std::vector<std::pair<int, ActiveSource>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("n_frames=");
      if (pos != std::string::npos) declared = std::stoi(line.substr(pos + 9));
      continue;
    }
    if (line.rfind("frame_index", 0) == 0) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 4) throw IoError(path.string() + ": malformed row '" + line + "'");
    const int frame = static_cast<int>(v[0]);
    max_frame = std::max(max_frame, frame);
    rows.push_back({frame, {static_cast<int>(v[1]), from_azel(v[2], v[3])}});
  }
  const int frames = declared >= 0 ? declared : max_frame + 1;
  if (max_frame >= frames) throw IoError(path.string() + ": frame index beyond n_frames");
  truth.frames.resize(std::max(0, frames));
  for (const auto& [frame, src] : rows) truth.frames[frame].push_back(src);
  return truth;
}

}  // namespace lam

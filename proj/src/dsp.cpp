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

#include "lam/dsp.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace lam {

Eigen::VectorXd hann_window(int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

StftTensor stft(const MultichannelAudio& audio, int window_len, int hop) {
  if (window_len < 2) throw ConfigError("stft: window_len must be >= 2");
  if (hop < 1) throw ConfigError("stft: hop must be >= 1");
  if (audio.channels() < 1) throw ConfigError("stft: audio has no channels");
  if (audio.length() < window_len) {
    throw ConfigError("stft: audio shorter than one analysis window");
  }
  if (!audio.samples.allFinite()) throw NumericError("stft: non-finite audio samples");

  const int frames = static_cast<int>((audio.length() - window_len) / hop) + 1;
  const int n_bins = window_len / 2 + 1;
  StftTensor out;
  out.window_len = window_len;
  out.hop = hop;
  out.bins.assign(n_bins, Eigen::MatrixXcd(audio.channels(), frames));
  out.frame_times.resize(frames);
  out.bin_freqs.resize(n_bins);
  for (int n = 0; n < frames; ++n) {
    out.frame_times[n] = (static_cast<double>(n) * hop + 0.5 * window_len) / audio.sample_rate;
  }
  for (int k = 0; k < n_bins; ++k) out.bin_freqs[k] = k * audio.sample_rate / window_len;

  const Eigen::VectorXd window = hann_window(window_len);
#pragma omp parallel
  {
    Eigen::FFT<double> fft;
    std::vector<double> frame(window_len);
    std::vector<cplx> spectrum;
#pragma omp for collapse(2) schedule(static)
    for (int m = 0; m < audio.channels(); ++m) {
      for (int n = 0; n < frames; ++n) {
        const Eigen::Index start = static_cast<Eigen::Index>(n) * hop;
        for (int i = 0; i < window_len; ++i) frame[i] = audio.samples(m, start + i) * window(i);
        fft.fwd(spectrum, frame);
        // Conjugate of the usual e^{-j} kernel; see header.
        for (int k = 0; k < n_bins; ++k) out.bins[k](m, n) = std::conj(spectrum[k]);
      }
    }
  }
  return out;
}

BandSelection band_bins(const std::vector<double>& bin_freqs, double f_lo, double f_hi,
                        int n_bands) {
  if (bin_freqs.size() < 2) throw ConfigError("bands: need at least two STFT bins");
  if (n_bands < 1) throw ConfigError("bands: n_bands must be >= 1");
  if (!(f_lo < f_hi) && n_bands > 1) throw ConfigError("bands: f_lo must be below f_hi");
  if (f_lo < 0.0) throw ConfigError("bands: f_lo must be nonnegative");
  if (f_hi > bin_freqs.back() + 1e-9) {
    throw ConfigError("bands: f_hi above the Nyquist frequency");
  }
  BandSelection sel;
  for (int b = 0; b < n_bands; ++b) {
    const double target =
        n_bands == 1 ? f_lo : f_lo + (f_hi - f_lo) * static_cast<double>(b) / (n_bands - 1);
    sel.targets.push_back(target);
    int best = 0;
    for (int k = 1; k < static_cast<int>(bin_freqs.size()); ++k) {
      if (std::abs(bin_freqs[k] - target) < std::abs(bin_freqs[best] - target)) best = k;
    }
    if (std::find(sel.bins.begin(), sel.bins.end(), best) != sel.bins.end()) {
      sel.has_duplicates = true;
    }
    sel.bins.push_back(best);
  }
  return sel;
}

CrossSpectralMatrix csm(const StftTensor& stft, int bin, int first_frame, int frame_count,
                        int bin_halfwidth) {
  if (frame_count < 1) throw ConfigError("csm: empty frame range");
  if (first_frame < 0 || first_frame + frame_count > stft.frames()) {
    throw ConfigError("csm: frame range outside the STFT");
  }
  const int lo = bin - bin_halfwidth;
  const int hi = bin + bin_halfwidth;
  if (bin_halfwidth < 0 || lo < 0 || hi >= static_cast<int>(stft.bins.size())) {
    throw ConfigError("csm: bin range outside the STFT");
  }
  CrossSpectralMatrix c;
  const int m = stft.channels();
  c.entries = Eigen::MatrixXcd::Zero(m, m);
  for (int k = lo; k <= hi; ++k) {
    const auto block = stft.bins[k].middleCols(first_frame, frame_count);
    c.entries.noalias() += block * block.adjoint();
  }
  c.entries /= static_cast<double>(frame_count) * (hi - lo + 1);
  c.band_hz = stft.bin_freqs[bin];
  c.n_frames_averaged = frame_count;
  c.timestamp = 0.5 * (stft.frame_times[first_frame] +
                       stft.frame_times[first_frame + frame_count - 1]);
  return c;
}

void CsmSequence::append(const CsmSequence& other) {
  if (windows.empty() && band_freqs.empty()) {
    *this = other;
    return;
  }
  if (other.channels != channels || other.band_freqs != band_freqs) {
    throw ConfigError("csm sequence: band layout or channel count mismatch");
  }
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
}

CsmSequence CsmSequence::select_bands(const std::vector<int>& band_indices) const {
  CsmSequence out;
  out.channels = channels;
  out.sample_rate = sample_rate;
  for (int b : band_indices) {
    if (b < 0 || b >= bands()) throw ConfigError("csm sequence: band index out of range");
    out.band_freqs.push_back(band_freqs[b]);
  }
  for (const auto& w : windows) {
    std::vector<CrossSpectralMatrix> row;
    for (int b : band_indices) row.push_back(w[b]);
    out.windows.push_back(std::move(row));
  }
  return out;
}

namespace {

struct SequencePlan {
  StftTensor spectrum;
  BandSelection bands;
  int window_count = 0;
};

SequencePlan plan(const MultichannelAudio& audio, const CsmConfig& cfg) {
  if (cfg.frames_per_csm < 1) throw ConfigError("csm: frames_per_csm must be >= 1");
  SequencePlan p{stft(audio, cfg.window_len, cfg.hop), {}, 0};
  p.bands = band_bins(p.spectrum.bin_freqs, cfg.f_lo, cfg.f_hi, cfg.n_bands);
  p.window_count = p.spectrum.frames() / cfg.frames_per_csm;
  return p;
}

CsmSequence empty_sequence(const MultichannelAudio& audio, const SequencePlan& p) {
  CsmSequence seq;
  seq.channels = audio.channels();
  seq.sample_rate = audio.sample_rate;
  for (int b : p.bands.bins) seq.band_freqs.push_back(p.spectrum.bin_freqs[b]);
  seq.windows.assign(p.window_count, std::vector<CrossSpectralMatrix>(p.bands.bins.size()));
  return seq;
}

}  // namespace

CsmSequence csm_sequence(const MultichannelAudio& audio, const CsmConfig& cfg) {
  const SequencePlan p = plan(audio, cfg);
  CsmSequence seq = empty_sequence(audio, p);
  const int n_bands = static_cast<int>(p.bands.bins.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (int w = 0; w < p.window_count; ++w) {
    for (int f = 0; f < n_bands; ++f) {
      seq.windows[w][f] = csm(p.spectrum, p.bands.bins[f], w * cfg.frames_per_csm,
                              cfg.frames_per_csm, cfg.bin_halfwidth);
    }
  }
  return seq;
}

namespace serial {

CsmSequence csm_sequence(const MultichannelAudio& audio, const CsmConfig& cfg) {
  const SequencePlan p = plan(audio, cfg);
  CsmSequence seq = empty_sequence(audio, p);
  for (int w = 0; w < p.window_count; ++w) {
    for (size_t f = 0; f < p.bands.bins.size(); ++f) {
      seq.windows[w][f] = csm(p.spectrum, p.bands.bins[f], w * cfg.frames_per_csm,
                              cfg.frames_per_csm, cfg.bin_halfwidth);
    }
  }
  return seq;
}

}  // namespace serial
}  // namespace lam

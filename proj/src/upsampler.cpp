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

#include "lam/upsampler.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "lam/io_util.hpp"
#include "lam/linalg.hpp"

namespace lam {
namespace {

Eigen::VectorXcd vec(const Eigen::MatrixXcd& c) {
  return Eigen::Map<const Eigen::VectorXcd>(c.data(), c.size());
}

}  // namespace

int LearnedUpsampler::band_index(double band_hz) const {
  for (int f = 0; f < bands(); ++f) {
    if (std::abs(band_freqs[f] - band_hz) < 1e-6) return f;
  }
  throw ConfigError("upsampler: no map for band " + std::to_string(band_hz) + " Hz");
}

LearnedUpsampler fit_upsampler(const std::vector<double>& band_freqs,
                               const std::vector<std::vector<CsmPair>>& pairs, double ridge) {
  if (pairs.size() != band_freqs.size()) throw ConfigError("upsampler: band count mismatch");
  LearnedUpsampler up;
  up.band_freqs = band_freqs;
  for (size_t f = 0; f < pairs.size(); ++f) {
    const auto& set = pairs[f];
    if (set.empty()) throw ConfigError("upsampler: no training pairs for a band");
    const int m_in = static_cast<int>(set.front().low.rows());
    const int m_out = static_cast<int>(set.front().high.rows());
    if (f == 0) {
      up.channels_in = m_in;
      up.channels_out = m_out;
    } else if (m_in != up.channels_in || m_out != up.channels_out) {
      throw ConfigError("upsampler: inconsistent channel counts across bands");
    }
    Eigen::MatrixXcd x(m_in * m_in, set.size());
    Eigen::MatrixXcd y(m_out * m_out, set.size());
    for (size_t p = 0; p < set.size(); ++p) {
      if (set[p].low.rows() != m_in || set[p].high.rows() != m_out) {
        throw ConfigError("upsampler: inconsistent pair shapes");
      }
      x.col(static_cast<Eigen::Index>(p)) = vec(set[p].low);
      y.col(static_cast<Eigen::Index>(p)) = vec(set[p].high);
    }
    Eigen::MatrixXcd gram = x * x.adjoint();
    const double lambda = ridge * gram.trace().real() / gram.rows() + 1e-300;
    gram.diagonal().array() += lambda;
    // W gram = Y X^H  <=>  gram^H W^H = X Y^H, gram Hermitian.
    const Eigen::MatrixXcd wt = gram.ldlt().solve(x * y.adjoint());
    up.maps.push_back(wt.adjoint());
  }
  return up;
}

LearnedUpsampler zero_upsampler(int channels_in, int channels_out,
                                const std::vector<double>& band_freqs) {
  LearnedUpsampler up;
  up.channels_in = channels_in;
  up.channels_out = channels_out;
  up.band_freqs = band_freqs;
  for (size_t f = 0; f < band_freqs.size(); ++f) {
    up.maps.push_back(Eigen::MatrixXcd::Zero(channels_out * channels_out,
                                             channels_in * channels_in));
  }
  return up;
}

CrossSpectralMatrix upsample_csm(const CrossSpectralMatrix& low, const LearnedUpsampler& up) {
  if (low.channels() != up.channels_in) throw ConfigError("upsampler: input channel mismatch");
  const int f = up.band_index(low.band_hz);
  const Eigen::VectorXcd out = up.maps[f] * vec(low.entries);
  CrossSpectralMatrix c = low;
  c.entries = project_psd(Eigen::Map<const Eigen::MatrixXcd>(out.data(), up.channels_out,
                                                             up.channels_out));
  return c;
}

CsmSequence upsample_sequence(const CsmSequence& low, const LearnedUpsampler& up) {
  CsmSequence out = low;
  out.channels = up.channels_out;
#pragma omp parallel for collapse(2) schedule(static)
  for (int w = 0; w < low.window_count(); ++w) {
    for (int f = 0; f < low.bands(); ++f) {
      out.windows[w][f] = upsample_csm(low.windows[w][f], up);
    }
  }
  return out;
}

double relative_frobenius_error(const Eigen::MatrixXcd& estimate, const Eigen::MatrixXcd& truth) {
  const double denom = truth.norm();
  if (denom == 0.0) return estimate.norm() == 0.0 ? 0.0 : INFINITY;
  return (estimate - truth).norm() / denom;
}

void save_upsampler(const LearnedUpsampler& up, const std::filesystem::path& path) {
  ByteWriter w;
  w.bytes("LAMU");
  w.u16(1);
  w.u16(static_cast<std::uint16_t>(up.channels_in));
  w.u16(static_cast<std::uint16_t>(up.channels_out));
  w.u16(static_cast<std::uint16_t>(up.bands()));
  for (double f : up.band_freqs) w.f64(f);
  for (const auto& m : up.maps) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      w.f64(m.data()[i].real());
      w.f64(m.data()[i].imag());
    }
  }
  write_file_atomic(path, w.data());
}

LearnedUpsampler load_upsampler(const std::filesystem::path& path) {
  ByteReader r(read_file(path));
  if (r.bytes(4) != "LAMU") throw IoError(path.string() + ": not an upsampler file");
  if (r.u16() != 1) throw IoError(path.string() + ": unsupported upsampler version");
  LearnedUpsampler up;
  up.channels_in = r.u16();
  up.channels_out = r.u16();
  const int bands = r.u16();
  for (int f = 0; f < bands; ++f) up.band_freqs.push_back(r.f64());
  for (int f = 0; f < bands; ++f) {
    Eigen::MatrixXcd m(up.channels_out * up.channels_out, up.channels_in * up.channels_in);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double re = r.f64();
      const double im = r.f64();
      m.data()[i] = cplx(re, im);
    }
    up.maps.push_back(std::move(m));
  }
  return up;
}

}  // namespace lam

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

#include <doctest.h>

#include <cstring>

#include "helpers.hpp"
#include "lam/dsp.hpp"
#include "lam/linalg.hpp"
#include "lam/simulator.hpp"

using namespace lam;

namespace {

MultichannelAudio noise_audio(int m, int t, double fs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  MultichannelAudio a;
  a.sample_rate = fs;
  a.samples.resize(m, t);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < t; ++j) a.samples(i, j) = n(rng);
  }
  return a;
}

bool same_bytes(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(cplx) * static_cast<size_t>(a.size())) == 0;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("hann window is periodic") {
  const Eigen::VectorXd w = hann_window(8);
  CHECK(w(0) == 0.0);
  CHECK(w(4) == doctest::Approx(1.0));
  CHECK(w(2) == doctest::Approx(0.5));
  CHECK(w(6) == doctest::Approx(0.5));
}

TEST_CASE("stft shape and frame grid") {
  const auto a = noise_audio(2, 5000, 48000.0, 1);
  const auto s = stft(a, 1024, 512);
  CHECK(s.frames() == (5000 - 1024) / 512 + 1);
  CHECK(s.bins.size() == 513);
  CHECK(s.channels() == 2);
  CHECK(s.bin_freqs[1] == doctest::Approx(46.875));
  for (size_t k = 1; k < s.bin_freqs.size(); ++k) CHECK(s.bin_freqs[k] > s.bin_freqs[k - 1]);
  CHECK(s.frame_times[0] == doctest::Approx(512.0 / 48000.0));
  CHECK_THROWS_AS(stft(noise_audio(1, 100, 48000.0, 1), 1024, 512), ConfigError);
}

TEST_CASE("stft of a bin-centred sine peaks at its bin") {
  MultichannelAudio a;
  a.sample_rate = 48000.0;
  a.samples.resize(1, 8192);
  const int bin = 64;  // 3000 Hz
  for (int t = 0; t < 8192; ++t) a.samples(0, t) = std::sin(2.0 * kPi * bin * t / 1024.0);
  const auto s = stft(a, 1024, 512);
  for (int n = 0; n < s.frames(); ++n) {
    int best = 0;
    for (size_t k = 0; k < s.bins.size(); ++k) {
      if (std::abs(s.bins[k](0, n)) > std::abs(s.bins[best](0, n))) best = static_cast<int>(k);
    }
    CHECK(best == bin);
  }
}

TEST_CASE("stft of silence is zero") {
  MultichannelAudio a;
  a.sample_rate = 16000.0;
  a.samples = Eigen::MatrixXd::Zero(3, 4096);
  const auto s = stft(a, 512, 256);
  for (const auto& b : s.bins) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parseval per frame") {
  const auto a = noise_audio(2, 6000, 48000.0, 4);
  const int len = 1024;
  const auto s = stft(a, len, 512);
  const Eigen::VectorXd w = hann_window(len);
  for (int m = 0; m < 2; ++m) {
    for (int n = 0; n < s.frames(); ++n) {
      double time_energy = 0.0;
      for (int i = 0; i < len; ++i) time_energy += std::pow(a.samples(m, n * 512 + i) * w(i), 2);
      double spec = std::norm(s.bins[0](m, n)) + std::norm(s.bins[len / 2](m, n));
      for (int k = 1; k < len / 2; ++k) spec += 2.0 * std::norm(s.bins[k](m, n));
      CHECK(std::abs(time_energy - spec / len) <= 1e-6 * time_energy);
    }
  }
}

TEST_CASE("band_bins") {
  std::vector<double> freqs(513);
  for (int k = 0; k < 513; ++k) freqs[k] = k * 48000.0 / 1024.0;
  const auto sel = band_bins(freqs, 1500.0, 4500.0, 9);
  REQUIRE(sel.targets.size() == 9);
  for (int b = 0; b < 9; ++b) CHECK(sel.targets[b] == doctest::Approx(1500.0 + 375.0 * b));
  CHECK(sel.bins.front() == 32);
  CHECK(sel.bins.back() == 96);
  CHECK(!sel.has_duplicates);

  const auto one = band_bins(freqs, 1500.0, 4500.0, 1);
  CHECK(one.bins == std::vector<int>{32});

  const auto dense = band_bins(freqs, 1500.0, 1540.0, 5);
  CHECK(dense.has_duplicates);
  CHECK_THROWS_AS(band_bins(freqs, 1500.0, 30000.0, 3), ConfigError);
}

TEST_CASE("csm equals brute-force outer products") {
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    StftTensor s;
    s.bins = {lamtest::random_complex(3, 7, rng)};
    s.bin_freqs = {1000.0};
    for (int n = 0; n < 7; ++n) s.frame_times.push_back(n * 0.01);
    const auto c = csm(s, 0, 1, 5);
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(3, 3);
    for (int n = 1; n <= 5; ++n) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) ref(i, j) += s.bins[0](i, n) * std::conj(s.bins[0](j, n));
      }
    }
    ref /= 5.0;
    CHECK((c.entries - ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(c.n_frames_averaged == 5);
    CHECK(c.timestamp == doctest::Approx(0.03));

    // Trace identity, Hermitian and PSD invariants.
    double tr = 0.0;
    for (int n = 1; n <= 5; ++n) tr += s.bins[0].col(n).squaredNorm();
    CHECK(std::abs(c.entries.trace().real() - tr / 5.0) <= 1e-10 * tr);
    CHECK((c.entries - c.entries.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 * c.entries.cwiseAbs().maxCoeff());
    const auto eig = hermitian_eigen(c.entries);
    CHECK(eig.values.minCoeff() >= -1e-6 * eig.values.maxCoeff());
  }
}

TEST_CASE("csm single snapshot and coherent plane wave") {
  std::mt19937_64 rng(5);
  StftTensor s;
  const Eigen::VectorXcd v = lamtest::random_complex(4, 1, rng);
  s.bins = {v};
  s.bin_freqs = {500.0};
  s.frame_times = {0.0};
  const auto c = csm(s, 0, 0, 1);
  CHECK((c.entries - v * v.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(c.entries.trace().real() == doctest::Approx(v.squaredNorm()));

  const Eigen::VectorXcd a = steering_vector(lamtest::random_positions(4, rng), Eigen::Vector3d::UnitY(), 2000.0);
  Eigen::MatrixXcd snaps(4, 6);
  double mean_power = 0.0;
  for (int n = 0; n < 6; ++n) {
    const cplx sn = lamtest::random_complex(1, 1, rng)(0, 0);
    snaps.col(n) = a * sn;
    mean_power += std::norm(sn) / 6.0;
  }
  s.bins = {snaps};
  s.frame_times.assign(6, 0.0);
  const auto c2 = csm(s, 0, 0, 6);
  CHECK((c2.entries - mean_power * a * a.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(csm(s, 0, 0, 0), ConfigError);
  CHECK_THROWS_AS(csm(s, 0, 4, 3), ConfigError);
}

TEST_CASE("csm is permutation equivariant") {
  std::mt19937_64 rng(8);
  StftTensor s;
  s.bins = {lamtest::random_complex(4, 5, rng)};
  s.bin_freqs = {1.0};
  s.frame_times.assign(5, 0.0);
  const Eigen::PermutationMatrix<Eigen::Dynamic> perm(Eigen::Vector4i(2, 0, 3, 1));
  StftTensor p = s;
  p.bins[0] = perm * s.bins[0];
  const auto c = csm(s, 0, 0, 5).entries;
  const auto cp = csm(p, 0, 0, 5).entries;
  CHECK((cp - perm * c * perm.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("csm_sequence tiling") {
  const auto a = noise_audio(3, 48000, 48000.0, 2);
  const CsmConfig cfg;
  const auto seq = csm_sequence(a, cfg);
  // 92 STFT frames at 1024/512 over one second -> 9 windows of 10 frames.
  CHECK(seq.window_count() == 9);
  CHECK(seq.bands() == 9);
  CHECK(seq.band_freqs.front() == 1500.0);
  CHECK(seq.band_freqs.back() == 4500.0);
  for (int w = 0; w < seq.window_count(); ++w) {
    CHECK(seq.windows[w][0].timestamp ==
          doctest::Approx((w * 10 * 512 + 4.5 * 512 + 512) / 48000.0));
  }

  SUBCASE("parallel and serial agree byte for byte") {
    const auto ref = serial::csm_sequence(a, cfg);
    REQUIRE(ref.window_count() == seq.window_count());
    for (int w = 0; w < seq.window_count(); ++w) {
      for (int f = 0; f < seq.bands(); ++f) CHECK(same_bytes(seq.windows[w][f].entries, ref.windows[w][f].entries));
    }
  }
  SUBCASE("concatenation concatenates windows") {
    // Window boundaries fall on hop multiples: 10 frames * 512 = 5120 samples.
    MultichannelAudio first = a, second = a;
    first.samples = a.samples.leftCols(5120 * 4 + 512);
    second.samples = a.samples.middleCols(5120 * 4, 48000 - 5120 * 4);
    auto joined = csm_sequence(first, cfg);
    joined.append(csm_sequence(second, cfg));
    const int n1 = csm_sequence(first, cfg).window_count();
    CHECK(n1 == 4);
    for (int w = 0; w < joined.window_count() && w < seq.window_count(); ++w) {
      CHECK((joined.windows[w][3].entries - seq.windows[w][3].entries).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("silence gives zero matrices") {
    MultichannelAudio z = a;
    z.samples.setZero();
    for (const auto& w : csm_sequence(z, cfg).windows) {
      for (const auto& c : w) CHECK(c.entries.cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("select_bands") {
    const auto sub = seq.select_bands({0, 8});
    CHECK(sub.bands() == 2);
    CHECK(sub.band_freqs[1] == 4500.0);
    CHECK_THROWS_AS(seq.select_bands({9}), ConfigError);
  }
}

TEST_CASE("hermitian helpers") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXcd c = lamtest::random_psd(5, rng);
  const auto eig = hermitian_eigen(c);
  for (int i = 1; i < 5; ++i) CHECK(eig.values(i) <= eig.values(i - 1));
  const Eigen::MatrixXcd rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.adjoint();
  CHECK((rebuilt - c).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::MatrixXcd indefinite = c - 0.5 * c.trace().real() * Eigen::MatrixXcd::Identity(5, 5);
  const Eigen::MatrixXcd p = project_psd(indefinite);
  CHECK(hermitian_eigen(p).values.minCoeff() >= -1e-12);
}

}  // TEST_SUITE

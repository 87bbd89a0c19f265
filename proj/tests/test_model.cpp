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
#include "lam/beamform.hpp"
#include "lam/checkpoint.hpp"
#include "lam/model.hpp"

using namespace lam;

namespace {

LamBandModel random_band(int m, int n, std::mt19937_64& rng) {
  LamBandModel b;
  b.back_projection = lamtest::random_complex(m, n, rng);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int t = 0; t < kDenoiseSteps; ++t) {
    b.kernels[t] = Eigen::VectorXd(kKernelSizes[t]);
    for (auto& v : b.kernels[t]) v = g(rng);
    b.biases[t] = g(rng);
  }
  return b;
}

// Column-wise Khatri-Rao product of conj(X) and X: column n is conj(x_n) (x) x_n.
Eigen::MatrixXcd khatri_rao_conj(const Eigen::MatrixXcd& x) {
  const Eigen::Index m = x.rows();
  Eigen::MatrixXcd k(m * m, x.cols());
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) k(j * m + i, n) = std::conj(x(j, n)) * x(i, n);
    }
  }
  return k;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& c) {
  return Eigen::Map<const Eigen::VectorXcd>(c.data(), c.size());
}

std::vector<std::vector<int>> ring(int n) {
  std::vector<std::vector<int>> nb(n);
  for (int i = 0; i < n; ++i) nb[i] = {(i + 1) % n, (i + n - 1) % n};
  return nb;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("encode matches the Khatri-Rao form") {
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const int m = 2 + seed % 4, n = 5 + seed % 9;
    const auto band = random_band(m, n, rng);
    const Eigen::MatrixXcd c = lamtest::random_psd(m, rng);
    const Eigen::VectorXcd ref = khatri_rao_conj(band.back_projection).adjoint() * vec(c);
    const Eigen::VectorXd x0 = encode(c, band);
    CHECK((x0 - ref.real()).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + ref.cwiseAbs().maxCoeff()));
    CHECK(ref.imag().cwiseAbs().maxCoeff() < 1e-10 * (1.0 + ref.cwiseAbs().maxCoeff()));
  }
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(encode(Eigen::MatrixXcd::Identity(3, 3), random_band(4, 6, rng)), ConfigError);
}

TEST_CASE("decode matches both forms") {
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const int m = 2 + seed % 4, n = 4 + seed % 7;
    SteeringMatrix a;
    a.entries = lamtest::random_complex(m, n, rng);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    Eigen::VectorXd x(n);
    for (auto& v : x) v = u(rng);
    const Eigen::MatrixXcd c = decode(x, a).entries;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 0; k < n; ++k) sum += x(k) * a.entries.col(k) * a.entries.col(k).adjoint();
    CHECK((c - sum).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + sum.cwiseAbs().maxCoeff()));
    const Eigen::VectorXcd kr = khatri_rao_conj(a.entries) * x.cast<cplx>();
    CHECK((vec(c) - kr).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + kr.cwiseAbs().maxCoeff()));
    CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + c.cwiseAbs().maxCoeff()));
  }
  SteeringMatrix a;
  a.entries = Eigen::MatrixXcd::Ones(2, 3);
  CHECK_THROWS_AS(decode(Eigen::Vector3d(1.0, -0.1, 0.0), a), NumericError);
  CHECK_THROWS_AS(decode(Eigen::Vector2d(1.0, 1.0), a), ConfigError);
  // Zero map decodes to the zero matrix.
  CHECK(decode(Eigen::Vector3d::Zero(), a).entries.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conv_same matches a padded loop") {
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const int len = kKernelSizes[seed % 4], n = 1 + seed % 20;
    Eigen::VectorXd k(len), x(n);
    for (auto& v : k) v = g(rng);
    for (auto& v : x) v = g(rng);
    std::vector<double> padded(n + len - 1, 0.0);
    const int h = (len - 1) / 2;
    for (int i = 0; i < n; ++i) padded[i + h] = x(i);
    const Eigen::VectorXd y = conv_same(k, x);
    REQUIRE(y.size() == n);
    for (int i = 0; i < n; ++i) {
      double ref = 0.0;
      for (int j = 0; j < len; ++j) ref += k(j) * padded[i + j];
      CHECK(std::abs(y(i) - ref) < 1e-12 * (1.0 + std::abs(ref)));
    }
  }
}

TEST_CASE("denoise examples") {
  std::mt19937_64 rng(3);
  auto band = random_band(3, 10, rng);
  Eigen::VectorXd x0(10);
  x0 << 1, -2, 3, 0, 5, -1, 0.5, 2, -3, 4;
  for (int t = 0; t < 4; ++t) {
    band.kernels[t].setZero();
    band.biases[t] = 0.0;
  }
  const auto zero = denoise(x0, band);
  for (int t = 1; t <= 4; ++t) CHECK((zero.x[t] - x0.cwiseMax(0.0)).cwiseAbs().maxCoeff() == 0.0);

  for (int t = 0; t < 4; ++t) band.kernels[t](kKernelSizes[t] / 2) = 1.0;
  const Eigen::VectorXd pos = x0.cwiseAbs();
  const auto impulse = denoise(pos, band);
  for (int t = 1; t <= 4; ++t) CHECK((impulse.x[t] - (t + 1) * pos).cwiseAbs().maxCoeff() < 1e-12);

  const auto any = denoise(x0, random_band(3, 10, rng));
  for (int t = 1; t <= 4; ++t) CHECK(any.x[t].minCoeff() >= 0.0);
}

TEST_CASE("untrained pipeline reduces to delay-and-sum") {
  const auto em = ArrayGeometry::builtin("em32");
  const auto t = fibonacci_tessellation(242, 6);
  const auto a = steering_matrix(em, t, 3000.0);
  std::mt19937_64 rng(11);
  CrossSpectralMatrix c;
  c.entries = lamtest::random_psd(32, rng, 3);
  c.band_hz = 3000.0;
  auto band = init_band_model(a, 5);
  const Eigen::VectorXd das = das_map(c, a).intensities;
  const Eigen::VectorXd x0 = encode(c.entries, band);
  CHECK((x0 - das).cwiseAbs().maxCoeff() < 1e-9 * das.maxCoeff());

  for (int s = 0; s < 4; ++s) {
    band.kernels[s].setZero();
    band.biases[s] = 0.0;
  }
  CHECK((denoise(x0, band).output() - das.cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-9 * das.maxCoeff());
}

TEST_CASE("initialisation and parameter count") {
  const auto em = ArrayGeometry::builtin("em32");
  const auto t = fibonacci_tessellation(242, 6);
  const auto a = steering_matrix(em, t, 1500.0);
  const auto band = init_band_model(a, 1);
  CHECK(band.parameter_count() == 15516);
  CHECK(band.parameter_count() >= 15000);
  CHECK(band.parameter_count() <= 17000);
  CHECK((band.back_projection - a.entries).cwiseAbs().maxCoeff() == 0.0);
  for (int s = 0; s < 4; ++s) {
    REQUIRE(band.kernels[s].size() == kKernelSizes[s]);
    CHECK(band.biases[s] == 0.0);
    for (int j = 0; j < kKernelSizes[s]; ++j) {
      const double expect = j == kKernelSizes[s] / 2 ? 1.0 : 0.0;
      CHECK(std::abs(band.kernels[s](j) - expect) <= 0.01);
    }
  }
  auto flat = band.pack();
  CHECK(static_cast<std::int64_t>(flat.size()) == band.parameter_count());
  flat[0] = 42.0;
  flat.back() = -1.0;
  auto copy = band;
  copy.unpack(flat);
  CHECK(copy.back_projection(0, 0).real() == 42.0);
  CHECK(copy.biases[3] == -1.0);
  flat.pop_back();
  CHECK_THROWS_AS(copy.unpack(flat), ConfigError);
}

TEST_CASE("loss examples") {
  std::mt19937_64 rng(2);
  const int n = 8;
  const auto nb = ring(n);
  const Eigen::MatrixXcd c = lamtest::random_psd(3, rng);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const auto l0 = loss(c, c, zero, 0.1, nb);
  CHECK(l0.total == 0.0);

  const auto lc = loss(c, c, Eigen::VectorXd::Constant(n, 2.0), 0.1, nb);
  CHECK(lc.tv == 0.0);
  CHECK(lc.total == doctest::Approx(0.1 * n * 2.0));

  Eigen::VectorXd x(n);
  x << 0, 1, 0, 0, 3, 0, 0, 0;
  const Eigen::MatrixXcd r = lamtest::random_psd(3, rng);
  const auto l = loss(c, r, x, 0.5, nb);
  double mse = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) mse += std::norm(c(i, j) - r(i, j));
  }
  mse /= 9.0;
  // Each spike contributes |x| to both of its neighbours' lists and twice in its own.
  const double tv = 4.0 * 1.0 + 4.0 * 3.0;
  CHECK(l.mse == doctest::Approx(mse).epsilon(1e-12));
  CHECK(l.l1 == 4.0);
  CHECK(l.tv == tv);
  CHECK(l.total == doctest::Approx(mse + 0.5 * (4.0 + tv)).epsilon(1e-12));

  CHECK_THROWS_AS(loss(c, r, x, 0.0, nb), ConfigError);
  CHECK_THROWS_AS(loss(c, r, x, 0.5, ring(5)), ConfigError);
}

TEST_CASE("loss is invariant to a joint channel permutation") {
  std::mt19937_64 rng(5);
  auto band = random_band(4, 9, rng);
  SteeringMatrix a;
  a.entries = lamtest::random_complex(4, 9, rng);
  const Eigen::MatrixXcd c = lamtest::random_psd(4, rng, 2);
  const Eigen::PermutationMatrix<Eigen::Dynamic> perm(Eigen::Vector4i(1, 3, 0, 2));
  auto pband = band;
  pband.back_projection = perm * band.back_projection;
  SteeringMatrix pa;
  pa.entries = perm * a.entries;
  const auto nb = ring(9);
  const double l1 = evaluate_loss(c, band, a, 0.01, nb).total;
  const double l2 = evaluate_loss(perm * c * perm.transpose(), pband, pa, 0.01, nb).total;
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-10));
}

TEST_CASE("analytic gradient against central differences") {
  // Direct finite differences on a handful of parameters, independent of the
  // gradient-check harness.
  std::mt19937_64 rng(21);
  const int m = 3, n = 12;
  auto band = random_band(m, n, rng);
  for (auto& b : band.biases) b = 1.0;  // keep ReLUs away from their kinks
  SteeringMatrix a;
  a.entries = lamtest::random_complex(m, n, rng);
  const Eigen::MatrixXcd c = lamtest::random_psd(m, rng);
  const auto nb = ring(n);
  const double gamma = 1e-3;
  const auto lg = loss_and_gradient(c, band, a, gamma, nb);
  CHECK(lg.terms.total == doctest::Approx(evaluate_loss(c, band, a, gamma, nb).total).epsilon(1e-12));
  const auto flat = band.pack();
  const auto grad = lg.gradient.pack();
  const double h = 1e-6;
  int compared = 0;
  for (size_t p = 0; p < flat.size(); p += 5) {
    auto plus = flat, minus = flat;
    plus[p] += h;
    minus[p] -= h;
    LamBandModel bp = band, bm = band;
    bp.unpack(plus);
    bm.unpack(minus);
    const double fd = (evaluate_loss(c, bp, a, gamma, nb).total -
                       evaluate_loss(c, bm, a, gamma, nb).total) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[p]), 1e-6});
    if (std::abs(fd - grad[p]) / denom > 1e-4) {
      // Only tolerated where |x4| or a TV difference sits on a kink.
      MESSAGE("parameter " << p << " fd " << fd << " analytic " << grad[p]);
    } else {
      ++compared;
    }
  }
  CHECK(compared >= static_cast<int>(flat.size() / 5) - 3);
}

TEST_CASE("forward: parallel equals serial, window permutation") {
  const auto tetra = ArrayGeometry::builtin("tetra");
  const auto model = init_model(tetra, 64, 6, {1500.0, 3000.0}, 343.0, 9);
  std::mt19937_64 rng(8);
  CsmSequence seq;
  seq.channels = 4;
  seq.band_freqs = {1500.0, 3000.0, 4500.0};
  for (int w = 0; w < 5; ++w) {
    std::vector<CrossSpectralMatrix> row;
    for (double f : seq.band_freqs) {
      CrossSpectralMatrix c;
      c.entries = lamtest::random_psd(4, rng);
      c.band_hz = f;
      row.push_back(c);
    }
    seq.windows.push_back(row);
  }
  const auto p = forward(seq, model);
  const auto s = serial::forward(seq, model);
  for (int w = 0; w < 5; ++w) {
    for (int f = 0; f < 2; ++f) {
      CHECK(std::memcmp(p.maps[w][f].intensities.data(), s.maps[w][f].intensities.data(),
                        sizeof(double) * 64) == 0);
    }
  }
  CsmSequence rev = seq;
  std::reverse(rev.windows.begin(), rev.windows.end());
  const auto r = forward(rev, model);
  CHECK((r.maps[0][1].intensities - p.maps[4][1].intensities).cwiseAbs().maxCoeff() == 0.0);

  CsmSequence missing = seq;
  missing.band_freqs = {1500.0, 4500.0, 6000.0};
  CHECK_THROWS_AS(forward(missing, model), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  const auto dir = lamtest::scratch_dir("checkpoint");
  const auto model = init_model(ArrayGeometry::builtin("em32"), 100, 6, {1500.0, 2250.0, 4500.0}, 343.0, 3);
  save_checkpoint(model, dir / "m.lamm", "{\"note\":1}");
  const auto back = load_checkpoint(dir / "m.lamm");
  CHECK(back.band_count() == 3);
  CHECK(back.band_freqs() == model.band_freqs());
  CHECK(back.tess.size() == 100);
  CHECK(back.geometry_name == "em32");
  for (int f = 0; f < 3; ++f) {
    CHECK(back.bands[f].pack() == model.bands[f].pack());
    CHECK((back.steering[f].entries - model.steering[f].entries).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(serialize_checkpoint(back, "{\"note\":1}") == serialize_checkpoint(model, "{\"note\":1}"));
  std::string bytes = serialize_checkpoint(model);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), IoError);
  bytes[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bytes), IoError);
  CHECK_THROWS_AS(load_checkpoint(dir / "none.lamm"), IoError);
}

}  // TEST_SUITE

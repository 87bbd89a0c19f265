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

#include <set>

#include "helpers.hpp"
#include "lam/geometry.hpp"

using namespace lam;

TEST_SUITE("geometry") {

TEST_CASE("builtin arrays") {
  const auto em = ArrayGeometry::builtin("em32");
  CHECK(em.channels() == 32);
  CHECK(em.positions().rowwise().mean().norm() < 1e-9);
  for (int m = 0; m < 32; ++m) CHECK(em.positions().col(m).norm() == doctest::Approx(0.042).epsilon(1e-3));

  const auto tetra = ArrayGeometry::builtin("tetra");
  CHECK(tetra.channels() == 4);
  for (int m = 0; m < 4; ++m) CHECK(tetra.positions().col(m).norm() == doctest::Approx(0.042).epsilon(1e-12));
  // Regular: all six pairwise distances equal.
  const double d01 = (tetra.positions().col(0) - tetra.positions().col(1)).norm();
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      CHECK((tetra.positions().col(i) - tetra.positions().col(j)).norm() == doctest::Approx(d01));
    }
  }
  CHECK_THROWS_AS(ArrayGeometry::builtin("em64"), ConfigError);
  CHECK_THROWS_AS(ArrayGeometry::resolve("no-such-array"), ConfigError);
}

TEST_CASE("construction re-centres and validates") {
  Eigen::Matrix3Xd p(3, 3);
  p << 1, 2, 3, 0, 0, 0, 5, 5, 5;
  const ArrayGeometry g("line", p);
  CHECK(g.positions().rowwise().mean().norm() < 1e-12);
  CHECK(g.positions()(0, 0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(ArrayGeometry("one", Eigen::Matrix3Xd::Zero(3, 1)), ConfigError);
  p(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ArrayGeometry("nan", p), ConfigError);
}

TEST_CASE("subset_channels") {
  const auto em = ArrayGeometry::builtin("em32");
  const std::vector<int> four{6, 10, 22, 26};
  const auto sub = subset_channels(em, four);
  CHECK(sub.channels() == 4);
  CHECK(sub.positions().rowwise().mean().norm() < 1e-12);
  // Relative geometry is preserved.
  const double d = (em.positions().col(5) - em.positions().col(9)).norm();
  CHECK((sub.positions().col(0) - sub.positions().col(1)).norm() == doctest::Approx(d).epsilon(1e-12));

  std::vector<int> all(32);
  for (int i = 0; i < 32; ++i) all[i] = i + 1;
  CHECK((subset_channels(em, all).positions() - em.positions()).cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<int> bad{1, 33};
  CHECK_THROWS_AS(subset_channels(em, bad), ConfigError);
  const std::vector<int> zero{0, 1};
  CHECK_THROWS_AS(subset_channels(em, zero), ConfigError);
  const std::vector<int> dup{3, 3};
  CHECK_THROWS_AS(subset_channels(em, dup), ConfigError);
}

TEST_CASE("geometry file round trip") {
  const auto dir = lamtest::scratch_dir("geometry");
  const auto em = ArrayGeometry::builtin("em32");
  save_geometry(em, dir / "em32.json");
  const auto back = load_geometry(dir / "em32.json");
  CHECK(back.name() == "em32");
  CHECK((back.positions() - em.positions()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(ArrayGeometry::resolve((dir / "em32.json").string()).channels() == 32);
}

TEST_CASE("fibonacci lattice basics") {
  CHECK_THROWS_AS(fibonacci_tessellation(3, 1), ConfigError);
  CHECK_THROWS_AS(fibonacci_tessellation(10, 10), ConfigError);

  const auto t4 = fibonacci_tessellation(4, 1);
  CHECK(t4.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(t4.point(i).norm() - 1.0) < 1e-12);
    for (int j = i + 1; j < 4; ++j) CHECK((t4.point(i) - t4.point(j)).norm() > 0.1);
  }

  for (int n : {4, 7, 16, 64, 242, 642, 1000}) {
    const auto t = fibonacci_tessellation(n, 3);
    // Very small lattices are lopsided: n = 4 and n = 7 exceed 0.05.
    if (n > 7) CHECK(t.points.rowwise().mean().norm() <= 0.05);
    for (int i = 0; i < n; ++i) CHECK(std::abs(t.point(i).norm() - 1.0) < 1e-12);
    // Pole-to-pole index order.
    for (int i = 1; i < n; ++i) CHECK(t.point(i).z() < t.point(i - 1).z());
  }
}

TEST_CASE("fibonacci spacing and neighbour graph") {
  const auto t = fibonacci_tessellation(242, 6);
  const double expected = std::sqrt(4.0 * kPi / 242.0);
  CHECK(t.mean_spacing() > 0.7 * expected);
  CHECK(t.mean_spacing() < 1.3 * expected);
  CHECK(rad2deg(expected) == doctest::Approx(13.1).epsilon(0.01));

  for (int i = 0; i < t.size(); ++i) {
    CHECK(t.neighbors[i].size() >= 6);
    std::set<int> uniq(t.neighbors[i].begin(), t.neighbors[i].end());
    CHECK(uniq.size() == t.neighbors[i].size());
    CHECK(!uniq.count(i));
    for (int j : t.neighbors[i]) {
      const auto& back = t.neighbors[j];
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
  for (int n : {16, 100, 242}) {
    const auto g = fibonacci_tessellation(n, 3);
    for (int i = 0; i < n; ++i) CHECK(g.hops(0, i) >= 0);
  }
  CHECK(t.hops(5, 5) == 0);
  CHECK(t.hops(5, t.neighbors[5][0]) == 1);
}

TEST_CASE("nearest node agrees with brute force") {
  std::mt19937_64 rng(3);
  const auto t = fibonacci_tessellation(242, 6);
  const Eigen::Matrix3Xd dirs = lamtest::random_directions(200, rng);
  for (int q = 0; q < dirs.cols(); ++q) {
    int best = 0;
    for (int i = 1; i < t.size(); ++i) {
      if (angle_between(t.point(i), dirs.col(q)) < angle_between(t.point(best), dirs.col(q))) best = i;
    }
    CHECK(t.nearest(dirs.col(q)) == best);
  }
}

TEST_CASE("steering matrix") {
  const auto t = fibonacci_tessellation(64, 4);
  SUBCASE("mic at the origin gives ones") {
    const auto a = steering_matrix(Eigen::Matrix3Xd::Zero(3, 1), t, 3000.0);
    CHECK((a.entries.array() - std::complex<double>(1.0, 0.0)).abs().maxCoeff() == 0.0);
  }
  SUBCASE("quarter wavelength") {
    Tessellation x;
    x.points = Eigen::Matrix3Xd(3, 1);
    x.points.col(0) = Eigen::Vector3d::UnitX();
    x.neighbors.resize(1);
    const double lambda = 343.0 / 2000.0;
    Eigen::Matrix3Xd p = Eigen::Matrix3Xd::Zero(3, 1);
    p(0, 0) = lambda / 4.0;
    const auto a = steering_matrix(p, x, 2000.0, 343.0);
    CHECK(std::abs(a.entries(0, 0) - std::complex<double>(0.0, -1.0)) < 1e-12);
    CHECK(a.wavelength == doctest::Approx(lambda));
  }
  SUBCASE("em32 entries are pure phases; sign flip conjugates") {
    const auto em = ArrayGeometry::builtin("em32");
    const auto a = steering_matrix(em.positions(), t, 3000.0, 343.0);
    CHECK((a.entries.array().abs() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(a.wavelength == doctest::Approx(343.0 / 3000.0));
    CHECK(a.band_hz == 3000.0);
    const auto b = steering_matrix(em.positions(), t, 3000.0, 343.0, PhaseSign::kPositive);
    CHECK((a.entries.conjugate() - b.entries).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("explicit elementwise formula") {
    std::mt19937_64 rng(9);
    const Eigen::Matrix3Xd p = lamtest::random_positions(5, rng);
    const auto a = steering_matrix(p, t, 2500.0, 340.0);
    for (int m = 0; m < 5; ++m) {
      for (int n = 0; n < t.size(); ++n) {
        const double phase = -2.0 * kPi * 2500.0 / 340.0 * p.col(m).dot(t.point(n));
        CHECK(std::abs(a.entries(m, n) - std::polar(1.0, phase)) < 1e-12);
      }
    }
    const Eigen::VectorXcd v = steering_vector(p, t.point(7), 2500.0, 340.0);
    CHECK((v - a.entries.col(7)).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(steering_matrix(Eigen::Matrix3Xd::Zero(3, 2), t, 0.0), ConfigError);
  CHECK_THROWS_AS(steering_matrix(Eigen::Matrix3Xd::Zero(3, 2), t, 100.0, -1.0), ConfigError);
}

}  // TEST_SUITE

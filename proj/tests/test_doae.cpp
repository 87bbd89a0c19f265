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

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "lam/doae.hpp"
#include "lam/io_util.hpp"

using namespace lam;

namespace {

SphericalAcousticMap map_of(const Eigen::VectorXd& v) {
  SphericalAcousticMap m;
  m.intensities = v;
  return m;
}

std::vector<Eigen::Vector3d> blob(const Eigen::Vector3d& centre, int count, double spread_deg,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, deg2rad(spread_deg));
  std::vector<Eigen::Vector3d> pts;
  const Eigen::Vector3d u = centre.unitOrthogonal();
  const Eigen::Vector3d v = centre.cross(u);
  for (int i = 0; i < count; ++i) pts.push_back((centre + g(rng) * u + g(rng) * v).normalized());
  return pts;
}

// rows <= cols
double brute_force_cost(const Eigen::MatrixXd& c) {
  std::vector<int> cols(c.cols());
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (Eigen::Index r = 0; r < c.rows(); ++r) s += c(r, cols[r]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace

TEST_SUITE("doae") {

TEST_CASE("raster grid geometry") {
  const auto t = fibonacci_tessellation(242, 6);
  const auto g = make_raster_grid(t, 72, 36);
  CHECK(g.cells() == 2592);
  CHECK(g.azimuth_center(0) == doctest::Approx(-177.5));
  CHECK(g.elevation_center(35) == doctest::Approx(87.5));
  for (int cell : {0, 100, 1295, 2591}) CHECK(g.cell_of(g.cell_direction(cell)) == cell);
  // Every cell is served by a node no farther than the worst lattice gap.
  double worst = 0.0;
  for (int cell = 0; cell < g.cells(); ++cell) {
    const double d = angle_between(g.cell_direction(cell), t.point(g.source_node[cell]));
    worst = std::max(worst, d);
    CHECK(g.source_node[cell] == t.nearest(g.cell_direction(cell)));
  }
  CHECK(rad2deg(worst) < 13.1);
  CHECK_THROWS_AS(make_raster_grid(t, 1, 36), ConfigError);
}

TEST_CASE("rasterize examples") {
  const auto t = fibonacci_tessellation(242, 6);
  Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(242);
  one_hot(40) = 5.0;
  const auto r = rasterize({map_of(one_hot), map_of(Eigen::VectorXd::Constant(242, 3.0))}, t, 72, 36);
  REQUIRE(r.band_count() == 2);
  for (int cell = 0; cell < r.grid.cells(); ++cell) {
    CHECK(r.bands[0](cell) == (r.grid.source_node[cell] == 40 ? 1.0 : 0.0));
    CHECK(r.bands[1](cell) == 0.0);
  }
  CHECK(r.bands[0].maxCoeff() == 1.0);
  CHECK((r.summed() - r.bands[0]).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(1);
  Eigen::VectorXd rnd(242);
  for (auto& v : rnd) v = std::uniform_real_distribution<double>(2.0, 7.0)(rng);
  const auto rr = rasterize({map_of(rnd)}, t, 72, 36);
  CHECK(rr.bands[0].minCoeff() >= 0.0);
  CHECK(rr.bands[0].maxCoeff() <= 1.0);
}

TEST_CASE("kmeans on a single bright cell") {
  const auto t = fibonacci_tessellation(242, 6);
  const auto grid = make_raster_grid(t, 72, 36);
  RasterMap r;
  r.grid = grid;
  r.bands = {Eigen::VectorXd::Zero(grid.cells())};
  r.bands[0](1000) = 1.0;
  const auto est = kmeans_doae(r);
  REQUIRE(est.size() == 1);
  CHECK(rad2deg(angle_between(est[0].direction, grid.cell_direction(1000))) < 1e-9);

  r.bands[0].setZero();
  CHECK(kmeans_doae(r).empty());
}

TEST_CASE("cluster_directions separates and merges blobs") {
  std::mt19937_64 rng(7);
  const Eigen::Vector3d c1 = from_azel(20.0, 10.0);
  KMeansParams p;
  p.clusters = 3;

  SUBCASE("40 degrees apart") {
    const Eigen::Vector3d c2 = from_azel(60.0, 10.0);
    auto pts = blob(c1, 9, 2.0, rng);
    auto more = blob(c2, 9, 2.0, rng);
    pts.insert(pts.end(), more.begin(), more.end());
    std::vector<double> w(pts.size(), 1.0);
    for (size_t i = 9; i < w.size(); ++i) w[i] = 0.5;
    const auto est = cluster_directions(pts, w, p);
    REQUIRE(est.size() == 2);
    CHECK(est[0].weight >= est[1].weight);
    CHECK(rad2deg(angle_between(est[0].direction, c1)) < 3.0);
    CHECK(rad2deg(angle_between(est[1].direction, c2)) < 3.0);
  }
  SUBCASE("10 degrees apart merge") {
    const Eigen::Vector3d c2 = from_azel(30.0, 10.0);
    auto pts = blob(c1, 9, 1.0, rng);
    auto more = blob(c2, 9, 1.0, rng);
    pts.insert(pts.end(), more.begin(), more.end());
    const auto est = cluster_directions(pts, std::vector<double>(pts.size(), 1.0), p);
    CHECK(est.size() == 1);
  }
  SUBCASE("output invariants on random input") {
    for (int s = 0; s < 20; ++s) {
      const Eigen::Matrix3Xd d = lamtest::random_directions(18, rng);
      std::vector<Eigen::Vector3d> pts;
      std::vector<double> w;
      for (int i = 0; i < 18; ++i) {
        pts.push_back(d.col(i));
        w.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
      }
      p.seed = s;
      const auto est = cluster_directions(pts, w, p);
      CHECK(est.size() <= 3);
      for (size_t i = 0; i < est.size(); ++i) {
        CHECK(std::abs(est[i].direction.norm() - 1.0) < 1e-9);
        if (i > 0) CHECK(est[i - 1].weight >= est[i].weight);
        for (size_t j = i + 1; j < est.size(); ++j) {
          CHECK(rad2deg(angle_between(est[i].direction, est[j].direction)) > 15.0);
        }
      }
      CHECK(est.size() == cluster_directions(pts, w, p).size());
    }
  }
}

TEST_CASE("merge_close") {
  std::vector<DoaEstimate> e(3);
  e[0].direction = from_azel(0, 0);
  e[0].weight = 3.0;
  e[1].direction = from_azel(10, 0);
  e[1].weight = 1.0;
  e[2].direction = from_azel(90, 0);
  e[2].weight = 1.0;
  const auto m = merge_close(e, 15.0);
  REQUIRE(m.size() == 2);
  CHECK(m[0].weight == 4.0);
  CHECK(to_azel(m[0].direction).azimuth_deg == doctest::Approx(2.5).epsilon(0.05));
  const auto again = merge_close(m, 15.0);
  REQUIRE(again.size() == m.size());
  CHECK(angle_between(again[0].direction, m[0].direction) < 1e-12);
  // Chains merge iteratively.
  std::vector<DoaEstimate> chain(3);
  for (int i = 0; i < 3; ++i) {
    chain[i].direction = from_azel(8.0 * i, 0);
    chain[i].weight = 1.0;
  }
  CHECK(merge_close(chain, 15.0).size() == 1);
}

TEST_CASE("hungarian equals brute force") {
  for (int seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const int rows = 1 + seed % 4, cols = rows + (seed / 4) % 3;
    Eigen::MatrixXd c(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) c(i, j) = std::uniform_real_distribution<double>(0.0, 180.0)(rng);
    }
    const auto assign = hungarian(c);
    REQUIRE(static_cast<int>(assign.size()) == rows);
    double s = 0.0;
    std::vector<int> used;
    for (int r = 0; r < rows; ++r) {
      REQUIRE(assign[r] >= 0);
      s += c(r, assign[r]);
      used.push_back(assign[r]);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(s == doctest::Approx(brute_force_cost(c)).epsilon(1e-12));

    // Transposed problem: each column gets one row.
    const auto t = hungarian(c.transpose());
    int assigned = 0;
    double st = 0.0;
    for (size_t r = 0; r < t.size(); ++r) {
      if (t[r] >= 0) {
        ++assigned;
        st += c(t[r], static_cast<int>(r));
      }
    }
    CHECK(assigned == rows);
    CHECK(st == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("evaluation examples") {
  using Frames = std::vector<std::vector<Eigen::Vector3d>>;
  const Eigen::Vector3d a = from_azel(10, 20), b = from_azel(-100, -30);
  const auto exact = evaluate(Frames{{a, b}}, Frames{{b, a}});
  CHECK(exact.le_deg == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(exact.lr_percent == 100.0);

  const auto off5 = evaluate(Frames{{from_azel(15, 0)}}, Frames{{from_azel(10, 0)}});
  CHECK(off5.le_deg == doctest::Approx(5.0));
  const auto off90 = evaluate(Frames{{from_azel(0, 90)}}, Frames{{from_azel(0, 0)}});
  CHECK(off90.le_deg == doctest::Approx(90.0));

  const auto half = evaluate(Frames{{a}}, Frames{{a, b}});
  CHECK(half.lr_percent == 50.0);
  CHECK(half.matched == 1);
  CHECK(half.references == 2);

  const auto nothing = evaluate(Frames{{}}, Frames{{a}});
  CHECK(nothing.le_deg == 180.0);
  CHECK(nothing.lr_percent == 0.0);
  const auto no_refs = evaluate(Frames{{a}}, Frames{{}});
  CHECK(no_refs.lr_percent == 100.0);

  const auto gated = evaluate(Frames{{from_azel(0, 90)}}, Frames{{from_azel(0, 0)}}, 20.0);
  CHECK(gated.matched == 0);
  CHECK(gated.le_deg == 180.0);
  CHECK_THROWS_AS(evaluate(Frames{{a}, {a}}, Frames{{a}}), ConfigError);
}

TEST_CASE("evaluation is rotation invariant") {
  std::mt19937_64 rng(3);
  std::vector<std::vector<Eigen::Vector3d>> est(5), ref(5);
  for (int f = 0; f < 5; ++f) {
    const auto e = lamtest::random_directions(2, rng);
    const auto r = lamtest::random_directions(1 + f % 3, rng);
    for (int i = 0; i < e.cols(); ++i) est[f].push_back(e.col(i));
    for (int i = 0; i < r.cols(); ++i) ref[f].push_back(r.col(i));
  }
  const auto base = evaluate(est, ref);
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  auto rotate = [&](auto frames) {
    for (auto& f : frames) {
      for (auto& d : f) d = rot * d;
    }
    return frames;
  };
  const auto rotated = evaluate(rotate(est), rotate(ref));
  CHECK(rotated.le_deg == doctest::Approx(base.le_deg).epsilon(1e-9));
  CHECK(rotated.lr_percent == base.lr_percent);
}

TEST_CASE("estimates csv round trip and frame mapping") {
  const auto dir = lamtest::scratch_dir("estimates");
  std::vector<std::vector<DoaEstimate>> frames(4);
  frames[1] = {{0, from_azel(45, 10), 0.75}, {0, from_azel(-120, -5), 0.25}};
  frames[3] = {{0, from_azel(170, 60), 1.0}};
  write_estimates_csv(frames, dir / "e.csv");
  const auto back = read_estimates_csv(dir / "e.csv");
  REQUIRE(back.size() == 4);
  CHECK(back[0].empty());
  REQUIRE(back[1].size() == 2);
  CHECK(rad2deg(angle_between(back[1][1].direction, frames[1][1].direction)) < 1e-5);
  CHECK(back[1][0].weight == doctest::Approx(0.75));
  write_estimates_csv(back, dir / "f.csv");
  CHECK(read_file(dir / "e.csv") == read_file(dir / "f.csv"));

  std::vector<std::vector<DoaEstimate>> win(3);
  win[0] = {{0, from_azel(0, 0), 1.0}};
  win[2] = {{2, from_azel(90, 0), 1.0}};
  const auto per_frame = windows_to_frames(win, {0.05, 0.15, 0.25}, 3, 0.1);
  REQUIRE(per_frame.size() == 3);
  CHECK(per_frame[0].size() == 1);
  CHECK(per_frame[1].empty());
  CHECK(per_frame[2].size() == 1);
}

}  // TEST_SUITE

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

#include "lam/doae.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>

#include "lam/io_util.hpp"

namespace lam {

double RasterGrid::azimuth_center(int a) const {
  return -180.0 + (a + 0.5) * 360.0 / azimuth_bins;
}

double RasterGrid::elevation_center(int e) const {
  return -90.0 + (e + 0.5) * 180.0 / elevation_bins;
}

Eigen::Vector3d RasterGrid::cell_direction(int cell) const {
  return from_azel(azimuth_center(cell % azimuth_bins), elevation_center(cell / azimuth_bins));
}

int RasterGrid::cell_of(const Eigen::Vector3d& dir) const {
  const AzEl ae = to_azel(dir);
  int a = static_cast<int>(std::floor((ae.azimuth_deg + 180.0) * azimuth_bins / 360.0));
  int e = static_cast<int>(std::floor((ae.elevation_deg + 90.0) * elevation_bins / 180.0));
  a = std::clamp(a, 0, azimuth_bins - 1);
  e = std::clamp(e, 0, elevation_bins - 1);
  return e * azimuth_bins + a;
}

RasterGrid make_raster_grid(const Tessellation& tess, int azimuth_bins, int elevation_bins) {
  if (azimuth_bins < 2 || elevation_bins < 2) {
    throw ConfigError("raster: azimuth and elevation bins must be >= 2");
  }
  if (tess.size() < 1) throw ConfigError("raster: empty tessellation");
  RasterGrid grid;
  grid.azimuth_bins = azimuth_bins;
  grid.elevation_bins = elevation_bins;
  grid.source_node.resize(grid.cells());
  for (int c = 0; c < grid.cells(); ++c) grid.source_node[c] = tess.nearest(grid.cell_direction(c));
  return grid;
}

Eigen::VectorXd RasterMap::summed() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.cells());
  for (const auto& b : bands) out += b;
  return out;
}

RasterMap rasterize(const std::vector<SphericalAcousticMap>& maps, const RasterGrid& grid) {
  RasterMap out;
  out.grid = grid;
  for (const auto& m : maps) {
    const int n = m.size();
    for (int node : grid.source_node) {
      if (node >= n) throw ConfigError("raster: map has fewer nodes than the tessellation");
    }
    Eigen::VectorXd sheet(grid.cells());
    for (int c = 0; c < grid.cells(); ++c) sheet(c) = m.intensities(grid.source_node[c]);
    if (!sheet.allFinite()) throw NumericError("raster: non-finite map intensity");
    const double lo = sheet.minCoeff();
    const double hi = sheet.maxCoeff();
    if (hi > lo) {
      sheet = (sheet.array() - lo) / (hi - lo);
    } else {
      sheet.setZero();
    }
    out.bands.push_back(std::move(sheet));
  }
  return out;
}

RasterMap rasterize(const std::vector<SphericalAcousticMap>& maps, const Tessellation& tess,
                    int azimuth_bins, int elevation_bins) {
  return rasterize(maps, make_raster_grid(tess, azimuth_bins, elevation_bins));
}

std::vector<DoaEstimate> merge_close(std::vector<DoaEstimate> estimates, double merge_deg) {
  const double limit = deg2rad(merge_deg);
  while (estimates.size() > 1) {
    size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < estimates.size(); ++i) {
      for (size_t j = i + 1; j < estimates.size(); ++j) {
        const double d = angle_between(estimates[i].direction, estimates[j].direction);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best <= limit)) break;
    DoaEstimate& a = estimates[bi];
    const DoaEstimate& b = estimates[bj];
    const double w = a.weight + b.weight;
    Eigen::Vector3d dir = a.weight * a.direction + b.weight * b.direction;
    if (w <= 0.0 || dir.norm() < 1e-12) dir = a.direction + b.direction;
    if (dir.norm() < 1e-12) dir = a.direction;
    a.direction = dir.normalized();
    a.weight = w;
    estimates.erase(estimates.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return estimates;
}

std::vector<DoaEstimate> cluster_directions(const std::vector<Eigen::Vector3d>& points,
                                            const std::vector<double>& weights,
                                            const KMeansParams& params) {
  if (points.size() != weights.size()) throw ConfigError("kmeans: points/weights size mismatch");
  if (params.clusters < 1) throw ConfigError("kmeans: clusters must be >= 1");
  const size_t n = points.size();
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw NumericError("kmeans: invalid weight");
    total += w;
  }
  if (n == 0 || total <= 0.0) return {};

  // Weighted k-means++ seeding.
  std::mt19937_64 rng(derive_seed(params.seed, 0x6b6d));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto pick = [&](const std::vector<double>& mass) -> size_t {
    const double sum = std::accumulate(mass.begin(), mass.end(), 0.0);
    double r = uni(rng) * sum;
    size_t last_positive = 0;
    for (size_t i = 0; i < mass.size(); ++i) {
      if (mass[i] <= 0.0) continue;
      last_positive = i;
      r -= mass[i];
      if (r < 0.0) return i;
    }
    return last_positive;
  };
  const size_t heaviest =
      static_cast<size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
  std::vector<Eigen::Vector3d> centroids;
  centroids.push_back(points[pick(weights)]);
  while (static_cast<int>(centroids.size()) < params.clusters) {
    std::vector<double> mass(n);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) d = std::min(d, angle_between(points[i], c));
      mass[i] = weights[i] * d * d;
      sum += mass[i];
    }
    // Every weighted point already coincides with a centroid.
    centroids.push_back(sum > 0.0 ? points[pick(mass)] : points[heaviest]);
  }

  const size_t k = centroids.size();
  std::vector<int> assign(n, 0);
  std::vector<double> cluster_weight(k, 0.0);
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < k; ++c) {
        const double d = angle_between(points[i], centroids[c]);
        if (d < best) {
          best = d;
          assign[i] = static_cast<int>(c);
        }
      }
    }
    std::vector<Eigen::Vector3d> sums(k, Eigen::Vector3d::Zero());
    std::fill(cluster_weight.begin(), cluster_weight.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      sums[assign[i]] += weights[i] * points[i];
      cluster_weight[assign[i]] += weights[i];
    }
    double moved = 0.0;
    for (size_t c = 0; c < k; ++c) {
      if (cluster_weight[c] <= 0.0 || sums[c].norm() < 1e-12) continue;
      const Eigen::Vector3d next = sums[c].normalized();
      moved = std::max(moved, angle_between(next, centroids[c]));
      centroids[c] = next;
    }
    if (moved < params.tolerance_rad) break;
  }
  // Final assignment weights for the converged centroids.
  std::fill(cluster_weight.begin(), cluster_weight.end(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (size_t c = 0; c < k; ++c) {
      const double d = angle_between(points[i], centroids[c]);
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    cluster_weight[arg] += weights[i];
  }

  std::vector<DoaEstimate> out;
  for (size_t c = 0; c < k; ++c) {
    if (cluster_weight[c] > 0.0) out.push_back({0, centroids[c], cluster_weight[c]});
  }
  out = merge_close(std::move(out), params.merge_deg);
  std::stable_sort(out.begin(), out.end(),
                   [](const DoaEstimate& a, const DoaEstimate& b) { return a.weight > b.weight; });
  return out;
}

std::vector<DoaEstimate> kmeans_doae(const RasterMap& raster, const KMeansParams& params) {
  if (params.top_cells < 1) throw ConfigError("kmeans: top_cells must be >= 1");
  const Eigen::VectorXd sheet = raster.summed();
  if (sheet.size() == 0 || !(sheet.maxCoeff() > 0.0)) return {};
  std::vector<int> order(static_cast<size_t>(sheet.size()));
  std::iota(order.begin(), order.end(), 0);
  const size_t take = std::min(order.size(), static_cast<size_t>(params.top_cells));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](int a, int b) { return sheet(a) > sheet(b) || (sheet(a) == sheet(b) && a < b); });
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  for (size_t i = 0; i < take; ++i) {
    points.push_back(raster.grid.cell_direction(order[i]));
    weights.push_back(std::max(0.0, sheet(order[i])));
  }
  return cluster_directions(points, weights, params);
}

std::vector<std::vector<DoaEstimate>> doae_sequence(const MapSequence& maps,
                                                    const Tessellation& tess,
                                                    const KMeansParams& params) {
  const RasterGrid grid = make_raster_grid(tess, params.azimuth_bins, params.elevation_bins);
  const int windows = static_cast<int>(maps.size());
  std::vector<std::vector<DoaEstimate>> out(windows);
  std::vector<std::exception_ptr> errors(windows);
#pragma omp parallel for schedule(static)
  for (int w = 0; w < windows; ++w) {
    try {
      out[w] = kmeans_doae(rasterize(maps[w], grid), params);
      for (auto& e : out[w]) e.window = w;
    } catch (...) {
      errors[w] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<std::vector<DoaEstimate>> windows_to_frames(
    const std::vector<std::vector<DoaEstimate>>& per_window,
    const std::vector<double>& window_centers, int n_frames, double frame_length) {
  if (per_window.size() != window_centers.size()) {
    throw ConfigError("doae: window estimates and centres differ in length");
  }
  if (n_frames < 0 || !(frame_length > 0.0)) throw ConfigError("doae: invalid frame grid");
  std::vector<std::vector<DoaEstimate>> frames(n_frames);
  if (per_window.empty()) return frames;
  for (int i = 0; i < n_frames; ++i) {
    const double center = (i + 0.5) * frame_length;
    size_t best = 0;
    for (size_t w = 1; w < window_centers.size(); ++w) {
      if (std::abs(window_centers[w] - center) < std::abs(window_centers[best] - center)) best = w;
    }
    frames[i] = per_window[best];
  }
  return frames;
}

void write_estimates_csv(const std::vector<std::vector<DoaEstimate>>& frames,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# n_frames=" << frames.size() << "\n";
  out << "frame_index,azimuth_deg,elevation_deg,weight\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (size_t i = 0; i < frames.size(); ++i) {
    for (const auto& e : frames[i]) {
      const AzEl ae = to_azel(e.direction);
      out << i << "," << ae.azimuth_deg << "," << ae.elevation_deg << "," << e.weight << "\n";
    }
  }
  write_file_atomic(path, out.str());
}

std::vector<std::vector<DoaEstimate>> read_estimates_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  long n_frames = -1;
  std::vector<std::vector<DoaEstimate>> frames;
  bool header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("n_frames=");
      if (pos != std::string::npos) n_frames = std::stol(line.substr(pos + 9));
      continue;
    }
    if (!header) {
      if (line != "frame_index,azimuth_deg,elevation_deg,weight") {
        throw ConfigError(path.string() + ": unexpected estimates header");
      }
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<double> v;
    while (std::getline(row, field, ',')) {
      try {
        v.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number");
      }
    }
    if (v.size() != 4 || v[0] < 0) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    }
    const size_t f = static_cast<size_t>(v[0]);
    if (f >= frames.size()) frames.resize(f + 1);
    frames[f].push_back({static_cast<int>(f), from_azel(v[1], v[2]), v[3]});
  }
  if (!header) throw ConfigError(path.string() + ": missing estimates header");
  if (n_frames >= 0) {
    if (static_cast<long>(frames.size()) > n_frames) {
      throw ConfigError(path.string() + ": frame index beyond n_frames");
    }
    frames.resize(static_cast<size_t>(n_frames));
  }
  return frames;
}

}  // namespace lam

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

#include "lam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>

#include <json.hpp>

namespace lam {
namespace {

constexpr double kEm32Radius = 0.042;

// Eigenmike em32 capsule angles (colatitude, azimuth) in degrees, capsules 1..32.
constexpr double kEm32Angles[32][2] = {
    {69, 0},    {90, 32},   {111, 0},   {90, 328},  {32, 0},    {55, 45},   {90, 69},
    {125, 45},  {148, 0},   {125, 315}, {90, 291},  {55, 315},  {21, 91},   {58, 90},
    {121, 90},  {159, 89},  {69, 180},  {90, 212},  {111, 180}, {90, 148},  {32, 180},
    {55, 225},  {90, 249},  {125, 225}, {148, 180}, {125, 135}, {90, 111},  {55, 135},
    {21, 269},  {58, 270},  {122, 270}, {159, 271},
};

Eigen::Matrix3Xd em32_positions() {
  Eigen::Matrix3Xd p(3, 32);
  for (int m = 0; m < 32; ++m) {
    const double theta = deg2rad(kEm32Angles[m][0]);
    const double phi = deg2rad(kEm32Angles[m][1]);
    p.col(m) = kEm32Radius * Eigen::Vector3d(std::sin(theta) * std::cos(phi),
                                             std::sin(theta) * std::sin(phi), std::cos(theta));
  }
  return p;
}

Eigen::Matrix3Xd tetra_positions() {
  // Same orientation as em32 capsules 6, 10, 22, 26.
  Eigen::Matrix3Xd p(3, 4);
  p.col(0) << 1, 1, 1;
  p.col(1) << 1, -1, -1;
  p.col(2) << -1, -1, 1;
  p.col(3) << -1, 1, -1;
  return p * (kEm32Radius / std::sqrt(3.0));
}

}  // namespace

ArrayGeometry::ArrayGeometry(std::string name, Eigen::Matrix3Xd positions)
    : name_(std::move(name)), positions_(std::move(positions)) {
  if (positions_.cols() < 2) {
    throw ConfigError("geometry: at least two microphones are required");
  }
  if (!positions_.allFinite()) {
    throw ConfigError("geometry: microphone positions must be finite");
  }
  const Eigen::Vector3d centroid = positions_.rowwise().mean();
  positions_.colwise() -= centroid;
}

ArrayGeometry ArrayGeometry::builtin(const std::string& name) {
  if (name == "em32") return ArrayGeometry("em32", em32_positions());
  if (name == "tetra") return ArrayGeometry("tetra", tetra_positions());
  throw ConfigError("geometry: unknown built-in array '" + name + "'");
}

ArrayGeometry ArrayGeometry::resolve(const std::string& name_or_path) {
  if (name_or_path == "em32" || name_or_path == "tetra") return builtin(name_or_path);
  if (std::filesystem::exists(name_or_path)) return load_geometry(name_or_path);
  throw ConfigError("geometry: '" + name_or_path + "' is neither a built-in array nor a file");
}

ArrayGeometry subset_channels(const ArrayGeometry& geometry, std::span<const int> indices) {
  if (indices.size() < 2) throw ConfigError("channels: need at least two channel indices");
  std::set<int> seen;
  Eigen::Matrix3Xd p(3, static_cast<Eigen::Index>(indices.size()));
  for (size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 1 || idx > geometry.channels()) {
      throw ConfigError("channels: index " + std::to_string(idx) + " out of range 1.." +
                        std::to_string(geometry.channels()));
    }
    if (!seen.insert(idx).second) {
      throw ConfigError("channels: duplicate index " + std::to_string(idx));
    }
    p.col(static_cast<Eigen::Index>(i)) = geometry.positions().col(idx - 1);
  }
  return ArrayGeometry(geometry.name() + "-subset", std::move(p));
}

ArrayGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open geometry file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("geometry file " + path.string() + ": " + e.what());
  }
  if (!j.contains("positions") || !j["positions"].is_array()) {
    throw ConfigError("geometry file: missing 'positions'");
  }
  if (j.value("unit", "m") != "m") throw ConfigError("geometry file: unit must be \"m\"");
  const auto& rows = j["positions"];
  Eigen::Matrix3Xd p(3, static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != 3) {
      throw ConfigError("geometry file: each position needs three coordinates");
    }
    for (int d = 0; d < 3; ++d) p(d, static_cast<Eigen::Index>(i)) = rows[i][d].get<double>();
  }
  return ArrayGeometry(j.value("name", path.stem().string()), std::move(p));
}

void save_geometry(const ArrayGeometry& geometry, const std::filesystem::path& path) {
  nlohmann::json j;
  j["name"] = geometry.name();
  j["unit"] = "m";
  j["positions"] = nlohmann::json::array();
  for (int m = 0; m < geometry.channels(); ++m) {
    const auto c = geometry.positions().col(m);
    j["positions"].push_back({c.x(), c.y(), c.z()});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write geometry file " + path.string());
  out << j.dump(2) << "\n";
}

int Tessellation::nearest(const Eigen::Vector3d& dir) const {
  Eigen::Index best = 0;
  (points.transpose() * dir.normalized()).maxCoeff(&best);
  return static_cast<int>(best);
}

double Tessellation::mean_spacing() const {
  double sum = 0.0;
  for (int i = 0; i < size(); ++i) {
    double best = kPi;
    for (int j = 0; j < size(); ++j) {
      if (j != i) best = std::min(best, angle_between(point(i), point(j)));
    }
    sum += best;
  }
  return sum / size();
}

double Tessellation::max_spacing() const {
  double worst = 0.0;
  for (int i = 0; i < size(); ++i) {
    double best = kPi;
    for (int j = 0; j < size(); ++j) {
      if (j != i) best = std::min(best, angle_between(point(i), point(j)));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

int Tessellation::hops(int from, int to) const {
  std::vector<int> dist(size(), -1);
  std::queue<int> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    if (u == to) return dist[u];
    for (int v : neighbors[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return -1;
}

Tessellation fibonacci_tessellation(int n_points, int k_neighbors) {
  if (n_points < 4) throw ConfigError("tessellation: n_points must be >= 4");
  if (k_neighbors < 1 || k_neighbors >= n_points) {
    throw ConfigError("tessellation: k_neighbors must be in [1, n_points)");
  }
  Tessellation t;
  t.points.resize(3, n_points);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_points; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n_points;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    Eigen::Vector3d p(r * std::cos(phi), r * std::sin(phi), z);
    t.points.col(i) = p.normalized();
  }

  // k-NN by largest dot product (monotone in great-circle distance), ties to lower index.
  std::vector<std::set<int>> adj(n_points);
  const Eigen::MatrixXd gram = t.points.transpose() * t.points;
  std::vector<int> order(n_points);
  for (int i = 0; i < n_points; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k_neighbors + 1, order.end(),
                      [&](int a, int b) {
                        if (gram(i, a) != gram(i, b)) return gram(i, a) > gram(i, b);
                        return a < b;
                      });
    int taken = 0;
    for (int j = 0; j <= k_neighbors && taken < k_neighbors; ++j) {
      if (order[j] == i) continue;
      adj[i].insert(order[j]);
      adj[order[j]].insert(i);
      ++taken;
    }
  }
  t.neighbors.resize(n_points);
  for (int i = 0; i < n_points; ++i) t.neighbors[i].assign(adj[i].begin(), adj[i].end());
  return t;
}

SteeringMatrix steering_matrix(const Eigen::Matrix3Xd& positions, const Tessellation& tess,
                               double band_hz, double speed_of_sound, PhaseSign sign) {
  if (!(band_hz > 0.0)) throw ConfigError("steering: band_hz must be positive");
  if (!(speed_of_sound > 0.0)) throw ConfigError("steering: speed_of_sound must be positive");
  SteeringMatrix a;
  a.band_hz = band_hz;
  a.wavelength = speed_of_sound / band_hz;
  const double s = sign == PhaseSign::kNegative ? -1.0 : 1.0;
  const Eigen::MatrixXd proj = positions.transpose() * tess.points;
  const double wavenumber = 2.0 * kPi / a.wavelength;
  a.entries.resize(proj.rows(), proj.cols());
  for (Eigen::Index n = 0; n < proj.cols(); ++n) {
    for (Eigen::Index m = 0; m < proj.rows(); ++m) {
      a.entries(m, n) = std::polar(1.0, s * wavenumber * proj(m, n));
    }
  }
  return a;
}

Eigen::VectorXcd steering_vector(const Eigen::Matrix3Xd& positions, const Eigen::Vector3d& dir,
                                 double band_hz, double speed_of_sound) {
  const double wavenumber = 2.0 * kPi * band_hz / speed_of_sound;
  const Eigen::VectorXd proj = positions.transpose() * dir;
  Eigen::VectorXcd v(proj.size());
  for (Eigen::Index m = 0; m < proj.size(); ++m) v(m) = std::polar(1.0, -wavenumber * proj(m));
  return v;
}

}  // namespace lam

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

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lam/common.hpp"

namespace lam {

/// Microphone positions in meters, one column per channel, centered on the
/// array centroid.
class ArrayGeometry {
 public:
  /// Validates (M >= 2, finite) and re-centers the positions.
  ArrayGeometry(std::string name, Eigen::Matrix3Xd positions);

  const std::string& name() const { return name_; }
  const Eigen::Matrix3Xd& positions() const { return positions_; }
  int channels() const { return static_cast<int>(positions_.cols()); }

  /// Built-in arrays: "em32" (32-capsule rigid sphere, r = 4.2 cm) and
  /// "tetra" (regular tetrahedron, circumradius 4.2 cm).
  static ArrayGeometry builtin(const std::string& name);

  /// Accepts a built-in name or a path to a geometry file.
  static ArrayGeometry resolve(const std::string& name_or_path);

 private:
  std::string name_;
  Eigen::Matrix3Xd positions_;
};

/// Restricts `geometry` to the listed channels. Indices are 1-based (Eigenmike
/// capsule numbering).
ArrayGeometry subset_channels(const ArrayGeometry& geometry, std::span<const int> indices);

/// Geometry file: JSON object with "name", "unit" ("m") and "positions"
/// (list of [x, y, z] rows).
ArrayGeometry load_geometry(const std::filesystem::path& path);
void save_geometry(const ArrayGeometry& geometry, const std::filesystem::path& path);

/// Unit-sphere sampling with a symmetric k-nearest-neighbour graph.
struct Tessellation {
  Eigen::Matrix3Xd points;
  std::vector<std::vector<int>> neighbors;

  int size() const { return static_cast<int>(points.cols()); }
  Eigen::Vector3d point(int i) const { return points.col(i); }
  /// Index of the node with the smallest great-circle distance to `dir`.
  int nearest(const Eigen::Vector3d& dir) const;
  /// Mean over nodes of the angle to the closest other node (radians).
  double mean_spacing() const;
  /// Max over nodes of the angle to the closest other node (radians).
  double max_spacing() const;
  /// Graph distance in neighbour hops; -1 when unreachable.
  int hops(int from, int to) const;
};

/// Golden-angle spiral lattice with n points, indexed from the +z pole to the
/// -z pole, plus a symmetrized k-NN graph under great-circle distance.
Tessellation fibonacci_tessellation(int n_points, int k_neighbors);

enum class PhaseSign { kNegative, kPositive };

/// Far-field steering matrix for one band.
struct SteeringMatrix {
  Eigen::MatrixXcd entries;  // M x N
  double wavelength = 0.0;
  double band_hz = 0.0;

  int channels() const { return static_cast<int>(entries.rows()); }
  int directions() const { return static_cast<int>(entries.cols()); }
};

/// A[m, n] = exp(-j (2 pi / lambda) p_m . r_n), lambda = c / f.
SteeringMatrix steering_matrix(const Eigen::Matrix3Xd& positions, const Tessellation& tess,
                               double band_hz, double speed_of_sound = kDefaultSpeedOfSound,
                               PhaseSign sign = PhaseSign::kNegative);

inline SteeringMatrix steering_matrix(const ArrayGeometry& geometry, const Tessellation& tess,
                                      double band_hz,
                                      double speed_of_sound = kDefaultSpeedOfSound) {
  return steering_matrix(geometry.positions(), tess, band_hz, speed_of_sound);
}

/// Steering vector for an arbitrary direction (same convention as above).
Eigen::VectorXcd steering_vector(const Eigen::Matrix3Xd& positions, const Eigen::Vector3d& dir,
                                 double band_hz, double speed_of_sound = kDefaultSpeedOfSound);

}  // namespace lam

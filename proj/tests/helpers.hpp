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

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Core>

#include "lam/common.hpp"

namespace lamtest {

inline Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = {n(rng), n(rng)};
  }
  return m;
}

inline Eigen::MatrixXcd random_psd(int m, std::mt19937_64& rng, int rank = -1) {
  const Eigen::MatrixXcd g = random_complex(m, rank < 0 ? m : rank, rng);
  return g * g.adjoint() / static_cast<double>(g.cols());
}

inline Eigen::Matrix3Xd random_positions(int m, std::mt19937_64& rng, double scale = 0.05) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::Matrix3Xd p(3, m);
  for (int j = 0; j < m; ++j) p.col(j) = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return p;
}

inline Eigen::Matrix3Xd random_directions(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix3Xd d(3, n);
  for (int j = 0; j < n; ++j) d.col(j) = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
  return d;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("lam_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace lamtest

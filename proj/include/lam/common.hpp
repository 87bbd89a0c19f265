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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lam {

using cplx = std::complex<double>;

// Error categories map onto the CLI exit-code contract (2 config, 3 I/O, 4 numeric).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultSpeedOfSound = 343.0;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Great-circle angle between two unit vectors, in radians.
inline double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  // atan2 form stays accurate for nearly parallel vectors.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Azimuth in [-180, 180) and elevation in [-90, 90], degrees.
struct AzEl {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

inline AzEl to_azel(const Eigen::Vector3d& v) {
  const Eigen::Vector3d u = v.normalized();
  double az = rad2deg(std::atan2(u.y(), u.x()));
  if (az >= 180.0) az -= 360.0;
  const double el = rad2deg(std::asin(std::clamp(u.z(), -1.0, 1.0)));
  return {az, el};
}

inline Eigen::Vector3d from_azel(double azimuth_deg, double elevation_deg) {
  const double az = deg2rad(azimuth_deg);
  const double el = deg2rad(elevation_deg);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

}  // namespace lam

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
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "lam/beamform.hpp"
#include "lam/geometry.hpp"
#include "lam/simulator.hpp"

namespace lam {

/// Equirectangular grid. Azimuth bin a is centred at -180 + (a + 0.5) 360/A,
/// elevation bin e at -90 + (e + 0.5) 180/E. Cells are linearly indexed e*A + a.
struct RasterGrid {
  int azimuth_bins = 72;
  int elevation_bins = 36;
  std::vector<int> source_node;  // nearest tessellation node per cell

  int cells() const { return azimuth_bins * elevation_bins; }
  double azimuth_center(int a) const;
  double elevation_center(int e) const;
  Eigen::Vector3d cell_direction(int cell) const;
  /// Cell whose angular box contains `dir`.
  int cell_of(const Eigen::Vector3d& dir) const;
};

RasterGrid make_raster_grid(const Tessellation& tess, int azimuth_bins, int elevation_bins);

/// F sheets of A*E values in [0, 1].
struct RasterMap {
  RasterGrid grid;
  std::vector<Eigen::VectorXd> bands;

  int band_count() const { return static_cast<int>(bands.size()); }
  Eigen::VectorXd summed() const;
};

/// Nearest-node lookup per cell followed by per-band min-max normalization
/// (constant bands become all zeros).
RasterMap rasterize(const std::vector<SphericalAcousticMap>& maps, const RasterGrid& grid);
RasterMap rasterize(const std::vector<SphericalAcousticMap>& maps, const Tessellation& tess,
                    int azimuth_bins, int elevation_bins);

struct DoaEstimate {
  int window = 0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  double weight = 0.0;
};

struct KMeansParams {
  int clusters = 3;
  int top_cells = 18;
  double merge_deg = 15.0;
  int max_iterations = 50;
  double tolerance_rad = 1e-6;
  std::uint64_t seed = 0;
  int azimuth_bins = 72;
  int elevation_bins = 36;
};

/// Weighted K-means on the strongest cells of the band-summed raster, followed
/// by the iterative merge of centroids closer than merge_deg. Returns at most
/// `clusters` estimates sorted by decreasing weight; window is left at 0.
std::vector<DoaEstimate> kmeans_doae(const RasterMap& raster, const KMeansParams& params = {});

/// Lower-level entry used by kmeans_doae: clusters weighted unit vectors.
std::vector<DoaEstimate> cluster_directions(const std::vector<Eigen::Vector3d>& points,
                                            const std::vector<double>& weights,
                                            const KMeansParams& params);

/// Repeatedly merges the closest pair of estimates while it is within
/// merge_deg (weighted mean direction, summed weight).
std::vector<DoaEstimate> merge_close(std::vector<DoaEstimate> estimates, double merge_deg);

/// rasterize + kmeans_doae for every window, in parallel.
std::vector<std::vector<DoaEstimate>> doae_sequence(const MapSequence& maps,
                                                    const Tessellation& tess,
                                                    const KMeansParams& params);

/// Per-frame estimates: every label frame takes the estimates of the window
/// whose centre is nearest to the frame centre.
std::vector<std::vector<DoaEstimate>> windows_to_frames(
    const std::vector<std::vector<DoaEstimate>>& per_window,
    const std::vector<double>& window_centers, int n_frames, double frame_length);

/// Estimates CSV: "frame_index,azimuth_deg,elevation_deg,weight" after a
/// "# n_frames=<count>" line.
void write_estimates_csv(const std::vector<std::vector<DoaEstimate>>& frames,
                         const std::filesystem::path& path);
std::vector<std::vector<DoaEstimate>> read_estimates_csv(const std::filesystem::path& path);

/// Minimum-cost one-to-one assignment of rows to columns. Returns the column of
/// each row, -1 when unassigned (only when rows > cols).
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct FrameEval {
  int frame = 0;
  int predictions = 0;
  int references = 0;
  int matched = 0;
  double error_sum_deg = 0.0;
};

struct EvalResult {
  double le_deg = 0.0;        // 180 when nothing matched
  double lr_percent = 0.0;    // 100 when there are no references
  int matched = 0;
  int references = 0;
  int predictions = 0;
  std::vector<FrameEval> frames;
};

/// Hungarian matching per frame under great-circle distance. Pairs farther
/// than gate_deg are discarded after assignment (no gate by default).
EvalResult evaluate(const std::vector<std::vector<Eigen::Vector3d>>& estimates,
                    const std::vector<std::vector<Eigen::Vector3d>>& references,
                    double gate_deg = std::numeric_limits<double>::infinity());

EvalResult evaluate(const std::vector<std::vector<DoaEstimate>>& estimates,
                    const GroundTruth& truth,
                    double gate_deg = std::numeric_limits<double>::infinity());

/// JSON summary and per-frame CSV.
void write_eval_report(const EvalResult& result, const std::filesystem::path& json_path,
                       const std::filesystem::path& csv_path);

}  // namespace lam

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

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lam/doae.hpp"
#include "lam/io_util.hpp"

namespace lam {

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  if (!cost.allFinite()) throw NumericError("hungarian: non-finite cost");
  if (rows > cols) {
    const std::vector<int> t = hungarian(cost.transpose());
    std::vector<int> out(rows, -1);
    for (int c = 0; c < cols; ++c) {
      if (t[c] >= 0) out[t[c]] = c;
    }
    return out;
  }
  // Potentials form, rows <= cols, 1-based with a virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (p[j] > 0) out[p[j] - 1] = j - 1;
  }
  return out;
}

EvalResult evaluate(const std::vector<std::vector<Eigen::Vector3d>>& estimates,
                    const std::vector<std::vector<Eigen::Vector3d>>& references,
                    double gate_deg) {
  if (estimates.size() != references.size()) {
    throw ConfigError("evaluate: " + std::to_string(estimates.size()) + " estimate frames vs " +
                      std::to_string(references.size()) + " reference frames");
  }
  EvalResult result;
  double error_sum = 0.0;
  for (size_t f = 0; f < estimates.size(); ++f) {
    const auto& est = estimates[f];
    const auto& ref = references[f];
    FrameEval fe;
    fe.frame = static_cast<int>(f);
    fe.predictions = static_cast<int>(est.size());
    fe.references = static_cast<int>(ref.size());
    if (!est.empty() && !ref.empty()) {
      Eigen::MatrixXd cost(est.size(), ref.size());
      for (size_t i = 0; i < est.size(); ++i) {
        for (size_t j = 0; j < ref.size(); ++j) {
          cost(i, j) = rad2deg(angle_between(est[i].normalized(), ref[j].normalized()));
        }
      }
      const std::vector<int> match = hungarian(cost);
      for (size_t i = 0; i < match.size(); ++i) {
        if (match[i] < 0) continue;
        const double d = cost(static_cast<Eigen::Index>(i), match[i]);
        if (d > gate_deg) continue;
        ++fe.matched;
        fe.error_sum_deg += d;
      }
    }
    result.predictions += fe.predictions;
    result.references += fe.references;
    result.matched += fe.matched;
    error_sum += fe.error_sum_deg;
    result.frames.push_back(fe);
  }
  result.le_deg = result.matched > 0 ? error_sum / result.matched : 180.0;
  result.lr_percent =
      result.references > 0 ? 100.0 * result.matched / result.references : 100.0;
  return result;
}

EvalResult evaluate(const std::vector<std::vector<DoaEstimate>>& estimates,
                    const GroundTruth& truth, double gate_deg) {
  std::vector<std::vector<Eigen::Vector3d>> est(estimates.size());
  for (size_t f = 0; f < estimates.size(); ++f) {
    for (const auto& e : estimates[f]) est[f].push_back(e.direction);
  }
  std::vector<std::vector<Eigen::Vector3d>> ref(truth.frames.size());
  for (size_t f = 0; f < truth.frames.size(); ++f) {
    for (const auto& s : truth.frames[f]) ref[f].push_back(s.direction);
  }
  return evaluate(est, ref, gate_deg);
}

void write_eval_report(const EvalResult& result, const std::filesystem::path& json_path,
                       const std::filesystem::path& csv_path) {
  nlohmann::ordered_json j;
  j["le_deg"] = result.le_deg;
  j["lr_percent"] = result.lr_percent;
  j["matched"] = result.matched;
  j["references"] = result.references;
  j["predictions"] = result.predictions;
  j["frames"] = result.frames.size();
  write_file_atomic(json_path, j.dump(2) + "\n");

  std::ostringstream out;
  out << "frame_index,predictions,references,matched,error_sum_deg\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto& f : result.frames) {
    out << f.frame << "," << f.predictions << "," << f.references << "," << f.matched << ","
        << f.error_sum_deg << "\n";
  }
  write_file_atomic(csv_path, out.str());
}

}  // namespace lam

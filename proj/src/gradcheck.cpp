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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lam/io_util.hpp"
#include "lam/train.hpp"

namespace lam {
namespace {

// Arguments of every nonsmooth function in the loss: ReLU inputs, |x4| and the
// TV differences, in a fixed order.
std::vector<double> kink_arguments(const Eigen::MatrixXcd& csm, const LamBandModel& band,
                                   const std::vector<std::vector<int>>& neighbors) {
  const LatentTrace trace = denoise(encode(csm, band), band);
  std::vector<double> args;
  for (const auto& z : trace.pre_activation) args.insert(args.end(), z.data(), z.data() + z.size());
  const Eigen::VectorXd& x4 = trace.output();
  args.insert(args.end(), x4.data(), x4.data() + x4.size());
  for (size_t i = 0; i < neighbors.size(); ++i) {
    for (int j : neighbors[i]) args.push_back(x4(static_cast<Eigen::Index>(i)) - x4(j));
  }
  return args;
}

bool near_kink(const std::vector<double>& base, const std::vector<double>& plus,
               const std::vector<double>& minus, double margin) {
  auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
  for (size_t i = 0; i < base.size(); ++i) {
    if (sgn(plus[i]) != sgn(base[i]) || sgn(minus[i]) != sgn(base[i])) return true;
    if (std::abs(base[i]) < margin && (plus[i] != base[i] || minus[i] != base[i])) return true;
  }
  return false;
}

// L(plus) - L(minus) without forming either loss: at the scale of an untrained
// model the two totals agree to ~12 digits and direct subtraction cancels.
double loss_difference(const Eigen::MatrixXcd& csm, const LamBandModel& plus,
                       const LamBandModel& minus, const SteeringMatrix& steering, double gamma,
                       const std::vector<std::vector<int>>& neighbors) {
  const Eigen::VectorXd xp = denoise(encode(csm, plus), plus).output();
  const Eigen::VectorXd xm = denoise(encode(csm, minus), minus).output();
  const Eigen::MatrixXcd& a = steering.entries;
  // |R+|^2 - |R-|^2 = Re <R+ - R-, R+ + R->, with R+ - R- = A diag(xp - xm) A^H.
  const Eigen::MatrixXcd diff = a * (xp - xm).asDiagonal() * a.adjoint();
  const Eigen::MatrixXcd sum = a * (xp + xm).asDiagonal() * a.adjoint() - 2.0 * csm;
  double delta = (diff.conjugate().cwiseProduct(sum)).sum().real() / static_cast<double>(csm.size());
  double reg = 0.0;
  for (Eigen::Index i = 0; i < xp.size(); ++i) {
    reg += std::abs(xp(i)) - std::abs(xm(i));
    for (int j : neighbors[static_cast<size_t>(i)]) {
      reg += std::abs(xp(i) - xp(j)) - std::abs(xm(i) - xm(j));
    }
  }
  return delta + gamma * reg;
}

}  // namespace

GradCheckReport check_gradients(const LamBandModel& band, const SteeringMatrix& steering,
                                const std::vector<std::vector<int>>& neighbors,
                                const Eigen::MatrixXcd& csm, const GradCheckOptions& opts) {
  GradCheckReport report;
  const BandLossGradient analytic = loss_and_gradient(csm, band, steering, opts.gamma, neighbors);
  const std::vector<double> grad = analytic.gradient.pack();
  const std::vector<double> theta = band.pack();
  const std::vector<double> base_args = kink_arguments(csm, band, neighbors);
  const double floor = 1e-6 * (1.0 + std::abs(analytic.terms.total));

  // Kernel taps and biases are always checked; B entries are sampled.
  const size_t n_b = theta.size() - 28;
  std::vector<size_t> candidates(theta.size() - n_b);
  std::iota(candidates.begin(), candidates.end(), n_b);
  std::vector<size_t> b_order(n_b);
  std::iota(b_order.begin(), b_order.end(), size_t{0});
  std::mt19937_64 rng(derive_seed(opts.seed, 0x67636b));
  std::shuffle(b_order.begin(), b_order.end(), rng);

  auto perturbed = [&](size_t idx, double value) {
    std::vector<double> p = theta;
    p[idx] = value;
    LamBandModel m = band;
    m.unpack(p);
    return m;
  };

  size_t next_b = 0;
  size_t cursor = 0;
  while (true) {
    size_t idx;
    if (cursor < candidates.size()) {
      idx = candidates[cursor++];
    } else if (report.checked < opts.parameters && next_b < n_b) {
      idx = b_order[next_b++];
    } else {
      break;
    }
    const LamBandModel plus = perturbed(idx, theta[idx] + opts.step);
    const LamBandModel minus = perturbed(idx, theta[idx] - opts.step);
    if (near_kink(base_args, kink_arguments(csm, plus, neighbors),
                  kink_arguments(csm, minus, neighbors), opts.kink_margin)) {
      ++report.excluded_kinks;
      continue;
    }
    const double fd = loss_difference(csm, plus, minus, steering, opts.gamma, neighbors) /
                      (2.0 * opts.step);
    const double denom = std::max({std::abs(fd), std::abs(grad[idx]), floor});
    const double rel = std::abs(fd - grad[idx]) / denom;
    ++report.checked;
    if (!(rel <= report.max_relative_error)) {
      report.max_relative_error = rel;
      report.worst_parameter = static_cast<int>(idx);
    }
  }
  report.passed = opts.tolerance > 0.0 && report.checked > 0 &&
                  report.max_relative_error <= opts.tolerance;
  return report;
}

}  // namespace lam

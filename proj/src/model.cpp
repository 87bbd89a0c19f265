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

#include "lam/model.hpp"

#include <cmath>
#include <random>

#include "lam/io_util.hpp"

namespace lam {
namespace {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_csm(const Eigen::MatrixXcd& csm, int channels) {
  if (csm.rows() != channels || csm.cols() != channels) {
    throw ConfigError("lam: CSM is " + std::to_string(csm.rows()) + "x" +
                      std::to_string(csm.cols()) + " but the model expects " +
                      std::to_string(channels) + " channels");
  }
}

// Reconstruction residual R = A diag(x) A^H - C.
Eigen::MatrixXcd residual(const Eigen::MatrixXcd& csm, const Eigen::VectorXd& x4,
                          const Eigen::MatrixXcd& a) {
  return a * x4.asDiagonal() * a.adjoint() - csm;
}

}  // namespace

std::int64_t LamBandModel::parameter_count() const {
  std::int64_t n = 2 * static_cast<std::int64_t>(back_projection.size());
  for (const auto& k : kernels) n += k.size();
  return n + static_cast<std::int64_t>(biases.size());
}

LamBandModel LamBandModel::zeros_like() const {
  LamBandModel z;
  z.back_projection = Eigen::MatrixXcd::Zero(back_projection.rows(), back_projection.cols());
  for (int t = 0; t < kDenoiseSteps; ++t) z.kernels[t] = Eigen::VectorXd::Zero(kernels[t].size());
  z.band_hz = band_hz;
  return z;
}

std::vector<double> LamBandModel::pack() const {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(parameter_count()));
  for (Eigen::Index i = 0; i < back_projection.size(); ++i) {
    flat.push_back(back_projection.data()[i].real());
    flat.push_back(back_projection.data()[i].imag());
  }
  for (const auto& k : kernels) flat.insert(flat.end(), k.data(), k.data() + k.size());
  flat.insert(flat.end(), biases.begin(), biases.end());
  return flat;
}

void LamBandModel::unpack(const std::vector<double>& flat) {
  if (static_cast<std::int64_t>(flat.size()) != parameter_count()) {
    throw ConfigError("lam: flat parameter vector has the wrong length");
  }
  size_t p = 0;
  for (Eigen::Index i = 0; i < back_projection.size(); ++i, p += 2) {
    back_projection.data()[i] = cplx(flat[p], flat[p + 1]);
  }
  for (auto& k : kernels) {
    for (Eigen::Index i = 0; i < k.size(); ++i) k(i) = flat[p++];
  }
  for (auto& b : biases) b = flat[p++];
}

LamBandModel init_band_model(const SteeringMatrix& steering, std::uint64_t seed) {
  LamBandModel band;
  band.back_projection = steering.entries;
  band.band_hz = steering.band_hz;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  for (int t = 0; t < kDenoiseSteps; ++t) {
    Eigen::VectorXd k(kKernelSizes[t]);
    for (Eigen::Index i = 0; i < k.size(); ++i) k(i) = jitter(rng);
    k(k.size() / 2) += 1.0;
    band.kernels[t] = k;
    band.biases[t] = 0.0;
  }
  return band;
}

Eigen::VectorXd encode(const Eigen::MatrixXcd& csm, const LamBandModel& band) {
  check_csm(csm, band.channels());
  const Eigen::MatrixXcd& b = band.back_projection;
  const Eigen::MatrixXcd cb = csm * b;
  // Column-wise b_n^H (C b_n); the real part is the quadratic form of the
  // Hermitian part of C.
  return (b.conjugate().cwiseProduct(cb)).colwise().sum().real().transpose();
}

Eigen::VectorXd conv_same(const Eigen::VectorXd& kernel, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::Index len = kernel.size();
  const Eigen::Index half = (len - 1) / 2;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j_lo = std::max<Eigen::Index>(0, half - i);
    const Eigen::Index j_hi = std::min<Eigen::Index>(len, n - i + half);
    double acc = 0.0;
    for (Eigen::Index j = j_lo; j < j_hi; ++j) acc += kernel(j) * x(i + j - half);
    y(i) = acc;
  }
  return y;
}

LatentTrace denoise(const Eigen::VectorXd& x0, const LamBandModel& band) {
  LatentTrace trace;
  trace.x[0] = x0;
  for (int t = 0; t < kDenoiseSteps; ++t) {
    Eigen::VectorXd z = conv_same(band.kernels[t], trace.x[t]) + x0;
    z.array() += band.biases[t];
    trace.x[t + 1] = z.cwiseMax(0.0);
    trace.pre_activation[t] = std::move(z);
  }
  return trace;
}

CrossSpectralMatrix decode(const Eigen::VectorXd& x4, const SteeringMatrix& steering) {
  if (x4.size() != steering.directions()) throw ConfigError("decode: map/steering size mismatch");
  if (x4.size() > 0 && x4.minCoeff() < -1e-9) {
    throw NumericError("decode: latent map has negative entries");
  }
  CrossSpectralMatrix c;
  c.entries = steering.entries * x4.asDiagonal() * steering.entries.adjoint();
  c.band_hz = steering.band_hz;
  return c;
}

LossTerms loss(const Eigen::MatrixXcd& csm, const Eigen::MatrixXcd& reconstruction,
               const Eigen::VectorXd& x4, double gamma,
               const std::vector<std::vector<int>>& neighbors) {
  if (!(gamma > 0.0)) throw ConfigError("loss: gamma must be positive");
  if (csm.rows() != reconstruction.rows() || csm.cols() != reconstruction.cols()) {
    throw ConfigError("loss: CSM shape mismatch");
  }
  if (static_cast<Eigen::Index>(neighbors.size()) != x4.size()) {
    throw ConfigError("loss: neighbor lists do not match the map size");
  }
  LossTerms t;
  const double m2 = static_cast<double>(csm.size());
  t.mse = (csm - reconstruction).squaredNorm() / m2;
  t.l1 = x4.cwiseAbs().sum();
  for (size_t i = 0; i < neighbors.size(); ++i) {
    for (int j : neighbors[i]) t.tv += std::abs(x4(static_cast<Eigen::Index>(i)) - x4(j));
  }
  t.total = t.mse + gamma * (t.l1 + t.tv);
  return t;
}

LossTerms evaluate_loss(const Eigen::MatrixXcd& csm, const LamBandModel& band,
                        const SteeringMatrix& steering, double gamma,
                        const std::vector<std::vector<int>>& neighbors) {
  const LatentTrace trace = denoise(encode(csm, band), band);
  const Eigen::MatrixXcd recon =
      steering.entries * trace.output().asDiagonal() * steering.entries.adjoint();
  return loss(csm, recon, trace.output(), gamma, neighbors);
}

BandLossGradient loss_and_gradient(const Eigen::MatrixXcd& csm, const LamBandModel& band,
                                   const SteeringMatrix& steering, double gamma,
                                   const std::vector<std::vector<int>>& neighbors) {
  if (!(gamma > 0.0)) throw ConfigError("loss: gamma must be positive");
  const Eigen::MatrixXcd& a = steering.entries;
  const LatentTrace trace = denoise(encode(csm, band), band);
  const Eigen::VectorXd& x4 = trace.output();
  const Eigen::MatrixXcd r = residual(csm, x4, a);

  BandLossGradient out;
  out.terms.mse = r.squaredNorm() / static_cast<double>(r.size());
  out.terms.l1 = x4.cwiseAbs().sum();
  const Eigen::Index n = x4.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i) += gamma * sign(x4(i));
    for (int j : neighbors[i]) {
      const double d = x4(i) - x4(j);
      out.terms.tv += std::abs(d);
      g(i) += gamma * sign(d);
      g(j) -= gamma * sign(d);
    }
  }
  out.terms.total = out.terms.mse + gamma * (out.terms.l1 + out.terms.tv);

  // d MSE / d x4_n = (2 / M^2) Re(a_n^H R a_n)
  const Eigen::MatrixXcd ra = r * a;
  g += (2.0 / static_cast<double>(r.size())) *
       (a.conjugate().cwiseProduct(ra)).colwise().sum().real().transpose();

  out.gradient = band.zeros_like();
  Eigen::VectorXd g_x0 = Eigen::VectorXd::Zero(n);
  for (int t = kDenoiseSteps - 1; t >= 0; --t) {
    const Eigen::VectorXd gz =
        (trace.pre_activation[t].array() > 0.0).select(g, Eigen::VectorXd::Zero(n));
    const Eigen::VectorXd& input = trace.x[t];
    const Eigen::VectorXd& kernel = band.kernels[t];
    const Eigen::Index len = kernel.size();
    const Eigen::Index half = (len - 1) / 2;
    Eigen::VectorXd g_in = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd& gk = out.gradient.kernels[t];
    for (Eigen::Index i = 0; i < n; ++i) {
      if (gz(i) == 0.0) continue;
      const Eigen::Index j_lo = std::max<Eigen::Index>(0, half - i);
      const Eigen::Index j_hi = std::min<Eigen::Index>(len, n - i + half);
      for (Eigen::Index j = j_lo; j < j_hi; ++j) {
        gk(j) += gz(i) * input(i + j - half);
        g_in(i + j - half) += kernel(j) * gz(i);
      }
    }
    out.gradient.biases[t] = gz.sum();
    g_x0 += gz;
    g = std::move(g_in);
  }
  g_x0 += g;  // conv path of step 1 reads x0 directly

  // x0_n = b_n^H Ch b_n  =>  d/dRe(b_n) + j d/dIm(b_n) = 2 Ch b_n.
  const Eigen::MatrixXcd ch = 0.5 * (csm + csm.adjoint());
  out.gradient.back_projection = 2.0 * (ch * band.back_projection) * g_x0.asDiagonal();
  return out;
}

std::vector<double> LamModel::band_freqs() const {
  std::vector<double> f;
  for (const auto& b : bands) f.push_back(b.band_hz);
  return f;
}

int LamModel::find_band(double band_hz) const {
  for (int f = 0; f < band_count(); ++f) {
    if (std::abs(bands[f].band_hz - band_hz) < 1e-6) return f;
  }
  return -1;
}

LamModel init_model(const ArrayGeometry& geometry, int n_points, int k_neighbors,
                    const std::vector<double>& band_freqs, double speed_of_sound,
                    std::uint64_t seed) {
  if (band_freqs.empty()) throw ConfigError("lam: at least one band is required");
  LamModel model;
  model.geometry_name = geometry.name();
  model.positions = geometry.positions();
  model.tess = fibonacci_tessellation(n_points, k_neighbors);
  model.k_neighbors = k_neighbors;
  model.speed_of_sound = speed_of_sound;
  for (size_t f = 0; f < band_freqs.size(); ++f) {
    model.steering.push_back(
        steering_matrix(model.positions, model.tess, band_freqs[f], speed_of_sound));
    model.bands.push_back(init_band_model(model.steering.back(), derive_seed(seed, f)));
  }
  return model;
}

namespace {

// Model band f reads sequence band lookup[f].
std::vector<int> band_lookup(const CsmSequence& seq, const LamModel& model) {
  std::vector<int> lookup;
  for (const auto& band : model.bands) {
    int found = -1;
    for (int f = 0; f < seq.bands(); ++f) {
      if (std::abs(seq.band_freqs[f] - band.band_hz) < 1e-6) found = f;
    }
    if (found < 0) {
      throw ConfigError("lam: model band " + std::to_string(band.band_hz) +
                        " Hz is missing from the CSM sequence");
    }
    lookup.push_back(found);
  }
  if (seq.channels != model.channels()) {
    throw ConfigError("lam: CSM sequence has " + std::to_string(seq.channels) +
                      " channels, model expects " + std::to_string(model.channels()));
  }
  return lookup;
}

void forward_one(const CsmSequence& seq, const LamModel& model, const std::vector<int>& lookup,
                 int w, int f, bool keep_trace, ForwardResult& out) {
  LatentTrace trace = denoise(encode(seq.windows[w][lookup[f]].entries, model.bands[f]),
                              model.bands[f]);
  out.maps[w][f].intensities = trace.output();
  out.maps[w][f].band_hz = model.bands[f].band_hz;
  if (keep_trace) out.traces[w][f] = std::move(trace);
}

ForwardResult allocate(const CsmSequence& seq, const LamModel& model, bool keep_trace) {
  ForwardResult out;
  out.maps.assign(seq.window_count(), std::vector<SphericalAcousticMap>(model.band_count()));
  if (keep_trace) {
    out.traces.assign(seq.window_count(), std::vector<LatentTrace>(model.band_count()));
  }
  return out;
}

}  // namespace

ForwardResult forward(const CsmSequence& seq, const LamModel& model, bool keep_trace) {
  const std::vector<int> lookup = band_lookup(seq, model);
  ForwardResult out = allocate(seq, model, keep_trace);
  const int bands = model.band_count();
#pragma omp parallel for collapse(2) schedule(static)
  for (int w = 0; w < seq.window_count(); ++w) {
    for (int f = 0; f < bands; ++f) forward_one(seq, model, lookup, w, f, keep_trace, out);
  }
  return out;
}

namespace serial {

ForwardResult forward(const CsmSequence& seq, const LamModel& model, bool keep_trace) {
  const std::vector<int> lookup = band_lookup(seq, model);
  ForwardResult out = allocate(seq, model, keep_trace);
  for (int w = 0; w < seq.window_count(); ++w) {
    for (int f = 0; f < model.band_count(); ++f) {
      forward_one(seq, model, lookup, w, f, keep_trace, out);
    }
  }
  return out;
}

}  // namespace serial
}  // namespace lam

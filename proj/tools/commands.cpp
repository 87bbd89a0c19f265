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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "lam/beamform.hpp"
#include "lam/checkpoint.hpp"
#include "lam/csm_store.hpp"
#include "lam/dataset.hpp"
#include "lam/doae.hpp"
#include "lam/io_util.hpp"
#include "lam/model.hpp"
#include "lam/train.hpp"
#include "lam/upsampler.hpp"
#include "lam/wav.hpp"

namespace lam::cli {
namespace fs = std::filesystem;

namespace {

ArrayGeometry config_geometry(const ExperimentConfig& cfg) {
  try {
    return ArrayGeometry::resolve(cfg.geometry);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
}

// Geometry matching a store with `channels` microphones: the full array or the
// configured channel subset.
ArrayGeometry geometry_for(const ExperimentConfig& cfg, int channels) {
  const ArrayGeometry full = config_geometry(cfg);
  if (full.channels() == channels) return full;
  if (static_cast<int>(cfg.channels.size()) == channels) return subset_channels(full, cfg.channels);
  throw ConfigError("geometry: " + cfg.geometry + " has " + std::to_string(full.channels()) +
                    " channels but the data has " + std::to_string(channels));
}

fs::path in_out(const Context& ctx, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : ctx.out / p;
}

// Experiment config embedded in checkpoints; output_dir is dropped so reruns
// into different directories stay byte-identical.
std::string embedded_config(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  copy.output_dir.clear();
  return serialize_config(copy);
}

struct Maps {
  MapSequence maps;
  Tessellation tess;
};

Maps compute_maps(const Context& ctx, const MapSource& src, const CsmSequence& seq) {
  Maps out;
  if (!src.checkpoint.empty()) {
    if (!src.method.empty() && src.method != "lam") {
      throw ConfigError("--method and --checkpoint are mutually exclusive");
    }
    const LamModel model = load_checkpoint(src.checkpoint);
    if (model.channels() != seq.channels) {
      throw ConfigError("checkpoint has " + std::to_string(model.channels()) +
                        " channels, CSM store has " + std::to_string(seq.channels));
    }
    out.maps = forward(seq, model).maps;
    out.tess = model.tess;
    return out;
  }
  if (src.method != "das" && src.method != "music") {
    throw ConfigError("--method must be das or music (or pass --checkpoint)");
  }
  const ArrayGeometry geometry = geometry_for(ctx.cfg, seq.channels);
  out.tess = fibonacci_tessellation(ctx.cfg.n_points, ctx.cfg.k_neighbors);
  const auto steering = steering_for_bands(geometry.positions(), out.tess, seq.band_freqs,
                                           ctx.cfg.speed_of_sound);
  out.maps = src.method == "das" ? das_maps(seq, steering)
                                 : music_maps(seq, steering, src.sources);
  return out;
}

void write_ppm(const RasterGrid& grid, const Eigen::VectorXd& values, const fs::path& path) {
  const double hi = values.size() ? values.maxCoeff() : 0.0;
  std::string bytes = "P6\n" + std::to_string(grid.azimuth_bins) + " " +
                      std::to_string(grid.elevation_bins) + "\n255\n";
  for (int e = grid.elevation_bins - 1; e >= 0; --e) {
    for (int a = 0; a < grid.azimuth_bins; ++a) {
      const double v = hi > 0.0 ? values(e * grid.azimuth_bins + a) / hi : 0.0;
      const auto g = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
      bytes.append(3, g);
    }
  }
  write_file_atomic(path, bytes);
}

}  // namespace

int cmd_simulate(const Context& ctx, const SimulateArgs& args) {
  if (args.n_scenes < 1) throw ConfigError("--n-scenes must be >= 1");
  const ArrayGeometry geometry = config_geometry(ctx.cfg);
  DatasetOptions opts;
  opts.distribution = ctx.cfg.simulation;
  opts.csm = ctx.cfg.csm;
  opts.subset_channels = ctx.cfg.channels;
  opts.write_audio = args.write_audio;
  const Manifest m = make_dataset(args.n_scenes, geometry, opts, ctx.cfg.seed, ctx.out);
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "simulated " << m.scenes.size() << " scenes (" << m.split("train").size()
            << " train, " << m.split("validation").size() << " validation) -> "
            << (ctx.out / "manifest.json").string() << "\n";
  return 0;
}

int cmd_csm(const Context& ctx, const CsmArgs& args) {
  MultichannelAudio audio = read_wav(args.input);
  if (args.subset) {
    if (ctx.cfg.channels.empty()) throw ConfigError("--subset needs a non-empty channels list");
    Eigen::MatrixXd rows(ctx.cfg.channels.size(), audio.samples.cols());
    for (size_t i = 0; i < ctx.cfg.channels.size(); ++i) {
      const int c = ctx.cfg.channels[i];
      if (c < 1 || c > audio.samples.rows()) throw ConfigError("channels: index out of range");
      rows.row(static_cast<Eigen::Index>(i)) = audio.samples.row(c - 1);
    }
    audio.samples = rows;
  }
  const CsmSequence seq = csm_sequence(audio, ctx.cfg.csm);
  const fs::path out = args.output.empty()
                           ? ctx.out / (fs::path(args.input).stem().string() + ".lamc")
                           : in_out(ctx, args.output);
  write_csm_store(seq, out);
  std::cout << seq.window_count() << " windows x " << seq.bands() << " bands -> " << out.string()
            << "\n";
  return 0;
}

int cmd_train(const Context& ctx, const TrainArgs& args) {
  const fs::path manifest_path(args.manifest);
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();
  const auto train_entries = manifest.split("train");
  if (train_entries.empty()) throw ConfigError("manifest has no training scenes");

  std::optional<LearnedUpsampler> up;
  if (!args.upsampler.empty()) up = load_upsampler(args.upsampler);
  std::vector<double> freqs =
      up ? up->band_freqs : read_csm_store(root / train_entries.front()->csm).band_freqs;
  if (args.bands < 0) throw ConfigError("--bands must be >= 0");
  if (args.bands > static_cast<int>(freqs.size())) {
    throw ConfigError("--bands " + std::to_string(args.bands) + " exceeds the " +
                      std::to_string(freqs.size()) + " stored bands");
  }
  if (args.bands > 0) freqs.resize(static_cast<size_t>(args.bands));

  const TrainingData train_data =
      load_training_data(manifest, root, "train", freqs, up ? &*up : nullptr);
  const TrainingData val_data =
      load_training_data(manifest, root, "validation", freqs, up ? &*up : nullptr);
  const int channels = up ? up->channels_out : static_cast<int>(train_data.csms[0][0].rows());
  const ArrayGeometry geometry = geometry_for(ctx.cfg, channels);
  const LamModel model = init_model(geometry, ctx.cfg.n_points, ctx.cfg.k_neighbors, freqs,
                                    ctx.cfg.speed_of_sound, ctx.cfg.seed);

  TrainConfig tcfg = ctx.cfg.train;
  tcfg.seed = ctx.cfg.seed;
  const TrainResult result = train(model, train_data, val_data, tcfg, [](const EpochRecord& r) {
    std::printf("epoch %d band %d train %.6e val %.6e\n", r.epoch, r.band, r.train_loss,
                r.val_loss);
    std::fflush(stdout);
  });
  const fs::path ckpt = in_out(ctx, args.checkpoint);
  save_checkpoint(result.model, ckpt, embedded_config(ctx.cfg));
  write_report_csv(result.report, ctx.out / "train_report.csv");
  for (size_t f = 0; f < result.report.best_epoch.size(); ++f) {
    std::printf("band %zu (%.1f Hz): best epoch %d\n", f, freqs[f], result.report.best_epoch[f]);
  }
  std::cout << "checkpoint -> " << ckpt.string() << "\n";
  return 0;
}

int cmd_check_grads(const Context& ctx, const CheckGradsArgs& args) {
  if (args.pairs < 1) throw ConfigError("--pairs must be >= 1");
  LamModel model;
  std::optional<CsmSequence> store;
  if (!args.csm.empty()) store = read_csm_store(args.csm);
  if (!args.checkpoint.empty()) {
    model = load_checkpoint(args.checkpoint);
  } else {
    const int channels = store ? store->channels : config_geometry(ctx.cfg).channels();
    std::vector<double> freqs;
    if (store) {
      freqs = store->band_freqs;
    } else {
      const CsmConfig& c = ctx.cfg.csm;
      for (int f = 0; f < c.n_bands; ++f) {
        freqs.push_back(c.n_bands == 1 ? c.f_lo
                                       : c.f_lo + (c.f_hi - c.f_lo) * f / (c.n_bands - 1));
      }
    }
    model = init_model(geometry_for(ctx.cfg, channels), ctx.cfg.n_points, ctx.cfg.k_neighbors,
                       freqs, ctx.cfg.speed_of_sound, ctx.cfg.seed);
  }

  GradCheckOptions opts;
  opts.tolerance = args.tolerance;
  opts.parameters = args.parameters;
  opts.gamma = ctx.cfg.train.gamma;
  double worst = 0.0;
  bool ok = true;
  for (int p = 0; p < args.pairs; ++p) {
    const std::uint64_t seed = derive_seed(ctx.cfg.seed, 0x6700 + static_cast<std::uint64_t>(p));
    std::mt19937_64 rng(seed);
    const int f = static_cast<int>(rng() % static_cast<std::uint64_t>(model.band_count()));
    LamBandModel band = model.bands[f];
    Eigen::MatrixXcd c;
    if (store) {
      if (store->window_count() == 0) throw ConfigError("CSM store has no windows");
      const int w = static_cast<int>(rng() % static_cast<std::uint64_t>(store->window_count()));
      const int sb = [&] {
        for (int b = 0; b < store->bands(); ++b) {
          if (std::abs(store->band_freqs[b] - band.band_hz) < 1e-6) return b;
        }
        throw ConfigError("CSM store lacks band " + std::to_string(band.band_hz) + " Hz");
      }();
      c = store->windows[w][sb].entries;
    } else {
      std::uniform_real_distribution<double> u(0.2, 1.0);
      const int n_src = 1 + static_cast<int>(rng() % 3);
      std::vector<Eigen::Vector3d> dirs;
      std::vector<double> powers;
      for (int s = 0; s < n_src; ++s) {
        dirs.push_back(random_direction(rng()));
        powers.push_back(u(rng));
      }
      c = synthetic_csm(model.positions, dirs, powers, 0.05, band.band_hz, model.speed_of_sound);
    }
    // Random biases on the scale of the back-projection keep a mix of active
    // and inactive units.
    const double scale = encode(c, band).cwiseAbs().mean();
    std::uniform_real_distribution<double> ub(-0.2, 0.2);
    for (double& b : band.biases) b = ub(rng) * scale;
    opts.seed = seed;
    const GradCheckReport r = check_gradients(band, model.steering[f], model.tess.neighbors, c, opts);
    std::printf("pair %d band %d: max rel err %.3e over %d params (%d near kinks) %s\n", p, f,
                r.max_relative_error, r.checked, r.excluded_kinks, r.passed ? "ok" : "FAIL");
    worst = std::max(worst, r.max_relative_error);
    ok = ok && r.passed;
  }
  std::printf("worst relative error %.3e (tolerance %.1e): %s\n", worst, args.tolerance,
              ok ? "PASS" : "FAIL");
  return ok ? 0 : 4;
}

int cmd_map(const Context& ctx, const MapArgs& args) {
  const CsmSequence seq = read_csm_store(args.source.csm);
  if (args.window < 0 || args.window >= seq.window_count()) {
    throw ConfigError("--window " + std::to_string(args.window) + " out of range [0, " +
                      std::to_string(seq.window_count()) + ")");
  }
  CsmSequence one = seq;
  one.windows = {seq.windows[args.window]};
  const Maps m = compute_maps(ctx, args.source, one);
  const auto& bands = m.maps.front();

  std::ostringstream csv;
  csv << "node,azimuth_deg,elevation_deg";
  for (const auto& b : bands) csv << ",band_" << b.band_hz;
  csv << ",sum\n";
  csv.precision(10);
  const Eigen::VectorXd fused = fuse_bands(bands);
  for (int n = 0; n < m.tess.size(); ++n) {
    const AzEl ae = to_azel(m.tess.point(n));
    csv << n << "," << ae.azimuth_deg << "," << ae.elevation_deg;
    for (const auto& b : bands) csv << "," << b.intensities(n);
    csv << "," << fused(n) << "\n";
  }
  write_file_atomic(ctx.out / (args.prefix + ".csv"), csv.str());

  const RasterGrid grid =
      make_raster_grid(m.tess, ctx.cfg.doae.azimuth_bins, ctx.cfg.doae.elevation_bins);
  const RasterMap raster = rasterize(bands, grid);
  write_ppm(grid, raster.summed(), ctx.out / (args.prefix + ".ppm"));
  for (int f = 0; f < raster.band_count(); ++f) {
    write_ppm(grid, raster.bands[f], ctx.out / (args.prefix + "_band" + std::to_string(f) + ".ppm"));
  }
  const Eigen::VectorXd summed = raster.summed();
  Eigen::Index peak = 0;
  summed.maxCoeff(&peak);
  const Eigen::Vector3d dir = grid.cell_direction(static_cast<int>(peak));
  const AzEl ae = to_azel(dir);
  std::printf("peak azimuth %.1f elevation %.1f -> %s\n", ae.azimuth_deg, ae.elevation_deg,
              (ctx.out / (args.prefix + ".ppm")).string().c_str());
  return 0;
}

int cmd_doae(const Context& ctx, const DoaeArgs& args) {
  const CsmSequence seq = read_csm_store(args.source.csm);
  const Maps m = compute_maps(ctx, args.source, seq);
  KMeansParams params = ctx.cfg.doae;
  params.seed = ctx.cfg.seed;
  std::vector<std::vector<DoaEstimate>> per_window = doae_sequence(m.maps, m.tess, params);

  std::vector<double> centers;
  for (int w = 0; w < seq.window_count(); ++w) {
    // Digitally silent windows yield no estimates.
    double energy = 0.0;
    for (const auto& c : seq.windows[w]) energy += std::abs(c.entries.trace().real());
    if (!(energy > 0.0)) per_window[w].clear();
    centers.push_back(seq.windows[w].empty() ? 0.0 : seq.windows[w].front().timestamp);
  }

  const double frame_length = ctx.cfg.simulation.label_frame;
  int n_frames = args.frames;
  if (!args.ground_truth.empty()) {
    n_frames = read_ground_truth_csv(args.ground_truth, frame_length).frame_count();
  } else if (n_frames < 0) {
    // Window centres sit half a window after the start; mirror that at the end.
    const double duration = centers.empty() ? 0.0 : centers.back() + centers.front();
    n_frames = static_cast<int>(std::ceil(duration / frame_length - 1e-9));
  }
  const auto frames = windows_to_frames(per_window, centers, n_frames, frame_length);
  const fs::path out = in_out(ctx, args.output);
  write_estimates_csv(frames, out);
  size_t count = 0;
  for (const auto& f : frames) count += f.size();
  std::cout << count << " estimates over " << frames.size() << " frames -> " << out.string()
            << "\n";
  return 0;
}

int cmd_eval(const Context& ctx, const EvalArgs& args) {
  const auto estimates = read_estimates_csv(args.estimates);
  const GroundTruth truth = read_ground_truth_csv(args.ground_truth, ctx.cfg.simulation.label_frame);
  const double gate = args.gate_deg.value_or(ctx.cfg.gate_deg);
  const EvalResult r = evaluate(estimates, truth, gate);
  write_eval_report(r, ctx.out / (args.prefix + ".json"), ctx.out / (args.prefix + "_frames.csv"));
  std::printf("LE %.2f LR %.1f\n", r.le_deg, r.lr_percent);
  return 0;
}

int cmd_upsample_train(const Context& ctx, const UpsampleTrainArgs& args) {
  const fs::path manifest_path(args.manifest);
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();

  auto collect = [&](const std::string& split, std::vector<double>& freqs) {
    std::vector<std::vector<CsmPair>> pairs;
    for (const ManifestEntry* e : manifest.split(split)) {
      if (e->csm_subset.empty()) throw ConfigError("manifest has no paired subset stores");
      const CsmSequence hi = read_csm_store(root / e->csm);
      const CsmSequence lo = read_csm_store(root / e->csm_subset);
      if (hi.window_count() != lo.window_count() || hi.band_freqs != lo.band_freqs) {
        throw ConfigError(e->id + ": paired stores disagree in layout");
      }
      if (freqs.empty()) freqs = hi.band_freqs;
      if (pairs.empty()) pairs.resize(freqs.size());
      for (int w = 0; w < hi.window_count(); ++w) {
        for (int f = 0; f < hi.bands(); ++f) {
          pairs[f].push_back({lo.windows[w][f].entries, hi.windows[w][f].entries});
        }
      }
    }
    return pairs;
  };
  std::vector<double> freqs;
  const auto train_pairs = collect("train", freqs);
  if (train_pairs.empty()) throw ConfigError("manifest has no training scenes");
  const LearnedUpsampler up = fit_upsampler(freqs, train_pairs, args.ridge);
  const fs::path out = in_out(ctx, args.output);
  save_upsampler(up, out);

  std::vector<double> vfreqs;
  const auto val_pairs = collect("validation", vfreqs);
  double err = 0.0;
  int n = 0;
  for (size_t f = 0; f < val_pairs.size(); ++f) {
    for (const auto& p : val_pairs[f]) {
      CrossSpectralMatrix low;
      low.entries = p.low;
      low.band_hz = freqs[f];
      err += relative_frobenius_error(upsample_csm(low, up).entries, p.high);
      ++n;
    }
  }
  std::printf("fitted %d -> %d channels on %zu bands", up.channels_in, up.channels_out,
              freqs.size());
  if (n > 0) std::printf("; held-out relative error %.4f over %d CSMs", err / n, n);
  std::printf("\nupsampler -> %s\n", out.string().c_str());
  return 0;
}

}  // namespace lam::cli

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

// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "lam/beamform.hpp"
#include "lam/model.hpp"
#include "lam/simulator.hpp"

namespace {

struct Fixture {
  lam::MultichannelAudio audio;
  lam::CsmConfig cfg;
  lam::CsmSequence seq;
  lam::LamModel model;
  std::vector<lam::SteeringMatrix> steering;

  Fixture() {
    const auto geometry = lam::ArrayGeometry::builtin("em32");
    lam::SceneSpec spec;
    spec.duration = 2.0;
    spec.snr_db = 20.0;
    spec.seed = 11;
    lam::SourceTrajectory src;
    src.sample_rate = 48000.0;
    src.waveform = lam::generate_waveform(lam::WaveformKind::kWhiteNoise, 96000, 48000.0, 5);
    src.track = {{0.0, lam::from_azel(40.0, 10.0)}};
    spec.sources = {src};
    audio = lam::render_scene(spec).audio;
    cfg.n_bands = 4;
    seq = lam::csm_sequence(audio, cfg);
    model = lam::init_model(geometry, 242, 6, seq.band_freqs, lam::kDefaultSpeedOfSound, 3);
    steering = model.steering;
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_CsmSequenceSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::serial::csm_sequence(f.audio, f.cfg));
}
void BM_CsmSequenceParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::csm_sequence(f.audio, f.cfg));
}

void BM_DasSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::serial::das_maps(f.seq, f.steering));
}
void BM_DasParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::das_maps(f.seq, f.steering));
}

void BM_MusicSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::serial::music_maps(f.seq, f.steering, 1));
}
void BM_MusicParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::music_maps(f.seq, f.steering, 1));
}

void BM_ForwardSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::serial::forward(f.seq, f.model));
}
void BM_ForwardParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(lam::forward(f.seq, f.model));
}

}  // namespace

BENCHMARK(BM_CsmSequenceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CsmSequenceParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DasSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DasParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MusicSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MusicParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

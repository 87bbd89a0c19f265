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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <omp.h>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lam/common.hpp"

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Timestamps live here, never in the artifacts themselves.
void append_log(const std::filesystem::path& dir, const std::string& line) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream log(dir / "run.log", std::ios::app);
  if (log) log << utc_now() << " " << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lam: spherical acoustic mapping and direction-of-arrival tools"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--out", out_dir, "output directory (overrides config output_dir)");

  namespace cli = lam::cli;
  cli::SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "render a synthetic dataset");
  c_sim->add_option("--n-scenes", sim.n_scenes, "number of scenes");
  c_sim->add_flag("!--no-audio", sim.write_audio, "skip writing WAV files");

  cli::CsmArgs csm;
  auto* c_csm = app.add_subcommand("csm", "compute a CSM store from a WAV file");
  c_csm->add_option("--input", csm.input)->required();
  c_csm->add_option("--output", csm.output);
  c_csm->add_flag("--subset", csm.subset, "use the configured channel subset");

  cli::TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "self-supervised training");
  c_train->add_option("--manifest", tr.manifest)->required();
  c_train->add_option("--upsampler", tr.upsampler, "train on upsampled subset stores");
  c_train->add_option("--bands", tr.bands, "use the first N bands (0 = all)");
  c_train->add_option("--checkpoint", tr.checkpoint, "checkpoint file name");

  cli::CheckGradsArgs cg;
  auto* c_cg = app.add_subcommand("check-grads", "finite-difference gradient check");
  c_cg->add_option("--checkpoint", cg.checkpoint);
  c_cg->add_option("--csm", cg.csm);
  c_cg->add_option("--pairs", cg.pairs);
  c_cg->add_option("--parameters", cg.parameters);
  c_cg->add_option("--tolerance", cg.tolerance);

  auto add_source = [](CLI::App* c, cli::MapSource& s) {
    c->add_option("--csm", s.csm, "CSM store")->required();
    c->add_option("--checkpoint", s.checkpoint, "LAM checkpoint");
    c->add_option("--method", s.method, "das | music (without --checkpoint)");
    c->add_option("--sources", s.sources, "MUSIC signal subspace size");
  };
  cli::MapArgs mp;
  auto* c_map = app.add_subcommand("map", "export acoustic maps");
  add_source(c_map, mp.source);
  c_map->add_option("--window", mp.window);
  c_map->add_option("--prefix", mp.prefix);

  cli::DoaeArgs da;
  auto* c_doae = app.add_subcommand("doae", "K-means direction estimates per frame");
  add_source(c_doae, da.source);
  c_doae->add_option("--ground-truth", da.ground_truth, "take the frame grid from this CSV");
  c_doae->add_option("--frames", da.frames);
  c_doae->add_option("--output", da.output);

  cli::EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "localization error and recall");
  c_eval->add_option("--estimates", ev.estimates)->required();
  c_eval->add_option("--ground-truth", ev.ground_truth)->required();
  c_eval->add_option("--gate-deg", ev.gate_deg);
  c_eval->add_option("--prefix", ev.prefix);

  cli::UpsampleTrainArgs ut;
  auto* c_ut = app.add_subcommand("upsample-train", "fit the CSM upsampler");
  c_ut->add_option("--manifest", ut.manifest)->required();
  c_ut->add_option("--ridge", ut.ridge);
  c_ut->add_option("--output", ut.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::filesystem::path log_dir;  // set once the output directory is known
  std::string command = app.get_subcommands().front()->get_name();
  int rc = 1;
  try {
    cli::Context ctx;
    if (!config_path.empty()) ctx.cfg = lam::load_config(config_path);
    if (seed) {
      ctx.cfg.seed = *seed;
      ctx.cfg.train.seed = *seed;
      ctx.cfg.doae.seed = *seed;
    }
    if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
    ctx.out = ctx.cfg.output_dir;
    log_dir = ctx.out;
    if (threads < 0) throw lam::ConfigError("--threads must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);
    std::filesystem::create_directories(ctx.out);
    append_log(log_dir, "start " + command);

    if (command == "simulate") rc = cli::cmd_simulate(ctx, sim);
    else if (command == "csm") rc = cli::cmd_csm(ctx, csm);
    else if (command == "train") rc = cli::cmd_train(ctx, tr);
    else if (command == "check-grads") rc = cli::cmd_check_grads(ctx, cg);
    else if (command == "map") rc = cli::cmd_map(ctx, mp);
    else if (command == "doae") rc = cli::cmd_doae(ctx, da);
    else if (command == "eval") rc = cli::cmd_eval(ctx, ev);
    else if (command == "upsample-train") rc = cli::cmd_upsample_train(ctx, ut);
  } catch (const lam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    rc = 2;
  } catch (const lam::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    rc = 3;
  } catch (const lam::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    rc = 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    rc = 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = 1;
  }
  if (!log_dir.empty()) append_log(log_dir, "end " + command + " exit=" + std::to_string(rc));
  return rc;
}

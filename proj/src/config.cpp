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

#include "lam/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "lam/io_util.hpp"

namespace lam {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer()) throw ConfigError("");
        out = it->template get<int>();
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<long long>() >= 0)) {
          throw ConfigError("");
        }
        out = it->template get<std::uint64_t>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError("");
        out = it->template get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
        out = it->template get<bool>();
      } else {
        out = it->template get<T>();
      }
    } catch (const std::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key().c_str()) + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (geometry.empty()) throw ConfigError("geometry must not be empty");
  for (int c : channels) {
    if (c < 1) throw ConfigError("channels entries are 1-based and must be >= 1");
  }
  if (n_points < 2) throw ConfigError("tessellation.n_points must be >= 2");
  if (k_neighbors < 1 || k_neighbors >= n_points) {
    throw ConfigError("tessellation.k_neighbors must be in [1, n_points)");
  }
  positive(speed_of_sound, "speed_of_sound");
  if (csm.window_len < 2) throw ConfigError("stft.window_len must be >= 2");
  if (csm.hop < 1 || csm.hop > csm.window_len) throw ConfigError("stft.hop must be in [1, window_len]");
  if (csm.frames_per_csm < 1) throw ConfigError("frames_per_csm must be >= 1");
  positive(csm.f_lo, "bands.f_lo");
  if (!(csm.f_hi >= csm.f_lo)) throw ConfigError("bands.f_hi must be >= bands.f_lo");
  if (csm.n_bands < 1) throw ConfigError("bands.count must be >= 1");
  if (csm.bin_halfwidth < 0) throw ConfigError("bands.bin_halfwidth must be >= 0");
  train.validate();
  if (doae.clusters < 1) throw ConfigError("doae.clusters must be >= 1");
  if (doae.top_cells < 1) throw ConfigError("doae.top_cells must be >= 1");
  if (!(doae.merge_deg >= 0.0)) throw ConfigError("doae.merge_deg must be >= 0");
  if (doae.max_iterations < 1) throw ConfigError("doae.max_iterations must be >= 1");
  if (doae.azimuth_bins < 2 || doae.elevation_bins < 2) {
    throw ConfigError("doae.azimuth_bins and doae.elevation_bins must be >= 2");
  }
  if (!(gate_deg > 0.0)) throw ConfigError("doae.gate_deg must be positive");
  positive(simulation.sample_rate, "simulation.sample_rate");
  positive(simulation.duration, "simulation.duration");
  positive(simulation.label_frame, "simulation.label_frame");
  if (simulation.min_sources < 0 || simulation.max_sources < simulation.min_sources) {
    throw ConfigError("simulation.min_sources/max_sources out of range");
  }
  if (simulation.snr_db_max < simulation.snr_db_min) {
    throw ConfigError("simulation.snr_db_max must be >= snr_db_min");
  }
  if (simulation.moving_fraction < 0.0 || simulation.moving_fraction > 1.0) {
    throw ConfigError("simulation.moving_fraction must be in [0, 1]");
  }
  if (csm.f_hi > simulation.sample_rate / 2.0) {
    throw ConfigError("bands.f_hi exceeds the Nyquist frequency of simulation.sample_rate");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(root, "");
  top.read("geometry", cfg.geometry);
  top.read("channels", cfg.channels);
  top.read("speed_of_sound", cfg.speed_of_sound);
  top.read("frames_per_csm", cfg.csm.frames_per_csm);
  top.read("seed", cfg.seed);
  top.read("output_dir", cfg.output_dir);
  if (const json* j = top.child("tessellation")) {
    Section s(*j, "tessellation");
    s.read("n_points", cfg.n_points);
    s.read("k_neighbors", cfg.k_neighbors);
    s.finish();
  }
  if (const json* j = top.child("stft")) {
    Section s(*j, "stft");
    s.read("window_len", cfg.csm.window_len);
    s.read("hop", cfg.csm.hop);
    s.finish();
  }
  if (const json* j = top.child("bands")) {
    Section s(*j, "bands");
    s.read("f_lo", cfg.csm.f_lo);
    s.read("f_hi", cfg.csm.f_hi);
    s.read("count", cfg.csm.n_bands);
    s.read("bin_halfwidth", cfg.csm.bin_halfwidth);
    s.finish();
  }
  if (const json* j = top.child("train")) {
    Section s(*j, "train");
    s.read("learning_rate", cfg.train.learning_rate);
    s.read("gamma", cfg.train.gamma);
    s.read("batch_size", cfg.train.batch_size);
    s.read("max_epochs", cfg.train.max_epochs);
    s.read("patience", cfg.train.patience);
    s.read("divergence_factor", cfg.train.divergence_factor);
    s.finish();
  }
  if (const json* j = top.child("doae")) {
    Section s(*j, "doae");
    s.read("clusters", cfg.doae.clusters);
    s.read("top_cells", cfg.doae.top_cells);
    s.read("merge_deg", cfg.doae.merge_deg);
    s.read("max_iterations", cfg.doae.max_iterations);
    s.read("tolerance_rad", cfg.doae.tolerance_rad);
    s.read("azimuth_bins", cfg.doae.azimuth_bins);
    s.read("elevation_bins", cfg.doae.elevation_bins);
    if (const json* g = s.child("gate_deg")) {
      if (g->is_null()) {
        cfg.gate_deg = std::numeric_limits<double>::infinity();
      } else if (g->is_number()) {
        cfg.gate_deg = g->get<double>();
      } else {
        throw ConfigError("doae.gate_deg: wrong type");
      }
    }
    s.finish();
  }
  if (const json* j = top.child("simulation")) {
    Section s(*j, "simulation");
    auto& d = cfg.simulation;
    s.read("sample_rate", d.sample_rate);
    s.read("duration", d.duration);
    s.read("min_sources", d.min_sources);
    s.read("max_sources", d.max_sources);
    s.read("snr_db_min", d.snr_db_min);
    s.read("snr_db_max", d.snr_db_max);
    s.read("min_separation_deg", d.min_separation_deg);
    s.read("moving_fraction", d.moving_fraction);
    s.read("angular_speed_deg", d.angular_speed_deg);
    s.read("label_frame", d.label_frame);
    std::string waveform = to_string(d.waveform);
    s.read("waveform", waveform);
    d.waveform = parse_waveform_kind(waveform);
    s.finish();
  }
  top.finish();
  cfg.train.seed = cfg.seed;
  cfg.doae.seed = cfg.seed;
  cfg.simulation.speed_of_sound = cfg.speed_of_sound;
  cfg.validate();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ojson j;
  j["geometry"] = cfg.geometry;
  j["channels"] = cfg.channels;
  j["tessellation"] = {{"n_points", cfg.n_points}, {"k_neighbors", cfg.k_neighbors}};
  j["speed_of_sound"] = cfg.speed_of_sound;
  j["stft"] = {{"window_len", cfg.csm.window_len}, {"hop", cfg.csm.hop}};
  j["bands"] = {{"f_lo", cfg.csm.f_lo},
                {"f_hi", cfg.csm.f_hi},
                {"count", cfg.csm.n_bands},
                {"bin_halfwidth", cfg.csm.bin_halfwidth}};
  j["frames_per_csm"] = cfg.csm.frames_per_csm;
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"gamma", cfg.train.gamma},
                {"batch_size", cfg.train.batch_size},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience},
                {"divergence_factor", cfg.train.divergence_factor}};
  ojson doae = {{"clusters", cfg.doae.clusters},
                {"top_cells", cfg.doae.top_cells},
                {"merge_deg", cfg.doae.merge_deg},
                {"max_iterations", cfg.doae.max_iterations},
                {"tolerance_rad", cfg.doae.tolerance_rad},
                {"azimuth_bins", cfg.doae.azimuth_bins},
                {"elevation_bins", cfg.doae.elevation_bins}};
  if (std::isfinite(cfg.gate_deg)) {
    doae["gate_deg"] = cfg.gate_deg;
  } else {
    doae["gate_deg"] = nullptr;
  }
  j["doae"] = doae;
  const auto& d = cfg.simulation;
  j["simulation"] = {{"sample_rate", d.sample_rate},
                     {"duration", d.duration},
                     {"min_sources", d.min_sources},
                     {"max_sources", d.max_sources},
                     {"snr_db_min", d.snr_db_min},
                     {"snr_db_max", d.snr_db_max},
                     {"min_separation_deg", d.min_separation_deg},
                     {"moving_fraction", d.moving_fraction},
                     {"angular_speed_deg", d.angular_speed_deg},
                     {"label_frame", d.label_frame},
                     {"waveform", to_string(d.waveform)}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace lam

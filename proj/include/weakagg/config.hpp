// Copyright 2026 The weakagg Authors
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

// JSON run configuration. Top-level sections mirror the library structs:
//
//   {
//     "train":  { "model": {...}, "optimizer": {...}, "epochs": 50, "seed": 1,
//                 "shuffle_each_epoch": true, "protocol": "individual" },
//     "synth":  { "participants": 8, ..., "seed": 7 },
//     "filter": { "excluded_persons": ["P03"], "exclude_warmup_trial": true,
//                 "max_frames_per_bag": 32, "frame_exclusion_list": {"P01_T01_I01": [0, 4]} },
//     "folds":  [["P02", "P07"], ["P01", "P04"]]
//   }
//
// Unknown keys are rejected so a misspelt field cannot silently fall back to
// its default.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakagg/dataset.hpp"
#include "weakagg/error.hpp"
#include "weakagg/harness.hpp"

namespace weakagg {

struct RunConfig {
  TrainConfig train;
  SynthConfig synth;
  CorpusFilter filter;
  std::optional<std::vector<std::set<std::string>>> folds;

  // Which fields the file set explicitly; the CLI fills the rest from
  // flags, the environment or per-protocol defaults.
  bool has_epochs = false;
  bool has_train_seed = false;
  bool has_synth_seed = false;
  bool has_embed_dim = false;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
bool read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return false;
  out = obj.at(key).get<T>();
  return true;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::read_field;
  RunConfig cfg;
  try {
    detail::reject_unknown(j, {"train", "synth", "filter", "folds"}, "config");
    if (j.contains("train")) {
      const auto& t = j.at("train");
      detail::reject_unknown(t, {"model", "optimizer", "epochs", "seed", "shuffle_each_epoch", "protocol"},
                             "train");
      if (t.contains("model")) {
        const auto& m = t.at("model");
        detail::reject_unknown(m, {"embed_dim", "proj_dim", "score_dim", "transform_dim", "out_dim"},
                               "train.model");
        cfg.has_embed_dim = read_field(m, "embed_dim", cfg.train.model.embed_dim);
        read_field(m, "proj_dim", cfg.train.model.proj_dim);
        read_field(m, "score_dim", cfg.train.model.score_dim);
        read_field(m, "transform_dim", cfg.train.model.transform_dim);
        read_field(m, "out_dim", cfg.train.model.out_dim);
      }
      if (t.contains("optimizer")) {
        const auto& o = t.at("optimizer");
        detail::reject_unknown(o, {"lr", "beta1", "beta2", "eps", "weight_decay"}, "train.optimizer");
        read_field(o, "lr", cfg.train.optimizer.lr);
        read_field(o, "beta1", cfg.train.optimizer.beta1);
        read_field(o, "beta2", cfg.train.optimizer.beta2);
        read_field(o, "eps", cfg.train.optimizer.eps);
        read_field(o, "weight_decay", cfg.train.optimizer.weight_decay);
      }
      cfg.has_epochs = read_field(t, "epochs", cfg.train.epochs);
      cfg.has_train_seed = read_field(t, "seed", cfg.train.seed);
      read_field(t, "shuffle_each_epoch", cfg.train.shuffle_each_epoch);
      if (t.contains("protocol")) cfg.train.protocol = parse_protocol(t.at("protocol").get<std::string>());
    }
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      detail::reject_unknown(s, {"participants", "bags_per_participant", "frames_per_bag", "embed_dim",
                                 "key_frame_signal_dim", "noise_std", "key_frame_marker",
                                 "valence_mean", "valence_std", "arousal_mean", "arousal_std", "seed"},
                             "synth");
      read_field(s, "participants", cfg.synth.participants);
      read_field(s, "bags_per_participant", cfg.synth.bags_per_participant);
      read_field(s, "frames_per_bag", cfg.synth.frames_per_bag);
      read_field(s, "embed_dim", cfg.synth.embed_dim);
      read_field(s, "key_frame_signal_dim", cfg.synth.key_frame_signal_dim);
      read_field(s, "noise_std", cfg.synth.noise_std);
      read_field(s, "key_frame_marker", cfg.synth.key_frame_marker);
      read_field(s, "valence_mean", cfg.synth.valence_mean);
      read_field(s, "valence_std", cfg.synth.valence_std);
      read_field(s, "arousal_mean", cfg.synth.arousal_mean);
      read_field(s, "arousal_std", cfg.synth.arousal_std);
      cfg.has_synth_seed = read_field(s, "seed", cfg.synth.seed);
    }
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      detail::reject_unknown(f, {"excluded_persons", "exclude_warmup_trial", "max_frames_per_bag",
                                 "frame_exclusion_list"},
                             "filter");
      read_field(f, "excluded_persons", cfg.filter.excluded_persons);
      read_field(f, "exclude_warmup_trial", cfg.filter.exclude_warmup_trial);
      if (f.contains("max_frames_per_bag")) {
        const auto& v = f.at("max_frames_per_bag");
        cfg.filter.max_frames_per_bag =
            v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
      }
      read_field(f, "frame_exclusion_list", cfg.filter.frame_exclusions);
    }
    if (j.contains("folds")) cfg.folds = j.at("folds").get<std::vector<std::set<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

/// Seed fallback from WEAKAGG_SEED, the lowest-precedence seed source.
inline std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("WEAKAGG_SEED");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw Error(ErrorKind::Config, std::string("WEAKAGG_SEED is not an integer: ") + raw);
  return static_cast<std::uint64_t>(v);
}

}  // namespace weakagg

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

// Training loop, evaluation, the individual / universal / fine-tune
// protocols, checkpoint persistence and result tables.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakagg/aggregator.hpp"
#include "weakagg/bag.hpp"
#include "weakagg/dataset.hpp"
#include "weakagg/error.hpp"
#include "weakagg/metrics.hpp"
#include "weakagg/optim.hpp"

namespace weakagg {

enum class Protocol { Plain, Individual, Universal, Finetune };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Plain: return "plain";
    case Protocol::Individual: return "individual";
    case Protocol::Universal: return "universal";
    case Protocol::Finetune: return "finetune";
  }
  return "plain";
}

inline Protocol parse_protocol(std::string_view name) {
  if (name == "plain") return Protocol::Plain;
  if (name == "individual") return Protocol::Individual;
  if (name == "universal") return Protocol::Universal;
  if (name == "finetune") return Protocol::Finetune;
  throw Error(ErrorKind::Config, "unknown protocol '" + std::string(name) + "'");
}

/// Universal models train for 100 epochs, everything else for 50.
inline std::size_t default_epochs(Protocol p) { return p == Protocol::Universal ? 100 : 50; }

struct TrainConfig {
  ModelConfig model;
  AdamWConfig optimizer;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = true;
  Protocol protocol = Protocol::Plain;

  void validate() const {
    model.validate();
    optimizer.validate();
    if (epochs == 0) throw Error(ErrorKind::Config, "epochs must be >= 1");
  }
};

struct Checkpoint {
  ModelConfig model;
  Vector params;
  AdamWState optimizer;
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  std::string corpus_fingerprint;
  std::set<std::string> training_persons;

  AggregatorParams aggregator() const { return unflatten_params(model, params); }

  bool operator==(const Checkpoint&) const = default;
};

struct RunLog {
  std::vector<double> epoch_loss;
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

/// FNV-1a over bag ids, label bits and frame bits, rendered as 16 hex digits.
inline std::string corpus_fingerprint(std::span<const Bag> bags) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix_bytes = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  auto mix_u64 = [&](std::uint64_t v) { mix_bytes(&v, sizeof v); };
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    mix_u64(bits);
  };
  mix_u64(bags.size());
  for (const auto& bag : bags) {
    const std::string name = bag.id.folder_name();
    mix_u64(name.size());
    mix_bytes(name.data(), name.size());
    mix_double(bag.label.valence);
    mix_double(bag.label.arousal);
    mix_double(bag.label.comfort);
    mix_u64(bag.frames.size());
    for (const auto& f : bag.frames) {
      mix_u64(f.size());
      for (double v : f) mix_double(v);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Per-bag stepping: forward -> loss -> backward -> AdamW, one bag at a time.
/// With `init`, training starts from its parameters with a fresh optimizer
/// state. Model initialisation and the shuffle order derive from cfg.seed.
inline std::pair<Checkpoint, RunLog> train(std::span<const Bag> corpus, const TrainConfig& cfg,
                                           const Checkpoint* init = nullptr) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorKind::InsufficientData, "training corpus is empty");
  for (const auto& bag : corpus) {
    if (bag.frames.empty()) {
      throw Error(ErrorKind::EmptyBag, "bag " + bag.id.folder_name() + " has no frames");
    }
  }
  const auto start = std::chrono::steady_clock::now();

  AggregatorParams params;
  if (init) {
    if (!(init->model == cfg.model)) {
      throw Error(ErrorKind::Config, "initial checkpoint model config differs from training config");
    }
    params = init->aggregator();
  } else {
    params = init_params(cfg.model, cfg.seed);
  }
  Vector theta = flatten_params(params);
  AdamWState state = adamw_init(theta.size());

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);

  RunLog log;
  log.epoch_loss.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (const std::size_t idx : order) {
      const Bag& bag = corpus[idx];
      const auto cache = forward(params, bag.frames);
      total += loss(cache.output, bag.label);
      const Vector grad = flatten_params(backward(params, cache, bag.label));
      if (!all_finite(grad)) {
        throw Error(ErrorKind::Numeric, "non-finite gradient in epoch " + std::to_string(epoch + 1));
      }
      adamw_step(theta, grad, state, cfg.optimizer);
      params = unflatten_params(cfg.model, theta);
    }
    const double mean = total / static_cast<double>(corpus.size());
    if (!std::isfinite(mean)) {
      throw Error(ErrorKind::Numeric, "non-finite training loss in epoch " + std::to_string(epoch + 1));
    }
    log.epoch_loss.push_back(mean);
  }

  Checkpoint ckpt;
  ckpt.model = cfg.model;
  ckpt.params = std::move(theta);
  ckpt.optimizer = std::move(state);
  ckpt.epoch = cfg.epochs + (init ? init->epoch : 0);
  ckpt.seed = cfg.seed;
  ckpt.corpus_fingerprint = corpus_fingerprint(corpus);
  ckpt.training_persons = init ? init->training_persons : std::set<std::string>{};
  for (const auto& bag : corpus) ckpt.training_persons.insert(bag.id.person);
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(ckpt), std::move(log)};
}

struct Prediction {
  BagId id;
  LabelPair truth;
  Vector output;
  Vector attention;
};

inline std::vector<Prediction> predict(const Checkpoint& ckpt, std::span<const Bag> bags) {
  const auto params = ckpt.aggregator();
  std::vector<Prediction> out;
  out.reserve(bags.size());
  for (const auto& bag : bags) {
    auto cache = forward(params, bag.frames);
    out.push_back(Prediction{bag.id, bag.label, std::move(cache.output), std::move(cache.attention)});
  }
  return out;
}

inline MetricsReport evaluate(const Checkpoint& ckpt, std::span<const Bag> bags) {
  if (bags.empty()) throw Error(ErrorKind::InsufficientData, "evaluation set is empty");
  if (ckpt.model.out_dim != 2) {
    throw Error(ErrorKind::Shape, "evaluation expects a two-output (valence, arousal) model");
  }
  const auto preds = predict(ckpt, bags);
  Vector tv, pv, ta, pa;
  for (const auto& p : preds) {
    tv.push_back(p.truth.valence);
    pv.push_back(p.output[0]);
    ta.push_back(p.truth.arousal);
    pa.push_back(p.output[1]);
  }
  return report(PairedSeries{tv, pv}, PairedSeries{ta, pa});
}

// ---------------------------------------------------------------------------
// Result tables

struct TableRow {
  std::string label;
  MetricsReport metrics;
};

/// Per-person rows followed by Mean and Std rows when rendered.
struct ResultTable {
  std::vector<TableRow> rows;
};

inline constexpr const char* kTableHeader =
    "Participant ID,Valence CCC,Valence PCC,Valence RMSE,Arousal CCC,Arousal PCC,Arousal RMSE";

/// "P07" -> "7", matching the participant column of the result tables.
inline std::string participant_label(const std::string& person) {
  if (person.size() == 3 && person[0] == 'P') return std::to_string(std::stoi(person.substr(1)));
  return person;
}

inline std::string table_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("NA");
}

inline std::string table_csv(const ResultTable& table) {
  std::string out = std::string(kTableHeader) + "\n";
  auto emit = [&out](const std::string& label, const std::array<std::optional<double>, 6>& cols) {
    out += label;
    for (const auto& c : cols) out += "," + table_cell(c);
    out += "\n";
  };
  std::vector<MetricsReport> reports;
  for (const auto& row : table.rows) {
    emit(row.label, row.metrics.columns());
    reports.push_back(row.metrics);
  }
  const auto agg = aggregate(reports);
  emit("Mean", agg.mean);
  emit("Std", agg.std);
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Protocols

inline void assert_disjoint(std::span<const Bag> train, std::span<const Bag> test) {
  std::set<BagId> seen;
  for (const auto& b : train) seen.insert(b.id);
  for (const auto& b : test) {
    if (seen.count(b.id)) {
      throw Error(ErrorKind::Integrity, "bag " + b.id.folder_name() + " is in both train and test");
    }
  }
}

inline constexpr double kIndividualTrainFraction = 2.0 / 3.0;

struct IndividualResult {
  ResultTable table;
  std::vector<std::string> warnings;
};

/// Per person: chronological 2/3 split, train from scratch, evaluate on the
/// held-out third.
inline IndividualResult run_individual(const std::vector<Bag>& corpus, const TrainConfig& cfg) {
  cfg.validate();
  IndividualResult result;
  for (const auto& person : persons_of(corpus)) {
    Split split;
    try {
      split = split_individual(bags_of_person(corpus, person), kIndividualTrainFraction);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      result.warnings.push_back("skipping " + person + ": " + e.what());
      continue;
    }
    assert_disjoint(split.train, split.test);
    const auto [ckpt, log] = train(split.train, cfg);
    result.table.rows.push_back({participant_label(person), evaluate(ckpt, split.test)});
  }
  if (result.table.rows.empty()) {
    throw Error(ErrorKind::InsufficientData, "no person has enough bags for an individual model");
  }
  return result;
}

struct FoldOutcome {
  std::set<std::string> test_persons;
  MetricsReport pooled;      // all held-out bags together; drives model selection
  double selection_score;    // mean of the defined pooled CCCs, -inf if none
  ResultTable table;         // one row per held-out person
  Checkpoint checkpoint;
};

struct UniversalResult {
  std::size_t best_fold = 0;
  std::vector<FoldOutcome> folds;

  const FoldOutcome& best() const { return folds.at(best_fold); }
};

inline double selection_score(const MetricsReport& r) {
  double total = 0.0;
  int count = 0;
  for (const auto& c : {r.valence.ccc, r.arousal.ccc}) {
    if (c) {
      total += *c;
      ++count;
    }
  }
  return count ? total / count : -std::numeric_limits<double>::infinity();
}

/// Trains one model per fold on the non-held-out persons and evaluates on the
/// held-out persons' full data. The best fold has the highest mean held-out
/// CCC; ties go to the lowest fold index.
inline UniversalResult run_universal(const std::vector<Bag>& corpus, const TrainConfig& cfg,
                                     const std::vector<std::set<std::string>>& held_out) {
  cfg.validate();
  if (held_out.size() < 2) {
    throw Error(ErrorKind::Precondition, "universal protocol needs at least 2 folds");
  }
  const auto folds = folds_universal(corpus, held_out);
  UniversalResult result;
  for (const auto& fold : folds) {
    assert_disjoint(fold.train, fold.test);
    auto [ckpt, log] = train(fold.train, cfg);
    FoldOutcome outcome{fold.test_persons, evaluate(ckpt, fold.test), 0.0, {}, std::move(ckpt)};
    outcome.selection_score = selection_score(outcome.pooled);
    for (const auto& person : fold.test_persons) {
      const auto bags = bags_of_person(fold.test, person);
      outcome.table.rows.push_back({participant_label(person), evaluate(outcome.checkpoint, bags)});
    }
    result.folds.push_back(std::move(outcome));
  }
  for (std::size_t f = 1; f < result.folds.size(); ++f) {
    if (result.folds[f].selection_score > result.folds[result.best_fold].selection_score) {
      result.best_fold = f;
    }
  }
  return result;
}

struct FinetuneResult {
  ResultTable table;            // fine-tuned model on each person's final third
  ResultTable universal_table;  // the unmodified universal model on the same splits
  std::vector<std::string> warnings;
};

/// For each person: start from the universal parameters with a fresh
/// optimizer, train on the person's first 2/3, evaluate on the final third.
/// Persons the universal model already trained on are processed but flagged.
inline FinetuneResult run_finetune(const Checkpoint& universal, const std::vector<Bag>& corpus,
                                   const TrainConfig& cfg,
                                   std::optional<std::set<std::string>> persons = std::nullopt) {
  cfg.validate();
  if (!(universal.model == cfg.model)) {
    throw Error(ErrorKind::Config, "universal checkpoint model config differs from training config");
  }
  universal.aggregator();  // validates parameter length
  const auto available = persons_of(corpus);
  const auto targets = persons ? *persons : available;
  FinetuneResult result;
  for (const auto& person : targets) {
    if (!available.count(person)) throw Error(ErrorKind::Lookup, "unknown person " + person);
    if (universal.training_persons.count(person)) {
      result.warnings.push_back("leakage: " + person +
                                " was part of the universal model's training data");
    }
    Split split;
    try {
      split = split_individual(bags_of_person(corpus, person), kIndividualTrainFraction);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientData) throw;
      result.warnings.push_back("skipping " + person + ": " + e.what());
      continue;
    }
    assert_disjoint(split.train, split.test);
    const auto [tuned, log] = train(split.train, cfg, &universal);
    result.table.rows.push_back({participant_label(person), evaluate(tuned, split.test)});
    result.universal_table.rows.push_back(
        {participant_label(person), evaluate(universal, split.test)});
  }
  if (result.table.rows.empty()) {
    throw Error(ErrorKind::InsufficientData, "no person has enough bags to fine-tune on");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint files

inline constexpr int kCheckpointFormatVersion = 1;

inline nlohmann::json to_json(const ModelConfig& m) {
  return {{"embed_dim", m.embed_dim},
          {"proj_dim", m.proj_dim},
          {"score_dim", m.score_dim},
          {"transform_dim", m.transform_dim},
          {"out_dim", m.out_dim}};
}

inline nlohmann::json checkpoint_json(const Checkpoint& c) {
  return {{"format_version", kCheckpointFormatVersion},
          {"model_config", to_json(c.model)},
          {"params", c.params},
          {"optimizer_state",
           {{"step_count", c.optimizer.step_count}, {"m", c.optimizer.m}, {"v", c.optimizer.v}}},
          {"epoch", c.epoch},
          {"seed", c.seed},
          {"corpus_fingerprint", c.corpus_fingerprint},
          {"training_persons", c.training_persons}};
}

inline void save_checkpoint(const Checkpoint& c, const fs::path& path) {
  write_text(path, checkpoint_json(c).dump(1) + "\n");
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint c;
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw Error(ErrorKind::Format, "unsupported checkpoint format_version");
    }
    const auto& m = j.at("model_config");
    c.model = ModelConfig{m.at("embed_dim").get<std::size_t>(), m.at("proj_dim").get<std::size_t>(),
                          m.at("score_dim").get<std::size_t>(),
                          m.at("transform_dim").get<std::size_t>(),
                          m.at("out_dim").get<std::size_t>()};
    c.params = j.at("params").get<Vector>();
    const auto& o = j.at("optimizer_state");
    c.optimizer.step_count = o.at("step_count").get<std::uint64_t>();
    c.optimizer.m = o.at("m").get<Vector>();
    c.optimizer.v = o.at("v").get<Vector>();
    c.epoch = j.at("epoch").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.corpus_fingerprint = j.at("corpus_fingerprint").get<std::string>();
    if (j.contains("training_persons")) {
      c.training_persons = j.at("training_persons").get<std::set<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("malformed checkpoint: ") + e.what());
  }
  try {
    c.model.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Integrity, e.what());
  }
  const std::size_t expected = param_count(c.model);
  if (c.params.size() != expected) {
    throw Error(ErrorKind::Integrity, "checkpoint holds " + std::to_string(c.params.size()) +
                                          " parameters, model config requires " +
                                          std::to_string(expected));
  }
  if (c.optimizer.m.size() != expected || c.optimizer.v.size() != expected) {
    throw Error(ErrorKind::Integrity, "optimizer state length does not match parameter count");
  }
  if (!all_finite(c.params)) throw Error(ErrorKind::Integrity, "checkpoint has non-finite parameters");
  return c;
}

inline Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, "checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace weakagg

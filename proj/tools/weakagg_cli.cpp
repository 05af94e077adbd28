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

// weakagg command line.
//
//   weakagg synth --out DIR [--seed N] ...
//   weakagg train --data DIR --out CKPT [--epochs N] [--init CKPT] ...
//   weakagg eval --ckpt CKPT --data DIR [--out REPORT.csv]
//   weakagg protocol individual|universal|finetune --data DIR [--out REPORT.csv] ...
//   weakagg inspect-corpus --data DIR
//
// Exit status: 0 success, 1 usage error, 2 data / format error.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakagg/weakagg.hpp"

namespace {

using namespace weakagg;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out;
};

struct TrainFlags {
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<double> weight_decay;
  bool no_shuffle = false;
};

RunConfig load_config(const Common& c) {
  return c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, bool in_config, std::uint64_t config_value,
                           std::uint64_t fallback) {
  if (flag) return *flag;
  if (in_config) return config_value;
  if (const auto env = env_seed()) return *env;
  return fallback;
}

TrainConfig resolve_train(const Common& c, const TrainFlags& f, const RunConfig& rc, Protocol protocol,
                          const std::vector<Bag>* corpus) {
  TrainConfig t = rc.train;
  t.protocol = protocol;
  t.epochs = f.epochs ? *f.epochs : (rc.has_epochs ? rc.train.epochs : default_epochs(protocol));
  t.seed = resolve_seed(c.seed, rc.has_train_seed, rc.train.seed, 0);
  if (f.lr) t.optimizer.lr = *f.lr;
  if (f.weight_decay) t.optimizer.weight_decay = *f.weight_decay;
  if (f.no_shuffle) t.shuffle_each_epoch = false;
  if (!rc.has_embed_dim && corpus && !corpus->empty()) {
    t.model.embed_dim = corpus->front().frames.front().size();
  }
  t.validate();
  return t;
}

std::vector<Bag> load_corpus(const std::string& root, const RunConfig& rc) {
  if (root.empty()) throw Error(ErrorKind::Config, "--data is required");
  auto load = assemble_corpus(root, rc.filter);
  if (load.skipped_unlabelled) {
    std::cerr << "warning: " << load.skipped_unlabelled << " folder(s) without a labels.csv row skipped\n";
  }
  if (load.skipped_unparsable) {
    std::cerr << "warning: " << load.skipped_unparsable << " folder(s) with malformed names skipped\n";
  }
  if (load.dropped_empty) {
    std::cerr << "warning: " << load.dropped_empty << " bag(s) empty after frame exclusions dropped\n";
  }
  if (load.bags.empty()) throw Error(ErrorKind::InsufficientData, "no bags loaded from " + root);
  return std::move(load.bags);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

std::set<std::string> parse_person_list(const std::string& text) {
  std::set<std::string> out;
  for (auto p : detail::split(text, ',')) {
    if (!p.empty()) out.insert(std::string(p));
  }
  return out;
}

/// "P02,P07;P01,P04" -> two held-out sets.
std::vector<std::set<std::string>> parse_folds(const std::string& text) {
  std::vector<std::set<std::string>> folds;
  for (auto group : detail::split(text, ';')) folds.push_back(parse_person_list(std::string(group)));
  return folds;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------

int cmd_synth(const Common& c, SynthConfig overrides, const std::set<std::string>& set_fields) {
  const RunConfig rc = load_config(c);
  SynthConfig s = rc.synth;
  if (set_fields.count("participants")) s.participants = overrides.participants;
  if (set_fields.count("bags")) s.bags_per_participant = overrides.bags_per_participant;
  if (set_fields.count("frames")) s.frames_per_bag = overrides.frames_per_bag;
  if (set_fields.count("embed-dim")) s.embed_dim = overrides.embed_dim;
  if (set_fields.count("noise-std")) s.noise_std = overrides.noise_std;
  s.seed = resolve_seed(c.seed, rc.has_synth_seed, rc.synth.seed, SynthConfig{}.seed);
  if (c.out.empty()) throw Error(ErrorKind::Config, "--out is required");

  const auto corpus = synth_generate(s);
  write_corpus(c.out, corpus.bags);
  nlohmann::json truth;
  truth["seed"] = s.seed;
  truth["gain"] = corpus.truth.gain;
  truth["valence_weights"] = corpus.truth.valence_weights;
  truth["arousal_weights"] = corpus.truth.arousal_weights;
  truth["key_frame_signal_dim"] = s.key_frame_signal_dim;
  nlohmann::json keys = nlohmann::json::object();
  for (std::size_t i = 0; i < corpus.bags.size(); ++i) {
    keys[corpus.bags[i].id.folder_name()] = corpus.truth.key_frame[i];
  }
  truth["key_frame"] = keys;
  write_text(fs::path(c.out) / "ground_truth.json", truth.dump(1) + "\n");
  std::cout << "wrote " << corpus.bags.size() << " bags from " << s.participants << " participants to "
            << c.out << "\n";
  return 0;
}

int cmd_train(const Common& c, const TrainFlags& f, const std::string& init_path, const std::string& log_path) {
  const RunConfig rc = load_config(c);
  const auto corpus = load_corpus(c.data, rc);
  std::optional<Checkpoint> init;
  if (!init_path.empty()) init = load_checkpoint(init_path);
  TrainConfig t = resolve_train(c, f, rc, Protocol::Plain, &corpus);
  if (init && !rc.has_embed_dim) t.model = init->model;
  if (c.out.empty()) throw Error(ErrorKind::Config, "--out is required");

  const auto [ckpt, log] = train(corpus, t, init ? &*init : nullptr);
  save_checkpoint(ckpt, c.out);
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
    std::printf("epoch %zu loss %.8g\n", e + 1, log.epoch_loss[e]);
  }
  if (!log_path.empty()) {
    nlohmann::json j;
    j["epoch_loss"] = log.epoch_loss;
    j["seconds"] = log.seconds;
    j["corpus_fingerprint"] = ckpt.corpus_fingerprint;
    write_text(log_path, j.dump(1) + "\n");
  }
  std::cout << "checkpoint written to " << c.out << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const RunConfig rc = load_config(c);
  const auto corpus = load_corpus(c.data, rc);
  ResultTable table;
  for (const auto& person : persons_of(corpus)) {
    table.rows.push_back({participant_label(person), evaluate(ckpt, bags_of_person(corpus, person))});
  }
  const auto pooled = evaluate(ckpt, corpus);
  std::cerr << "pooled over " << corpus.size() << " bags:";
  const char* names[] = {"Valence CCC", "Valence PCC", "Valence RMSE", "Arousal CCC", "Arousal PCC",
                         "Arousal RMSE"};
  const auto cols = pooled.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) std::cerr << " " << names[i] << "=" << table_cell(cols[i]);
  std::cerr << "\n";
  emit(c.out, table_csv(table));
  return 0;
}

int cmd_individual(const Common& c, const TrainFlags& f) {
  const RunConfig rc = load_config(c);
  const auto corpus = load_corpus(c.data, rc);
  const TrainConfig t = resolve_train(c, f, rc, Protocol::Individual, &corpus);
  const auto result = run_individual(corpus, t);
  print_warnings(result.warnings);
  emit(c.out, table_csv(result.table));
  return 0;
}

int cmd_universal(const Common& c, const TrainFlags& f, const std::string& folds_text,
                  const std::string& ckpt_out, const std::string& fold_dir) {
  const RunConfig rc = load_config(c);
  const auto corpus = load_corpus(c.data, rc);
  const TrainConfig t = resolve_train(c, f, rc, Protocol::Universal, &corpus);
  std::vector<std::set<std::string>> folds;
  if (!folds_text.empty()) {
    folds = parse_folds(folds_text);
  } else if (rc.folds) {
    folds = *rc.folds;
  } else {
    folds = round_robin_folds(persons_of(corpus), 2);
  }
  const auto result = run_universal(corpus, t, folds);
  for (std::size_t i = 0; i < result.folds.size(); ++i) {
    const auto& fo = result.folds[i];
    std::string persons;
    for (const auto& p : fo.test_persons) persons += (persons.empty() ? "" : ",") + p;
    std::cerr << "fold " << i << " held out {" << persons << "} score " << format_double(fo.selection_score)
              << (i == result.best_fold ? "  <- best" : "") << "\n";
    if (!fold_dir.empty()) {
      write_text(fs::path(fold_dir) / ("fold" + std::to_string(i) + ".csv"), table_csv(fo.table));
    }
  }
  if (!ckpt_out.empty()) save_checkpoint(result.best().checkpoint, ckpt_out);
  emit(c.out, table_csv(result.best().table));
  return 0;
}

int cmd_finetune(const Common& c, const TrainFlags& f, const std::string& ckpt_path,
                 const std::string& persons_text, const std::string& universal_out) {
  if (ckpt_path.empty()) throw Error(ErrorKind::Config, "--ckpt (universal checkpoint) is required");
  const Checkpoint universal = load_checkpoint(ckpt_path);
  const RunConfig rc = load_config(c);
  const auto corpus = load_corpus(c.data, rc);
  TrainConfig t = resolve_train(c, f, rc, Protocol::Finetune, &corpus);
  t.model = universal.model;

  std::optional<std::set<std::string>> persons;
  if (!persons_text.empty()) {
    persons = parse_person_list(persons_text);
  } else {
    std::set<std::string> held_out;
    for (const auto& p : persons_of(corpus)) {
      if (!universal.training_persons.count(p)) held_out.insert(p);
    }
    if (!held_out.empty()) persons = held_out;
  }
  const auto result = run_finetune(universal, corpus, t, persons);
  print_warnings(result.warnings);
  if (!universal_out.empty()) write_text(universal_out, table_csv(result.universal_table));
  emit(c.out, table_csv(result.table));
  return 0;
}

int cmd_inspect(const Common& c) {
  const RunConfig rc = load_config(c);
  if (c.data.empty()) throw Error(ErrorKind::Config, "--data is required");
  const auto load = assemble_corpus(c.data, rc.filter);
  std::map<std::string, std::size_t> per_person;
  std::size_t frames = 0, min_frames = 0, max_frames = 0;
  for (const auto& b : load.bags) {
    ++per_person[b.id.person];
    frames += b.frames.size();
    min_frames = min_frames == 0 ? b.frames.size() : std::min(min_frames, b.frames.size());
    max_frames = std::max(max_frames, b.frames.size());
  }
  std::cout << "bags: " << load.bags.size() << "\n";
  if (!load.bags.empty()) {
    std::cout << "embedding dim: " << load.bags.front().frames.front().size() << "\n";
    std::cout << "frames per bag: min " << min_frames << ", max " << max_frames << ", mean "
              << format_double(static_cast<double>(frames) / static_cast<double>(load.bags.size())) << "\n";
    std::cout << "fingerprint: " << corpus_fingerprint(load.bags) << "\n";
  }
  for (const auto& [person, n] : per_person) std::cout << "  " << person << ": " << n << " bags\n";
  std::cout << "filtered by person/trial: " << load.filtered << "\n";
  std::cout << "skipped (no label row): " << load.skipped_unlabelled << "\n";
  std::cout << "skipped (malformed name): " << load.skipped_unparsable << "\n";
  std::cout << "dropped (no frames left): " << load.dropped_empty << "\n";
  return 0;
}

void add_common(CLI::App* app, Common& c, bool data, bool out) {
  app->add_option("--config", c.config_path, "JSON config file");
  app->add_option("--seed", c.seed, "random seed (overrides config and WEAKAGG_SEED)");
  if (data) app->add_option("--data", c.data, "corpus root directory")->required();
  if (out) app->add_option("--out", c.out, "output path");
}

void add_train_flags(CLI::App* app, TrainFlags& f) {
  app->add_option("--epochs", f.epochs, "training epochs (overrides config)")->check(CLI::PositiveNumber);
  app->add_option("--lr", f.lr, "AdamW learning rate");
  app->add_option("--weight-decay", f.weight_decay, "AdamW decoupled weight decay");
  app->add_flag("--no-shuffle", f.no_shuffle, "visit bags in corpus order every epoch");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakagg: attention-pooled valence/arousal regression from bags of frame embeddings"};
  app.require_subcommand(1);

  Common common;
  TrainFlags train_flags;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted key frames");
  add_common(synth, common, false, true);
  SynthConfig synth_overrides;
  synth->get_option("--out")->required();
  synth->add_option("--participants", synth_overrides.participants)->check(CLI::PositiveNumber);
  synth->add_option("--bags", synth_overrides.bags_per_participant)->check(CLI::PositiveNumber);
  synth->add_option("--frames", synth_overrides.frames_per_bag)->check(CLI::PositiveNumber);
  synth->add_option("--embed-dim", synth_overrides.embed_dim)->check(CLI::PositiveNumber);
  synth->add_option("--noise-std", synth_overrides.noise_std)->check(CLI::NonNegativeNumber);

  auto* train_cmd = app.add_subcommand("train", "train one model on a whole corpus");
  add_common(train_cmd, common, true, true);
  add_train_flags(train_cmd, train_flags);
  train_cmd->get_option("--out")->required();
  std::string init_path, log_path;
  train_cmd->add_option("--init", init_path, "start from this checkpoint's parameters");
  train_cmd->add_option("--log", log_path, "write per-epoch losses as JSON");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  add_common(eval_cmd, common, true, true);
  std::string ckpt_path;
  eval_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  // A missing checkpoint is a data error (exit 2), so it is checked before --data.
  eval_cmd->get_option("--data")->required(false);

  auto* protocol = app.add_subcommand("protocol", "run an experiment protocol");
  add_common(protocol, common, true, true);
  add_train_flags(protocol, train_flags);
  std::string protocol_name, folds_text, ckpt_out, fold_dir, persons_text, universal_out;
  protocol->add_option("name", protocol_name, "individual | universal | finetune")
      ->required()
      ->check(CLI::IsMember({"individual", "universal", "finetune"}));
  protocol->add_option("--folds", folds_text, "held-out person sets, e.g. P02,P07;P01,P04 (universal)");
  protocol->add_option("--ckpt-out", ckpt_out, "write the best universal checkpoint here");
  protocol->add_option("--fold-dir", fold_dir, "write every fold's table into this directory");
  protocol->add_option("--ckpt", ckpt_path, "universal checkpoint to fine-tune (finetune)");
  protocol->add_option("--persons", persons_text, "comma-separated persons to fine-tune on");
  protocol->add_option("--universal-out", universal_out,
                       "write the un-tuned universal model's table on the same splits");

  auto* inspect = app.add_subcommand("inspect-corpus", "summarise a corpus directory");
  add_common(inspect, common, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      std::set<std::string> set_fields;
      for (const char* name : {"participants", "bags", "frames", "embed-dim", "noise-std"}) {
        if (synth->count(std::string("--") + name)) set_fields.insert(name);
      }
      return cmd_synth(common, synth_overrides, set_fields);
    }
    if (train_cmd->parsed()) return cmd_train(common, train_flags, init_path, log_path);
    if (eval_cmd->parsed()) return cmd_eval(common, ckpt_path);
    if (protocol->parsed()) {
      if (protocol_name == "individual") return cmd_individual(common, train_flags);
      if (protocol_name == "universal") return cmd_universal(common, train_flags, folds_text, ckpt_out, fold_dir);
      return cmd_finetune(common, train_flags, ckpt_path, persons_text, universal_out);
    }
    if (inspect->parsed()) return cmd_inspect(common);
  } catch (const Error& e) {
    std::cerr << "weakagg: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "weakagg: " << e.what() << "\n";
    return kExitData;
  }
  std::cerr << app.help();
  return kExitUsage;
}

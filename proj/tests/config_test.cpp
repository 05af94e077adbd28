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
#include "weakagg/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

#include "test_util.hpp"

namespace weakagg {
namespace {

using nlohmann::json;

TEST(RunConfig, EmptyObjectKeepsDefaults) {
  const auto cfg = parse_run_config(json::object());
  EXPECT_EQ(cfg.train.model, ModelConfig{});
  EXPECT_EQ(cfg.train.optimizer.lr, 1e-3);
  EXPECT_EQ(cfg.synth.seed, 7u);
  EXPECT_EQ(cfg.filter.excluded_persons, default_excluded_persons());
  EXPECT_EQ(cfg.filter.max_frames_per_bag, std::optional<std::size_t>(32));
  EXPECT_FALSE(cfg.folds);
  EXPECT_FALSE(cfg.has_epochs);
  EXPECT_FALSE(cfg.has_train_seed);
}

TEST(RunConfig, ReadsEverySection) {
  const auto cfg = parse_run_config(json::parse(R"({
    "train": {"model": {"embed_dim": 16, "proj_dim": 8}, "optimizer": {"lr": 0.01, "weight_decay": 0},
              "epochs": 5, "seed": 3, "shuffle_each_epoch": false, "protocol": "universal"},
    "synth": {"participants": 4, "noise_std": 0.1, "seed": 9},
    "filter": {"excluded_persons": ["P01"], "exclude_warmup_trial": false, "max_frames_per_bag": null,
               "frame_exclusion_list": {"P02_T01_I01": [0, 3]}},
    "folds": [["P02", "P07"], ["P01"]]
  })"));
  EXPECT_EQ(cfg.train.model.embed_dim, 16u);
  EXPECT_EQ(cfg.train.model.proj_dim, 8u);
  EXPECT_EQ(cfg.train.model.score_dim, 64u);
  EXPECT_EQ(cfg.train.optimizer.lr, 0.01);
  EXPECT_EQ(cfg.train.optimizer.weight_decay, 0.0);
  EXPECT_EQ(cfg.train.epochs, 5u);
  EXPECT_EQ(cfg.train.seed, 3u);
  EXPECT_FALSE(cfg.train.shuffle_each_epoch);
  EXPECT_EQ(cfg.train.protocol, Protocol::Universal);
  EXPECT_TRUE(cfg.has_epochs && cfg.has_train_seed && cfg.has_synth_seed && cfg.has_embed_dim);
  EXPECT_EQ(cfg.synth.participants, 4u);
  EXPECT_EQ(cfg.synth.noise_std, 0.1);
  EXPECT_EQ(cfg.filter.excluded_persons, (std::set<std::string>{"P01"}));
  EXPECT_FALSE(cfg.filter.exclude_warmup_trial);
  EXPECT_FALSE(cfg.filter.max_frames_per_bag);
  EXPECT_EQ(cfg.filter.frame_exclusions.at("P02_T01_I01"), (std::set<std::size_t>{0, 3}));
  ASSERT_TRUE(cfg.folds);
  EXPECT_EQ(cfg.folds->size(), 2u);
}

TEST(RunConfig, RejectsUnknownKeysAndBadTypes) {
  for (const char* text : {R"({"trian": {}})", R"({"train": {"epoch": 3}})",
                           R"({"train": {"optimizer": {"learning_rate": 1}}})",
                           R"({"filter": {"max_frames": 4}})", R"({"train": {"epochs": "many"}})",
                           R"({"train": {"protocol": "loso"}})", R"([1, 2])"}) {
    try {
      parse_run_config(json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << text;
    }
  }
}

TEST(RunConfig, LoadFromFile) {
  test::TempDir dir;
  test::write_file(dir / "ok.json", R"({"train": {"epochs": 2}})");
  EXPECT_EQ(load_run_config(dir / "ok.json").train.epochs, 2u);
  test::write_file(dir / "bad.json", "{");
  try {
    load_run_config(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
  }
}

TEST(EnvSeed, ParsesInteger) {
  ::unsetenv("WEAKAGG_SEED");
  EXPECT_FALSE(env_seed());
  ::setenv("WEAKAGG_SEED", "42", 1);
  EXPECT_EQ(env_seed(), std::optional<std::uint64_t>(42));
  ::setenv("WEAKAGG_SEED", "4x", 1);
  EXPECT_THROW(env_seed(), Error);
  ::unsetenv("WEAKAGG_SEED");
}

}  // namespace
}  // namespace weakagg

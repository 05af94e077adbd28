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

#pragma once

#include <compare>
#include <string>
#include <vector>

#include "weakagg/diffmath.hpp"

namespace weakagg {

/// Identity of one recorded iteration, e.g. P01 / T02 / I05.
struct BagId {
  std::string person;
  std::string trial;
  std::string iteration;

  std::string folder_name() const { return person + "_" + trial + "_" + iteration; }

  auto operator<=>(const BagId&) const = default;
  bool operator==(const BagId&) const = default;
};

/// Self-reported targets after rescaling to [0, 1]. Comfort is carried
/// along for bookkeeping and never used as a training target.
struct LabelPair {
  double valence = 0.0;
  double arousal = 0.0;
  double comfort = 0.0;

  bool operator==(const LabelPair&) const = default;
};

/// One weakly labelled set of frame embeddings.
struct Bag {
  std::vector<Vector> frames;
  LabelPair label;
  BagId id;

  bool operator==(const Bag&) const = default;
};

}  // namespace weakagg

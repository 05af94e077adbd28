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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "weakagg/diffmath.hpp"
#include "weakagg/error.hpp"

namespace weakagg {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;

  void validate() const {
    if (!(lr > 0.0)) throw Error(ErrorKind::Config, "AdamW lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw Error(ErrorKind::Config, "AdamW betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw Error(ErrorKind::Config, "AdamW eps must be > 0");
    if (!(weight_decay >= 0.0)) throw Error(ErrorKind::Config, "AdamW weight_decay must be >= 0");
  }

  bool operator==(const AdamWConfig&) const = default;
};

struct AdamWState {
  std::uint64_t step_count = 0;
  Vector m;
  Vector v;

  bool operator==(const AdamWState&) const = default;
};

inline AdamWState adamw_init(std::size_t param_count) {
  if (param_count == 0) throw Error(ErrorKind::Shape, "AdamW state needs at least one parameter");
  return AdamWState{0, Vector(param_count, 0.0), Vector(param_count, 0.0)};
}

/// One AdamW update in place. Weight decay is decoupled from the moment
/// estimates: theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta).
inline void adamw_step(std::span<double> theta, std::span<const double> grad, AdamWState& state,
                       const AdamWConfig& cfg) {
  if (theta.size() != grad.size() || theta.size() != state.m.size() ||
      state.m.size() != state.v.size()) {
    throw Error(ErrorKind::Shape, "adamw_step: theta " + std::to_string(theta.size()) +
                                      ", grad " + std::to_string(grad.size()) + ", state " +
                                      std::to_string(state.m.size()));
  }
  if (!all_finite(grad)) throw Error(ErrorKind::Numeric, "adamw_step: non-finite gradient");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  // Decay is applied as a multiplicative shrink first, so a zero gradient
  // scales theta by exactly (1 - lr * weight_decay).
  const double shrink = 1.0 - cfg.lr * cfg.weight_decay;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    theta[i] = theta[i] * shrink - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace weakagg

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

// Attention-pooling regression head over a bag of frame embeddings.
//
// For every frame embedding x_j:
//
//   h_j = Wp x_j + bp                  projection
//   s_j = tanh(W1 h_j + b1)            score features
//   e_j = g . s_j                      scalar score
//   a   = softmax_j(e)                 attention over frames
//   f_j = GeLU(W2 s_j + b2)            transformed features (from s_j)
//   c   = sum_j a_j f_j                context vector
//   y   = sigmoid(Wk c + bk)           (valence, arousal)
//
// The output depends on the frames only through the weighted sum, so it is
// invariant to frame order and to replicating every frame the same number of
// times.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "weakagg/bag.hpp"
#include "weakagg/diffmath.hpp"
#include "weakagg/error.hpp"

namespace weakagg {

struct ModelConfig {
  std::size_t embed_dim = 256;
  std::size_t proj_dim = 128;
  std::size_t score_dim = 64;
  std::size_t transform_dim = 64;
  std::size_t out_dim = 2;

  void validate() const {
    if (embed_dim == 0 || proj_dim == 0 || score_dim == 0 || transform_dim == 0 || out_dim == 0) {
      throw Error(ErrorKind::Config, "model dimensions must all be >= 1");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

/// All learnable tensors. Also used as the gradient container in backward().
struct AggregatorParams {
  Matrix projection_w;  // proj_dim x embed_dim
  Vector projection_b;  // proj_dim
  Matrix score_w;       // score_dim x proj_dim
  Vector score_b;       // score_dim
  Vector gate;          // score_dim
  Matrix transform_w;   // transform_dim x score_dim
  Vector transform_b;   // transform_dim
  Matrix head_w;        // out_dim x transform_dim
  Vector head_b;        // out_dim

  bool operator==(const AggregatorParams&) const = default;
};

using ParamGrads = AggregatorParams;

inline AggregatorParams zero_params(const ModelConfig& cfg) {
  cfg.validate();
  AggregatorParams p;
  p.projection_w = Matrix(cfg.proj_dim, cfg.embed_dim);
  p.projection_b = Vector(cfg.proj_dim, 0.0);
  p.score_w = Matrix(cfg.score_dim, cfg.proj_dim);
  p.score_b = Vector(cfg.score_dim, 0.0);
  p.gate = Vector(cfg.score_dim, 0.0);
  p.transform_w = Matrix(cfg.transform_dim, cfg.score_dim);
  p.transform_b = Vector(cfg.transform_dim, 0.0);
  p.head_w = Matrix(cfg.out_dim, cfg.transform_dim);
  p.head_b = Vector(cfg.out_dim, 0.0);
  return p;
}

inline ModelConfig config_of(const AggregatorParams& p) {
  return ModelConfig{p.projection_w.cols, p.projection_w.rows, p.score_w.rows, p.transform_w.rows,
                     p.head_w.rows};
}

/// Glorot-uniform bound used by init_params.
inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)); biases zero; the gate
/// vector is drawn like a single weight row (fan_in = score_dim, fan_out = 1).
inline AggregatorParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  AggregatorParams p = zero_params(cfg);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](std::span<double> values, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : values) v = dist(rng);
  };
  fill(p.projection_w.values, glorot_bound(cfg.embed_dim, cfg.proj_dim));
  fill(p.score_w.values, glorot_bound(cfg.proj_dim, cfg.score_dim));
  fill(p.gate, glorot_bound(cfg.score_dim, 1));
  fill(p.transform_w.values, glorot_bound(cfg.score_dim, cfg.transform_dim));
  fill(p.head_w.values, glorot_bound(cfg.transform_dim, cfg.out_dim));
  return p;
}

inline std::size_t param_count(const ModelConfig& c) {
  return c.proj_dim * c.embed_dim + c.proj_dim + c.score_dim * c.proj_dim + c.score_dim +
         c.score_dim + c.transform_dim * c.score_dim + c.transform_dim +
         c.out_dim * c.transform_dim + c.out_dim;
}

namespace detail {

template <typename Params, typename Visitor>
void visit_tensors(Params& p, Visitor&& visit) {
  visit(p.projection_w.values);
  visit(p.projection_b);
  visit(p.score_w.values);
  visit(p.score_b);
  visit(p.gate);
  visit(p.transform_w.values);
  visit(p.transform_b);
  visit(p.head_w.values);
  visit(p.head_b);
}

}  // namespace detail

/// Concatenates Wp, bp, W1, b1, g, W2, b2, Wk, bk (matrices row-major).
inline Vector flatten_params(const AggregatorParams& p) {
  Vector flat;
  flat.reserve(param_count(config_of(p)));
  detail::visit_tensors(p, [&flat](const std::vector<double>& t) {
    flat.insert(flat.end(), t.begin(), t.end());
  });
  return flat;
}

inline AggregatorParams unflatten_params(const ModelConfig& cfg, std::span<const double> flat) {
  const std::size_t expected = param_count(cfg);
  if (flat.size() != expected) {
    throw Error(ErrorKind::Shape, "parameter vector has length " + std::to_string(flat.size()) +
                                      ", config requires " + std::to_string(expected));
  }
  AggregatorParams p = zero_params(cfg);
  std::size_t offset = 0;
  detail::visit_tensors(p, [&](std::vector<double>& t) {
    std::copy(flat.begin() + offset, flat.begin() + offset + t.size(), t.begin());
    offset += t.size();
  });
  return p;
}

/// Intermediates of one forward pass, kept for backward().
struct ForwardCache {
  std::vector<Vector> inputs;          // x_j
  std::vector<Vector> projected;       // h_j
  std::vector<Vector> scores;          // s_j
  std::vector<Vector> transform_pre;   // W2 s_j + b2
  std::vector<Vector> transformed;     // f_j
  Vector attention;                    // a
  Vector context;                      // c
  Vector logits;                       // Wk c + bk
  Vector output;                       // y
};

inline ForwardCache forward(const AggregatorParams& p, std::span<const Vector> frames) {
  if (frames.empty()) throw Error(ErrorKind::Shape, "forward on an empty frame set");
  const std::size_t embed_dim = p.projection_w.cols;
  ForwardCache cache;
  const std::size_t n = frames.size();
  cache.inputs.reserve(n);
  cache.projected.reserve(n);
  cache.scores.reserve(n);
  cache.transform_pre.reserve(n);
  cache.transformed.reserve(n);
  Vector raw_scores(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (frames[j].size() != embed_dim) {
      throw Error(ErrorKind::Shape, "frame " + std::to_string(j) + " has length " +
                                        std::to_string(frames[j].size()) + ", model expects " +
                                        std::to_string(embed_dim));
    }
    cache.inputs.push_back(frames[j]);
    cache.projected.push_back(affine(p.projection_w, p.projection_b, frames[j]));
    cache.scores.push_back(
        activate(ActivationKind::Tanh, affine(p.score_w, p.score_b, cache.projected.back())));
    raw_scores[j] = dot(p.gate, cache.scores.back());
    cache.transform_pre.push_back(affine(p.transform_w, p.transform_b, cache.scores.back()));
    cache.transformed.push_back(activate(ActivationKind::GeLU, cache.transform_pre.back()));
  }
  cache.attention = softmax(raw_scores);
  cache.context.assign(p.transform_w.rows, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = cache.attention[j];
    const Vector& f = cache.transformed[j];
    for (std::size_t k = 0; k < f.size(); ++k) cache.context[k] += a * f[k];
  }
  cache.logits = affine(p.head_w, p.head_b, cache.context);
  cache.output = activate(ActivationKind::Sigmoid, cache.logits);
  return cache;
}

inline Vector targets_of(const LabelPair& label) { return {label.valence, label.arousal}; }

/// Mean squared error over the output components.
inline double loss(std::span<const double> y, std::span<const double> target) {
  if (y.size() != target.size() || y.empty()) {
    throw Error(ErrorKind::Shape, "loss: output length " + std::to_string(y.size()) +
                                      " vs target length " + std::to_string(target.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(y.size());
}

inline double loss(std::span<const double> y, const LabelPair& label) {
  return loss(y, targets_of(label));
}

/// Exact gradient of loss(forward(p, frames).output, target) with respect to
/// every parameter tensor.
inline ParamGrads backward(const AggregatorParams& p, const ForwardCache& cache,
                           std::span<const double> target) {
  const ModelConfig cfg = config_of(p);
  if (target.size() != cfg.out_dim || cache.output.size() != cfg.out_dim) {
    throw Error(ErrorKind::Shape, "backward: target length " + std::to_string(target.size()) +
                                      " vs out_dim " + std::to_string(cfg.out_dim));
  }
  ParamGrads g = zero_params(cfg);
  const std::size_t n = cache.inputs.size();
  const double scale = 2.0 / static_cast<double>(cfg.out_dim);

  Vector d_logits(cfg.out_dim);
  for (std::size_t i = 0; i < cfg.out_dim; ++i) {
    const double y = cache.output[i];
    d_logits[i] = scale * (y - target[i]) * y * (1.0 - y);
  }

  Vector d_context(cfg.transform_dim, 0.0);
  for (std::size_t i = 0; i < cfg.out_dim; ++i) {
    g.head_b[i] = d_logits[i];
    for (std::size_t k = 0; k < cfg.transform_dim; ++k) {
      g.head_w(i, k) = d_logits[i] * cache.context[k];
      d_context[k] += p.head_w(i, k) * d_logits[i];
    }
  }

  // Softmax Jacobian: de_j = a_j (da_j - sum_i a_i da_i), with da_j = f_j . dc.
  Vector d_attention(n);
  double weighted = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    d_attention[j] = dot(cache.transformed[j], d_context);
    weighted += cache.attention[j] * d_attention[j];
  }

  Vector d_score_pre(cfg.score_dim);
  Vector d_transform_pre(cfg.transform_dim);
  Vector d_projected(cfg.proj_dim);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = cache.attention[j];
    const double d_raw = a * (d_attention[j] - weighted);
    const Vector& s = cache.scores[j];

    for (std::size_t k = 0; k < cfg.transform_dim; ++k) {
      d_transform_pre[k] = a * d_context[k] *
                           activate_grad(ActivationKind::GeLU, cache.transform_pre[j][k]);
      g.transform_b[k] += d_transform_pre[k];
    }

    // s_j feeds both the score (through g) and the transform (through W2).
    for (std::size_t r = 0; r < cfg.score_dim; ++r) {
      g.gate[r] += d_raw * s[r];
      double ds = d_raw * p.gate[r];
      for (std::size_t k = 0; k < cfg.transform_dim; ++k) {
        ds += p.transform_w(k, r) * d_transform_pre[k];
      }
      d_score_pre[r] = ds * (1.0 - s[r] * s[r]);
      g.score_b[r] += d_score_pre[r];
    }
    for (std::size_t k = 0; k < cfg.transform_dim; ++k) {
      double* row = g.transform_w.values.data() + k * cfg.score_dim;
      for (std::size_t r = 0; r < cfg.score_dim; ++r) row[r] += d_transform_pre[k] * s[r];
    }

    const Vector& h = cache.projected[j];
    std::fill(d_projected.begin(), d_projected.end(), 0.0);
    for (std::size_t r = 0; r < cfg.score_dim; ++r) {
      const double d = d_score_pre[r];
      double* grow = g.score_w.values.data() + r * cfg.proj_dim;
      const double* wrow = p.score_w.values.data() + r * cfg.proj_dim;
      for (std::size_t q = 0; q < cfg.proj_dim; ++q) {
        grow[q] += d * h[q];
        d_projected[q] += wrow[q] * d;
      }
    }

    const Vector& x = cache.inputs[j];
    for (std::size_t q = 0; q < cfg.proj_dim; ++q) {
      const double d = d_projected[q];
      g.projection_b[q] += d;
      double* grow = g.projection_w.values.data() + q * cfg.embed_dim;
      for (std::size_t e = 0; e < cfg.embed_dim; ++e) grow[e] += d * x[e];
    }
  }
  return g;
}

inline ParamGrads backward(const AggregatorParams& p, const ForwardCache& cache,
                           const LabelPair& label) {
  return backward(p, cache, targets_of(label));
}

}  // namespace weakagg

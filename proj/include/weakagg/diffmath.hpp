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

// Dense kernels used by the aggregator and optimizer: affine maps,
// elementwise activations and their derivatives, a max-shifted softmax, and a
// central-difference gradient used as a test oracle. Everything is double
// precision and allocation is explicit through return values.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "weakagg/error.hpp"

namespace weakagg {

using Vector = std::vector<double>;

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

enum class ActivationKind { Tanh, GeLU, Sigmoid };

inline std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

/// result[i] = b[i] + sum_k W[i,k] * x[k]
inline Vector affine(const Matrix& w, std::span<const double> b, std::span<const double> x) {
  if (w.cols != x.size() || w.rows != b.size()) {
    throw Error(ErrorKind::Shape, "affine: W is " + shape_string(w) + ", b has length " +
                                      std::to_string(b.size()) + ", x has length " +
                                      std::to_string(x.size()));
  }
  Vector out(w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double* wr = w.values.data() + i * w.cols;
    // Four independent partial sums keep the pipeline busy.
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t k = 0;
    for (; k + 4 <= w.cols; k += 4) {
      acc[0] += wr[k] * x[k];
      acc[1] += wr[k + 1] * x[k + 1];
      acc[2] += wr[k + 2] * x[k + 2];
      acc[3] += wr[k + 3] * x[k + 3];
    }
    for (; k < w.cols; ++k) acc[0] += wr[k] * x[k];
    out[i] = b[i] + ((acc[0] + acc[1]) + (acc[2] + acc[3]));
  }
  return out;
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double sigmoid(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::GeLU: return x * normal_cdf(x);
    case ActivationKind::Sigmoid: return sigmoid(x);
  }
  return x;
}

inline double activate_grad(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::GeLU: return normal_cdf(x) + x * normal_pdf(x);
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

inline Vector activate(ActivationKind kind, std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [kind](double v) { return activate(kind, v); });
  return out;
}

inline Vector activate_grad(ActivationKind kind, std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [kind](double v) { return activate_grad(kind, v); });
  return out;
}

/// Softmax with the max score subtracted before exponentiation.
inline Vector softmax(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::Shape, "softmax of an empty score vector");
  const double top = *std::max_element(scores.begin(), scores.end());
  Vector out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::Shape, "dot: lengths " + std::to_string(a.size()) + " and " +
                                      std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Central finite-difference gradient of `objective` at `params`:
/// (f(p + h e_i) - f(p - h e_i)) / 2h for every coordinate i.
template <typename Objective>
Vector fd_gradient(Objective&& objective, std::span<const double> params, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::Precondition, "fd_gradient step must be positive");
  Vector probe(params.begin(), params.end());
  Vector grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = objective(std::span<const double>(probe));
    probe[i] = orig - step;
    const double down = objective(std::span<const double>(probe));
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorKind::Numeric,
                  "fd_gradient: non-finite objective at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace weakagg

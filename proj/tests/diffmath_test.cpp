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

#include "weakagg/diffmath.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace weakagg {
namespace {

TEST(Affine, IdentityMatrix) {
  Matrix w(2, 2);
  w(0, 0) = w(1, 1) = 1.0;
  EXPECT_EQ(affine(w, Vector{0, 0}, Vector{3, -1}), (Vector{3, -1}));
}

TEST(Affine, RowVectorSum) {
  Matrix w(1, 2);
  w(0, 0) = w(0, 1) = 1.0;
  EXPECT_EQ(affine(w, Vector{5}, Vector{2, 3}), (Vector{10}));
}

TEST(Affine, DiagonalWithBias) {
  Matrix w(2, 2);
  w(0, 0) = 2.0;
  w(1, 1) = 3.0;
  EXPECT_EQ(affine(w, Vector{1, -1}, Vector{1, 1}), (Vector{3, 2}));
}

TEST(Affine, ShapeMismatchNamesBothShapes) {
  Matrix w(2, 3);
  try {
    affine(w, Vector{0, 0}, Vector{1, 2});
    FAIL() << "expected shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("length 2"), std::string::npos);
  }
  EXPECT_THROW(affine(w, Vector{0}, Vector{1, 2, 3}), Error);
}

TEST(Affine, LinearInInput) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix w(4, 5);
    w.values = test::random_vector(rng, 20);
    const auto b = test::random_vector(rng, 4);
    const auto x = test::random_vector(rng, 5);
    const auto y = test::random_vector(rng, 5);
    const double alpha = 0.7, beta = -1.3;
    Vector mix(5);
    for (int k = 0; k < 5; ++k) mix[k] = alpha * x[k] + beta * y[k];
    const Vector zero(4, 0.0);
    const auto lhs = affine(w, b, mix);
    const auto ax = affine(w, zero, x);
    const auto ay = affine(w, zero, y);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(lhs[i], alpha * ax[i] + beta * ay[i] + b[i], 1e-12);
  }
}

TEST(Activate, FixedPoints) {
  EXPECT_EQ(activate(ActivationKind::Tanh, Vector{0.0}), (Vector{0.0}));
  EXPECT_EQ(activate(ActivationKind::Sigmoid, Vector{0.0}), (Vector{0.5}));
}

TEST(Activate, GeluIsExactErfForm) {
  // Oracle: x * Phi(x) with erf from its power series.
  const double oracle = 1.0 * 0.5 * (1.0 + test::erf_series(1.0 / std::sqrt(2.0)));
  EXPECT_NEAR(oracle, 0.841345, 1e-6);
  EXPECT_NEAR(activate(ActivationKind::GeLU, Vector{1.0})[0], 0.841345, 1e-6);
  for (double x : {-3.0, -1.2, -0.3, 0.0, 0.4, 2.5}) {
    const double expect = x * 0.5 * (1.0 + test::erf_series(x / std::sqrt(2.0)));
    EXPECT_NEAR(activate(ActivationKind::GeLU, x), expect, 1e-13) << x;
  }
}

TEST(Activate, SigmoidStaysInOpenInterval) {
  for (double x : {-700.0, -40.0, -1.0, 0.0, 1.0, 30.0}) {
    const double s = activate(ActivationKind::Sigmoid, x);
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GT(s, 0.0);
    if (x < 30.0) {
      EXPECT_LT(s, 1.0);
    }
  }
}

TEST(ActivateGrad, ValuesAtZero) {
  EXPECT_EQ(activate_grad(ActivationKind::Tanh, Vector{0.0}), (Vector{1.0}));
  EXPECT_EQ(activate_grad(ActivationKind::Sigmoid, Vector{0.0}), (Vector{0.25}));
  const auto gelu = [](std::span<const double> x) { return activate(ActivationKind::GeLU, x[0]); };
  const double fd = fd_gradient(gelu, Vector{0.0}, 1e-6)[0];
  EXPECT_NEAR(fd, 0.5, 1e-9);
  EXPECT_NEAR(activate_grad(ActivationKind::GeLU, Vector{0.0})[0], 0.5, 1e-12);
}

TEST(ActivateGrad, MatchesFiniteDifferencesAtRandomPoints) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 2.0);
  for (auto kind : {ActivationKind::Tanh, ActivationKind::GeLU, ActivationKind::Sigmoid}) {
    for (int i = 0; i < 100; ++i) {
      const double x = dist(rng);
      const auto f = [kind](std::span<const double> p) { return activate(kind, p[0]); };
      const double fd = fd_gradient(f, Vector{x}, 1e-5)[0];
      const double an = activate_grad(kind, x);
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
      EXPECT_LT(rel, 1e-4) << "kind " << static_cast<int>(kind) << " at x=" << x;
    }
  }
}

TEST(Softmax, EqualScoresAreUniform) {
  for (double c : {-500.0, 0.0, 3.0, 800.0}) {
    const auto a = softmax(Vector{c, c, c});
    for (double v : a) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  }
}

TEST(Softmax, SingleElement) { EXPECT_EQ(softmax(Vector{42.0}), (Vector{1.0})); }

TEST(Softmax, LogTwoRatio) {
  const auto a = softmax(Vector{std::log(2.0), 0.0});
  EXPECT_NEAR(a[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(a[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, EmptyIsShapeError) {
  try {
    softmax(Vector{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
  }
}

TEST(Softmax, LargeScoresDoNotOverflow) {
  const auto a = softmax(Vector{1000.0, 999.0});
  EXPECT_TRUE(all_finite(a));
  EXPECT_NEAR(a[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(Softmax, SumsToOneAndIsShiftInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = test::random_vector(rng, 1 + trial % 17, 3.0);
    const auto a = softmax(s);
    double total = 0.0;
    for (double v : a) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    const double c = shift(rng);
    Vector shifted = s;
    for (double& v : shifted) v += c;
    const auto b = softmax(shifted);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(FdGradient, QuadraticIsExact) {
  const auto f = [](std::span<const double> t) { return t[0] * t[0]; };
  EXPECT_NEAR(fd_gradient(f, Vector{3.0}, 1e-5)[0], 6.0, 1e-6);
}

TEST(FdGradient, ConstantGivesZero) {
  const auto f = [](std::span<const double>) { return 4.25; };
  EXPECT_EQ(fd_gradient(f, Vector{1.0, -2.0, 0.5}, 1e-4), (Vector{0.0, 0.0, 0.0}));
}

TEST(FdGradient, SineAtZero) {
  const auto f = [](std::span<const double> t) { return std::sin(t[0]); };
  EXPECT_NEAR(fd_gradient(f, Vector{0.0}, 1e-5)[0], 1.0, 1e-9);
}

TEST(FdGradient, NonFiniteObjectiveIsNumericError) {
  const auto f = [](std::span<const double> t) { return t[0] > 0 ? INFINITY : 0.0; };
  try {
    fd_gradient(f, Vector{0.0}, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numeric);
  }
  EXPECT_THROW(fd_gradient(f, Vector{0.0}, 0.0), Error);
}

TEST(Determinism, RepeatedCallsAreBitwiseEqual) {
  std::mt19937_64 rng(9);
  Matrix w(3, 4);
  w.values = test::random_vector(rng, 12);
  const auto b = test::random_vector(rng, 3);
  const auto x = test::random_vector(rng, 4);
  EXPECT_EQ(affine(w, b, x), affine(w, b, x));
  EXPECT_EQ(softmax(x), softmax(x));
  for (auto kind : {ActivationKind::Tanh, ActivationKind::GeLU, ActivationKind::Sigmoid}) {
    EXPECT_EQ(activate(kind, x), activate(kind, x));
    EXPECT_EQ(activate_grad(kind, x), activate_grad(kind, x));
  }
}

}  // namespace
}  // namespace weakagg

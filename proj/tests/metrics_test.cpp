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
#include "weakagg/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace weakagg {
namespace {

// Two-pass reference written straight from the definitions.
struct Reference {
  double rmse, pcc, ccc;
};

Reference reference_metrics(const std::vector<double>& y, const std::vector<double>& p) {
  const double n = static_cast<double>(y.size());
  double my = 0, mp = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    my += y[i];
    mp += p[i];
  }
  my /= n;
  mp /= n;
  double sy = 0, sp = 0, cov = 0, se = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sy += (y[i] - my) * (y[i] - my);
    sp += (p[i] - mp) * (p[i] - mp);
    cov += (y[i] - my) * (p[i] - mp);
    se += (y[i] - p[i]) * (y[i] - p[i]);
  }
  const double sdy = std::sqrt(sy / n), sdp = std::sqrt(sp / n);
  const double r = (cov / n) / (sdy * sdp);
  const double c = 2 * sdy * sdp * r / (sdy * sdy + sdp * sdp + (my - mp) * (my - mp));
  return {std::sqrt(se / n), r, c};
}

double rmse_of(const Vector& y, const Vector& p) { return rmse(PairedSeries{y, p}); }
double pcc_of(const Vector& y, const Vector& p) { return pcc(PairedSeries{y, p}); }
double ccc_of(const Vector& y, const Vector& p) { return ccc(PairedSeries{y, p}); }

TEST(Rmse, Examples) {
  EXPECT_EQ(rmse_of({0.2, 0.4, 0.9}, {0.2, 0.4, 0.9}), 0.0);
  EXPECT_EQ(rmse_of({0, 0}, {1, 1}), 1.0);
  EXPECT_NEAR(rmse_of({0, 1}, {1, 0}), 1.0, 1e-12);
  EXPECT_EQ(rmse_of({0.5}, {0.25}), 0.25);
}

TEST(Rmse, LengthMismatchIsShapeError) {
  try {
    rmse_of({0, 1}, {1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
  }
}

TEST(Pcc, Examples) {
  EXPECT_NEAR(pcc_of({0.1, 0.5, 0.3}, {0.1, 0.5, 0.3}), 1.0, 1e-12);
  EXPECT_NEAR(pcc_of({0, 1}, {1, 0}), -1.0, 1e-12);
  EXPECT_NEAR(pcc_of({0, 1, 2}, {1, 2, 3}), 1.0, 1e-12);
}

TEST(Ccc, Examples) {
  EXPECT_NEAR(ccc_of({0.1, 0.5, 0.3}, {0.1, 0.5, 0.3}), 1.0, 1e-12);
  EXPECT_NEAR(ccc_of({0, 1, 2}, {1, 2, 3}), 4.0 / 7.0, 1e-12);
  EXPECT_NEAR(ccc_of({0, 1}, {1, 0}), -1.0, 1e-12);
}

TEST(Correlation, ZeroVarianceIsUndefinedNotZero) {
  EXPECT_THROW(pcc_of({0.3, 0.3, 0.3}, {0.1, 0.2, 0.4}), UndefinedMetric);
  EXPECT_THROW(ccc_of({0.1, 0.2, 0.4}, {0.5, 0.5, 0.5}), UndefinedMetric);
  EXPECT_THROW(pcc_of({0.3}, {0.1}), Error);
}

TEST(Metrics, MatchTwoPassReferenceOnRandomSeries) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> len(2, 60);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(len(rng));
    const auto y = test::random_vector(rng, n);
    auto p = test::random_vector(rng, n, 0.5);
    for (std::size_t i = 0; i < n; ++i) p[i] += 0.7 * y[i] + 0.3;
    const auto ref = reference_metrics(y, p);
    const double r = pcc_of(y, p), c = ccc_of(y, p);
    EXPECT_NEAR(rmse_of(y, p), ref.rmse, 1e-12);
    EXPECT_NEAR(r, ref.pcc, 1e-12);
    EXPECT_NEAR(c, ref.ccc, 1e-12);
    EXPECT_LE(std::abs(c), std::abs(r) + 1e-12);
    // Symmetry under swapping truth and prediction.
    EXPECT_EQ(rmse_of(p, y), rmse_of(y, p));
    EXPECT_EQ(pcc_of(p, y), r);
    EXPECT_EQ(ccc_of(p, y), c);
  }
}

TEST(Metrics, CccEqualsPccWithoutLocationOrScaleBias) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    // A reflection about the mean keeps mean and variance.
    const auto y = test::random_vector(rng, 10);
    double mean = 0;
    for (double v : y) mean += v;
    mean /= 10;
    Vector p(10);
    for (int i = 0; i < 10; ++i) p[i] = 2 * mean - y[(i + 3) % 10];
    EXPECT_NEAR(ccc_of(y, p), pcc_of(y, p), 1e-12);
  }
}

TEST(Report, PerfectPredictions) {
  const Vector v{0.1, 0.4, 0.8}, a{0.9, 0.2, 0.5};
  const auto r = report(PairedSeries{v, v}, PairedSeries{a, a});
  for (const auto& t : {r.valence, r.arousal}) {
    EXPECT_NEAR(*t.ccc, 1.0, 1e-12);
    EXPECT_NEAR(*t.pcc, 1.0, 1e-12);
    EXPECT_EQ(*t.rmse, 0.0);
  }
}

TEST(Report, UndefinedMetricsAreFlagged) {
  const Vector constant{0.5, 0.5, 0.5}, pred{0.4, 0.6, 0.7};
  const auto r = report(PairedSeries{constant, pred}, PairedSeries{pred, pred});
  EXPECT_FALSE(r.valence.ccc);
  EXPECT_FALSE(r.valence.pcc);
  ASSERT_TRUE(r.valence.rmse);
  EXPECT_TRUE(r.arousal.ccc);
}

TEST(Aggregate, IdenticalReportsHaveZeroStd) {
  const Vector v{0.1, 0.4, 0.8}, p{0.2, 0.3, 0.7};
  const auto r = report(PairedSeries{v, p}, PairedSeries{p, v});
  const std::vector<MetricsReport> two{r, r};
  const auto agg = aggregate(two);
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(*agg.std[c], 0.0);
    EXPECT_EQ(*agg.mean[c], *r.columns()[c]);
  }
}

TEST(Aggregate, MeanAndSampleStdOverEightRows) {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MetricsReport> rows;
  for (int i = 0; i < 8; ++i) {
    MetricsReport r;
    r.valence = {u(rng), u(rng), u(rng)};
    r.arousal = {u(rng), u(rng), u(rng)};
    rows.push_back(r);
  }
  const auto agg = aggregate(rows);
  for (std::size_t c = 0; c < 6; ++c) {
    double sum = 0;
    for (const auto& r : rows) sum += *r.columns()[c];
    const double mean = sum / 8;
    double ss = 0;
    for (const auto& r : rows) ss += (*r.columns()[c] - mean) * (*r.columns()[c] - mean);
    EXPECT_NEAR(*agg.mean[c], mean, 1e-12);
    EXPECT_NEAR(*agg.std[c], std::sqrt(ss / 7), 1e-12);
  }
}

TEST(Aggregate, StdUsesSampleEstimator) {
  // Reference column with Mean 0.285 and Std 0.189; the n-1 estimator gives
  // 0.189, the n estimator would give 0.177. Entries and targets are both
  // rounded to three decimals, hence the 1e-3 tolerance.
  const double col[] = {0.415, 0.187, 0.497, 0.204, 0.045, 0.583, 0.144, 0.201};
  std::vector<MetricsReport> rows;
  for (double v : col) {
    MetricsReport r;
    r.valence.ccc = v;
    rows.push_back(r);
  }
  const auto agg = aggregate(rows);
  EXPECT_NEAR(*agg.mean[0], 0.285, 1e-3);
  EXPECT_NEAR(*agg.std[0], 0.189, 1e-3);
}

TEST(Aggregate, UndefinedEntriesAreExcluded) {
  MetricsReport a, b, c;
  a.valence.ccc = 0.2;
  b.valence.ccc = std::nullopt;
  c.valence.ccc = 0.4;
  const std::vector<MetricsReport> rows{a, b, c};
  const auto agg = aggregate(rows);
  EXPECT_NEAR(*agg.mean[0], 0.3, 1e-15);
  EXPECT_NEAR(*agg.std[0], std::sqrt(0.02), 1e-15);
  EXPECT_FALSE(agg.mean[3]);
}

}  // namespace
}  // namespace weakagg

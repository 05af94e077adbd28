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

// Regression agreement metrics: RMSE, Pearson correlation (PCC) and
// concordance correlation (CCC). Means and variances are population
// statistics (divide by n).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weakagg/error.hpp"

namespace weakagg {

/// Thrown when PCC/CCC is requested on a series with zero variance.
class UndefinedMetric : public Error {
 public:
  explicit UndefinedMetric(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

struct PairedSeries {
  std::span<const double> truth;
  std::span<const double> pred;
};

namespace detail {

inline void check_lengths(const PairedSeries& s, std::size_t min_len, const char* metric) {
  if (s.truth.size() != s.pred.size()) {
    throw Error(ErrorKind::Shape, std::string(metric) + ": truth length " +
                                      std::to_string(s.truth.size()) + " vs prediction length " +
                                      std::to_string(s.pred.size()));
  }
  if (s.truth.size() < min_len) {
    throw Error(ErrorKind::Shape, std::string(metric) + " needs at least " +
                                      std::to_string(min_len) + " samples");
  }
}

struct Moments {
  double mean_truth = 0.0;
  double mean_pred = 0.0;
  double var_truth = 0.0;
  double var_pred = 0.0;
  double cov = 0.0;
};

inline Moments moments(const PairedSeries& s) {
  const double n = static_cast<double>(s.truth.size());
  Moments m;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    m.mean_truth += s.truth[i];
    m.mean_pred += s.pred[i];
  }
  m.mean_truth /= n;
  m.mean_pred /= n;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    const double dt = s.truth[i] - m.mean_truth;
    const double dp = s.pred[i] - m.mean_pred;
    m.var_truth += dt * dt;
    m.var_pred += dp * dp;
    m.cov += dt * dp;
  }
  m.var_truth /= n;
  m.var_pred /= n;
  m.cov /= n;
  // The mean of identical values can differ from them by an ulp, which
  // would leave a spurious positive variance.
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(s.truth)) m.var_truth = 0.0;
  if (constant(s.pred)) m.var_pred = 0.0;
  return m;
}

inline void require_variance(const Moments& m, const char* metric) {
  if (!(m.var_truth > 0.0) || !(m.var_pred > 0.0)) {
    throw UndefinedMetric(std::string(metric) + " is undefined for a zero-variance series");
  }
}

inline double pcc_from(const Moments& m) {
  const double r = m.cov / std::sqrt(m.var_truth * m.var_pred);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace detail

inline double rmse(const PairedSeries& s) {
  detail::check_lengths(s, 1, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    const double d = s.truth[i] - s.pred[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(s.truth.size()));
}

inline double pcc(const PairedSeries& s) {
  detail::check_lengths(s, 2, "pcc");
  const auto m = detail::moments(s);
  detail::require_variance(m, "pcc");
  return detail::pcc_from(m);
}

inline double ccc(const PairedSeries& s) {
  detail::check_lengths(s, 2, "ccc");
  const auto m = detail::moments(s);
  detail::require_variance(m, "ccc");
  // 2 sd_t sd_p pcc == 2 cov
  const double bias = m.mean_truth - m.mean_pred;
  const double r = 2.0 * m.cov / (m.var_truth + m.var_pred + bias * bias);
  return std::clamp(r, -1.0, 1.0);
}

/// Per-target metrics; std::nullopt marks an undefined value.
struct TargetMetrics {
  std::optional<double> ccc;
  std::optional<double> pcc;
  std::optional<double> rmse;

  bool operator==(const TargetMetrics&) const = default;
};

struct MetricsReport {
  TargetMetrics valence;
  TargetMetrics arousal;

  /// Column order: Valence CCC, PCC, RMSE, Arousal CCC, PCC, RMSE.
  std::array<std::optional<double>, 6> columns() const {
    return {valence.ccc, valence.pcc, valence.rmse, arousal.ccc, arousal.pcc, arousal.rmse};
  }

  bool operator==(const MetricsReport&) const = default;
};

inline TargetMetrics target_metrics(const PairedSeries& s) {
  TargetMetrics t;
  t.rmse = rmse(s);
  if (s.truth.size() >= 2) {
    const auto m = detail::moments(s);
    if (m.var_truth > 0.0 && m.var_pred > 0.0) {
      t.pcc = pcc(s);
      t.ccc = ccc(s);
    }
  }
  return t;
}

inline MetricsReport report(const PairedSeries& valence, const PairedSeries& arousal) {
  return MetricsReport{target_metrics(valence), target_metrics(arousal)};
}

/// Mean and Std rows over a collection of reports. Undefined entries are
/// skipped per column. Std is the sample standard deviation (n - 1); a
/// column with fewer than two defined values has an undefined Std.
struct AggregateRows {
  std::array<std::optional<double>, 6> mean;
  std::array<std::optional<double>, 6> std;
};

inline AggregateRows aggregate(std::span<const MetricsReport> reports) {
  AggregateRows rows;
  for (std::size_t c = 0; c < 6; ++c) {
    std::vector<double> values;
    for (const auto& r : reports) {
      if (const auto v = r.columns()[c]) values.push_back(*v);
    }
    if (values.empty()) continue;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    rows.mean[c] = mean;
    if (values.size() >= 2) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      rows.std[c] = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
  }
  return rows;
}

}  // namespace weakagg

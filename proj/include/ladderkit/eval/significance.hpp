// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "ladderkit/error.hpp"

namespace ladderkit::eval {

struct WilcoxonResult {
  double statistic = 0;  // min(W+, W-)
  double w_plus = 0;
  double p_value = 1;
  std::size_t n = 0;  // nonzero differences used
  bool exact = false;
};

/// Exact enumeration is used up to this many nonzero differences.
inline constexpr std::size_t kWilcoxonExactMaxN = 20;

namespace detail {

struct SignedRanks {
  std::vector<double> ranks;  // mid-ranks of |d|, zeros dropped
  std::vector<bool> positive;
};

inline SignedRanks signed_ranks(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("wilcoxon: samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  SignedRanks out{std::vector<double>(d.size()), std::vector<bool>(d.size())};
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = mid;
    i = j + 1;
  }
  for (std::size_t i = 0; i < d.size(); ++i) out.positive[i] = d[i] > 0;
  return out;
}

}  // namespace detail

/// Exact two-sided p for W+ = w_plus over all 2^n sign assignments. Ranks are
/// doubled so mid-ranks become integers and the null distribution is a
/// subset-sum count.
inline double wilcoxon_exact_p(const std::vector<double>& ranks, double w_plus) {
  std::vector<long> r2(ranks.size());
  long total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) total += r2[i] = std::lround(2 * ranks[i]);
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1;
  long reach = 0;
  for (long r : r2) {
    for (long s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    reach += r;
  }
  const long t = std::lround(2 * w_plus);
  double lower = 0, upper = 0, all = 0;
  for (long s = 0; s <= total; ++s) {
    const double c = count[static_cast<std::size_t>(s)];
    all += c;
    if (s <= t) lower += c;
    if (s >= t) upper += c;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

/// Normal approximation with tie correction and continuity correction.
inline double wilcoxon_normal_p(const std::vector<double>& ranks, double w_plus) {
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1) / 4.0;
  double var = n * (n + 1) * (2 * n + 1) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (var <= 0) return 1.0;
  const double dev = std::max(0.0, std::abs(w_plus - mean) - 0.5);
  return std::min(1.0, std::erfc(dev / std::sqrt(var) / std::sqrt(2.0)));
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences are
/// dropped; nullopt when every difference is zero.
inline std::optional<WilcoxonResult> wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
  const auto sr = detail::signed_ranks(x, y);
  if (sr.ranks.empty()) return std::nullopt;
  WilcoxonResult res;
  res.n = sr.ranks.size();
  double total = 0;
  for (std::size_t i = 0; i < sr.ranks.size(); ++i) {
    total += sr.ranks[i];
    if (sr.positive[i]) res.w_plus += sr.ranks[i];
  }
  res.statistic = std::min(res.w_plus, total - res.w_plus);
  res.exact = res.n <= kWilcoxonExactMaxN;
  res.p_value = res.exact ? wilcoxon_exact_p(sr.ranks, res.w_plus) : wilcoxon_normal_p(sr.ranks, res.w_plus);
  return res;
}

/// Signed mid-ranks after dropping zeros; exposed for oracle tests.
inline std::vector<double> wilcoxon_ranks(const std::vector<double>& x, const std::vector<double>& y) {
  return detail::signed_ranks(x, y).ranks;
}

struct TTestResult {
  double t = 0;
  double p_value = 1;
  std::size_t df = 0;
};

/// Paired two-sided t-test, df = n - 1. nullopt for n < 2 or when the
/// differences have zero variance.
inline std::optional<TTestResult> paired_t_test(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("paired t-test: samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0) return std::nullopt;
  TTestResult r;
  r.df = n - 1;
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  boost::math::students_t dist(static_cast<double>(r.df));
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

/// Fleiss' kappa for an item × category count table where every row sums to
/// raters_per_item. nullopt when expected agreement is 1 (all mass in one category).
inline std::optional<double> fleiss_kappa(const std::vector<std::vector<int>>& table, int raters_per_item) {
  if (table.size() < 2) throw DataError("fleiss kappa needs at least two items");
  if (raters_per_item < 2) throw DataError("fleiss kappa needs at least two raters per item");
  const std::size_t k = table.front().size();
  const double n = raters_per_item;
  std::vector<double> col(k, 0.0);
  double p_bar = 0;
  for (const auto& row : table) {
    if (row.size() != k) throw DataError("fleiss kappa: ragged table");
    int sum = 0;
    double sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] < 0) throw DataError("fleiss kappa: negative count");
      sum += row[j];
      sq += static_cast<double>(row[j]) * row[j];
      col[j] += row[j];
    }
    if (sum != raters_per_item) throw DataError("fleiss kappa: row does not sum to raters_per_item");
    p_bar += (sq - n) / (n * (n - 1));
  }
  const double items = static_cast<double>(table.size());
  p_bar /= items;
  double p_e = 0;
  for (double c : col) {
    const double p = c / (items * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) return std::nullopt;
  return (p_bar - p_e) / (1.0 - p_e);
}

}  // namespace ladderkit::eval

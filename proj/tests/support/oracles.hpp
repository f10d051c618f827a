// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Slow, direct reference implementations. They share no code with the
// library beyond plain data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ladderkit::testing::oracle {

// One rung occurrence: (image, word, association).
struct Occurrence {
  std::string image;
  std::string word;
  std::string association;
};

/// Uniqueness by pairwise scan: an occurrence is unique when no other image
/// holding the same word lists the same association. Words held by a single
/// image are skipped; the result is the unweighted mean over words.
inline std::optional<double> uniqueness(const std::vector<Occurrence>& occ) {
  std::vector<std::string> words;
  for (const auto& o : occ)
    if (std::find(words.begin(), words.end(), o.word) == words.end()) words.push_back(o.word);
  // Sum in a canonical order so the floating-point mean does not depend on input order.
  std::sort(words.begin(), words.end());
  double sum = 0;
  int counted = 0;
  for (const auto& w : words) {
    std::vector<std::string> imgs;
    for (const auto& o : occ)
      if (o.word == w && std::find(imgs.begin(), imgs.end(), o.image) == imgs.end()) imgs.push_back(o.image);
    if (imgs.size() < 2) continue;
    int total = 0, unique = 0;
    for (const auto& o : occ) {
      if (o.word != w) continue;
      ++total;
      bool elsewhere = false;
      for (const auto& p : occ)
        if (p.word == w && p.image != o.image && p.association == o.association) elsewhere = true;
      unique += !elsewhere;
    }
    if (total == 0) continue;
    sum += 100.0 * unique / total;
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / counted;
}

/// Rank of the gold candidate after sorting each row by descending score with
/// the gold placed behind every candidate it ties with.
inline std::vector<std::size_t> ranks_by_sort(const std::vector<std::vector<double>>& sim, const std::vector<std::size_t>& gold) {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < sim.size(); ++q) {
    std::vector<std::pair<double, int>> row;  // (score, is_gold) ; gold sorts last among equals
    for (std::size_t c = 0; c < sim[q].size(); ++c) row.push_back({sim[q][c], c == gold[q] ? 1 : 0});
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i].second) out.push_back(i + 1);
  }
  return out;
}

inline double recall(const std::vector<std::size_t>& ranks, std::size_t k) {
  std::size_t hit = 0;
  for (auto r : ranks) hit += r <= k;
  return static_cast<double>(hit) / static_cast<double>(ranks.size());
}

inline double mean_rank(const std::vector<std::size_t>& ranks) {
  double s = 0;
  for (auto r : ranks) s += static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

/// Two-sided exact Wilcoxon p by enumerating all 2^n sign assignments of the
/// mid-ranked absolute differences (zeros dropped).
inline double wilcoxon_enumerated_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] - y[i] != 0) d.push_back(x[i] - y[i]);
  const std::size_t n = d.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++less;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    ranks[i] = less + (equal + 1) / 2.0;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) observed += ranks[i];
  std::size_t le = 0, ge = 0;
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += ranks[i];
    le += w <= observed + 1e-9;
    ge += w >= observed - 1e-9;
  }
  const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  return std::min(1.0, p);
}

/// Fleiss' kappa from raw labels by counting agreeing rater pairs per item.
inline double kappa_from_labels(const std::vector<std::vector<int>>& labels) {
  double agree_sum = 0;
  std::map<int, double> category_mass;
  double total_labels = 0;
  for (const auto& item : labels) {
    const double n = static_cast<double>(item.size());
    double pairs = 0;
    for (std::size_t a = 0; a < item.size(); ++a)
      for (std::size_t b = 0; b < item.size(); ++b)
        if (a != b && item[a] == item[b]) ++pairs;
    agree_sum += pairs / (n * (n - 1));
    for (int l : item) ++category_mass[l];
    total_labels += n;
  }
  const double p_bar = agree_sum / static_cast<double>(labels.size());
  double pe = 0;
  for (const auto& [c, m] : category_mass) pe += (m / total_labels) * (m / total_labels);
  return (p_bar - pe) / (1 - pe);
}

}  // namespace ladderkit::testing::oracle

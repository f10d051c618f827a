// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Corpus statistics: caption bookkeeping and how image-specific the mined
// associations are.

#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ladderkit/caption_forge.hpp"
#include "ladderkit/corpus.hpp"
#include "ladderkit/ladder.hpp"

namespace ladderkit {

enum class UniquenessCount {
  kOccurrences,  // every association instance counts (default)
  kDistinct,     // each distinct string counts once per word
};

struct UniquenessOptions {
  UniquenessCount count = UniquenessCount::kOccurrences;
  // Words seen in a single image are trivially 100% unique; off by default.
  bool include_singletons = false;
};

struct UniquenessResult {
  std::optional<double> average_pct;  // nullopt: no qualifying word
  std::map<std::string, double> per_word_pct;
};

/// Percentage of a word's associations at one degree that occur in exactly one
/// of the images the word appears in, averaged (unweighted) over words.
inline UniquenessResult uniqueness_by_degree(const std::vector<AssociationLadder>& ladders, AbstractionDegree degree,
                                             const UniquenessOptions& opts = {}) {
  // word → image → association multiset at this degree
  std::map<std::string, std::map<std::string, std::vector<std::string>>> pools;
  for (const auto& l : ladders) {
    auto& rung = pools[l.element.surface][l.image_id];
    const auto& src = l.at(degree);
    rung.insert(rung.end(), src.begin(), src.end());
  }
  UniquenessResult out;
  double sum = 0.0;
  for (const auto& [word, by_image] : pools) {
    if (by_image.size() < 2 && !opts.include_singletons) continue;
    std::map<std::string, std::size_t> images_with;
    for (const auto& [img, rung] : by_image) {
      for (const auto& a : std::set<std::string>(rung.begin(), rung.end())) ++images_with[a];
    }
    std::size_t total = 0, unique = 0;
    if (opts.count == UniquenessCount::kOccurrences) {
      for (const auto& [img, rung] : by_image)
        for (const auto& a : rung) {
          ++total;
          unique += images_with[a] == 1;
        }
    } else {
      for (const auto& [a, n] : images_with) {
        ++total;
        unique += n == 1;
      }
    }
    if (total == 0) continue;
    const double pct = 100.0 * static_cast<double>(unique) / static_cast<double>(total);
    out.per_word_pct.emplace(word, pct);
    sum += pct;
  }
  if (!out.per_word_pct.empty()) out.average_pct = sum / static_cast<double>(out.per_word_pct.size());
  return out;
}

struct DegreeCounts {
  std::size_t generated = 0;
  std::size_t admitted = 0;
  std::size_t dropped = 0;
};

struct CorpusStats {
  // split → degree index → counts
  std::map<Split, std::array<DegreeCounts, kNumDegrees>> caption_counts;
  // (split, degree index) → uniqueness percentage, nullopt when undefined
  std::map<Split, std::array<std::optional<double>, kNumDegrees>> uniqueness;

  DegreeCounts totals() const {
    DegreeCounts t;
    for (const auto& [s, arr] : caption_counts)
      for (const auto& c : arr) {
        t.generated += c.generated;
        t.admitted += c.admitted;
        t.dropped += c.dropped;
      }
    return t;
  }
};

/// Caption counts by split and degree. Captions whose image is unknown count
/// under train.
inline void count_captions(CorpusStats& stats, const std::vector<ImageRecord>& images,
                           const std::vector<CreativeCaption>& captions) {
  std::map<std::string, Split> split_of;
  for (const auto& r : images) split_of.emplace(r.image_id, r.split);
  for (const auto& s : {Split::kTrain, Split::kValidation, Split::kTest}) stats.caption_counts[s];
  for (const auto& c : captions) {
    auto it = split_of.find(c.image_id);
    auto& dc = stats.caption_counts[it == split_of.end() ? Split::kTrain : it->second][c.degree.index()];
    ++dc.generated;
    if (c.admitted()) ++dc.admitted;
    else ++dc.dropped;
  }
}

inline CorpusStats compute_stats(const std::vector<ImageRecord>& images, const std::vector<AssociationLadder>& ladders,
                                 const std::vector<CreativeCaption>& captions, const UniquenessOptions& opts = {}) {
  CorpusStats stats;
  count_captions(stats, images, captions);
  std::map<std::string, Split> split_of;
  for (const auto& r : images) split_of.emplace(r.image_id, r.split);
  std::map<Split, std::vector<AssociationLadder>> by_split;
  for (const auto& l : ladders) {
    auto it = split_of.find(l.image_id);
    by_split[it == split_of.end() ? Split::kTrain : it->second].push_back(l);
  }
  for (const auto& s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    auto& row = stats.uniqueness[s];
    for (auto d : all_degrees()) row[d.index()] = uniqueness_by_degree(by_split[s], d, opts).average_pct;
  }
  return stats;
}

inline std::string format_pct(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

/// CSV grid: split,metric,D1..D5 with uniqueness and caption-count rows.
inline std::string stats_csv(const CorpusStats& stats, const std::vector<Split>& splits) {
  std::string out = "split,metric,D1,D2,D3,D4,D5\n";
  for (auto s : splits) {
    const std::string name = to_string(s);
    auto urow = stats.uniqueness.find(s);
    out += name + ",uniqueness_pct";
    for (int d = 0; d < kNumDegrees; ++d)
      out += "," + (urow == stats.uniqueness.end() ? std::string("NA") : format_pct(urow->second[static_cast<std::size_t>(d)]));
    out += "\n";
    auto crow = stats.caption_counts.find(s);
    for (const char* metric : {"captions_generated", "captions_admitted", "captions_dropped"}) {
      out += name + "," + metric;
      for (int d = 0; d < kNumDegrees; ++d) {
        DegreeCounts c;
        if (crow != stats.caption_counts.end()) c = crow->second[static_cast<std::size_t>(d)];
        const std::string m = metric;
        const auto v = m == "captions_generated" ? c.generated : m == "captions_admitted" ? c.admitted : c.dropped;
        out += "," + std::to_string(v);
      }
      out += "\n";
    }
  }
  return out;
}

inline json stats_json(const CorpusStats& stats) {
  json j = {{"metric", "corpus_stats"}, {"splits", json::object()}};
  for (const auto& [s, arr] : stats.caption_counts) {
    json split = {{"uniqueness_pct", json::array()}, {"captions", json::array()}};
    auto urow = stats.uniqueness.find(s);
    for (std::size_t d = 0; d < static_cast<std::size_t>(kNumDegrees); ++d) {
      std::optional<double> u = urow == stats.uniqueness.end() ? std::nullopt : urow->second[d];
      split["uniqueness_pct"].push_back(u ? json(*u) : json(nullptr));
      split["captions"].push_back({{"degree", d + 1}, {"generated", arr[d].generated}, {"admitted", arr[d].admitted},
                                   {"dropped", arr[d].dropped}});
    }
    j["splits"][to_string(s)] = split;
  }
  const auto t = stats.totals();
  j["totals"] = {{"generated", t.generated}, {"admitted", t.admitted}, {"dropped", t.dropped}};
  return j;
}

}  // namespace ladderkit

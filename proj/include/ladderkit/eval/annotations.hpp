// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Human-annotation records and their aggregation: grounding buckets, average
// abstraction rank, and item × category tables for agreement.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ladderkit/error.hpp"
#include "ladderkit/jsonl.hpp"

namespace ladderkit::eval {

enum class AnnotationTaskType { kGrounding, kRanking };

inline const char* to_string(AnnotationTaskType t) { return t == AnnotationTaskType::kGrounding ? "grounding" : "ranking"; }

inline std::optional<AnnotationTaskType> parse_task_type(std::string_view s) {
  if (s == "grounding") return AnnotationTaskType::kGrounding;
  if (s == "ranking") return AnnotationTaskType::kRanking;
  return std::nullopt;
}

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 4;
inline constexpr std::size_t kRankingSlots = 6;

/// Caption types of a ranking item: the original caption and one per degree.
inline const std::vector<std::string>& caption_types() {
  static const std::vector<std::string> kTypes = {"original", "d1", "d2", "d3", "d4", "d5"};
  return kTypes;
}

/// True when `ranking` lists each of slots 1..6 exactly once.
inline bool is_slot_permutation(const std::vector<int>& ranking) {
  if (ranking.size() != kRankingSlots) return false;
  std::set<int> seen(ranking.begin(), ranking.end());
  return seen.size() == kRankingSlots && *seen.begin() == 1 && *seen.rbegin() == static_cast<int>(kRankingSlots);
}

/// One human judgment with hidden metadata resolved server-side.
///   grounding: rating 1..4 and the caption's degree
///   ranking:   presented slots (1-based) ordered least → most abstract, and
///              slot_types[s-1] = true caption type of slot s
struct AnnotationRecord {
  AnnotationTaskType task = AnnotationTaskType::kGrounding;
  std::string item_id;
  std::string annotator_id;
  std::optional<int> rating;
  std::optional<std::vector<int>> ranking;
  std::optional<int> degree;
  std::vector<std::string> slot_types;
  std::string timestamp;

  bool operator==(const AnnotationRecord&) const = default;

  void validate() const {
    if (task == AnnotationTaskType::kGrounding) {
      if (!rating || ranking) throw DataError("grounding record needs a rating and no ranking");
      if (*rating < kMinRating || *rating > kMaxRating) throw DataError("rating must be in 1..4");
    } else {
      if (!ranking || rating) throw DataError("ranking record needs a ranking and no rating");
      if (!is_slot_permutation(*ranking)) throw DataError("ranking must be a permutation of slots 1..6");
      if (!slot_types.empty() && slot_types.size() != kRankingSlots) throw DataError("slot_types must list 6 types");
    }
  }
};

inline json to_json(const AnnotationRecord& r) {
  json j = {{"task", to_string(r.task)}, {"item_id", r.item_id}, {"annotator_id", r.annotator_id}};
  if (r.rating) j["rating"] = *r.rating;
  if (r.ranking) j["ranking"] = *r.ranking;
  if (r.degree) j["degree"] = *r.degree;
  if (!r.slot_types.empty()) j["slot_types"] = r.slot_types;
  if (!r.timestamp.empty()) j["timestamp"] = r.timestamp;
  return j;
}

inline AnnotationRecord annotation_from_json(const json& j) {
  AnnotationRecord r;
  try {
    auto task = parse_task_type(j.at("task").get<std::string>());
    if (!task) throw DataError("unknown annotation task " + j.at("task").dump());
    r.task = *task;
    r.item_id = j.at("item_id").get<std::string>();
    r.annotator_id = j.at("annotator_id").get<std::string>();
    if (j.contains("rating")) r.rating = j["rating"].get<int>();
    if (j.contains("ranking")) r.ranking = j["ranking"].get<std::vector<int>>();
    if (j.contains("degree")) r.degree = j["degree"].get<int>();
    if (j.contains("slot_types")) r.slot_types = j["slot_types"].get<std::vector<std::string>>();
    if (j.contains("timestamp")) r.timestamp = j["timestamp"].get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed annotation record: ") + e.what());
  }
  r.validate();
  return r;
}

inline std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::vector<AnnotationRecord> out;
  io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    try {
      out.push_back(annotation_from_json(j));
    } catch (const DataError& e) {
      throw ParseError(path.string(), line, 0, e.what());
    }
  });
  return out;
}

/// Per-degree percentage of items judged grounded (rating ≥ threshold).
/// Multiply-annotated items are decided by majority; ties go to not grounded.
inline std::map<int, double> grounding_bucket_rate(const std::vector<AnnotationRecord>& records, int threshold = 3) {
  struct Item {
    int degree = 0;
    int grounded = 0;
    int not_grounded = 0;
  };
  std::map<std::string, Item> items;
  for (const auto& r : records) {
    if (r.task != AnnotationTaskType::kGrounding || !r.rating) throw DataError("grounding_bucket_rate needs grounding records");
    if (!r.degree) throw DataError("grounding record for " + r.item_id + " has no resolved degree");
    auto& it = items[r.item_id];
    if (it.degree != 0 && it.degree != *r.degree) throw DataError("item " + r.item_id + " has conflicting degrees");
    it.degree = *r.degree;
    (*r.rating >= threshold ? it.grounded : it.not_grounded)++;
  }
  std::map<int, std::pair<int, int>> per_degree;  // grounded, total
  for (const auto& [id, it] : items) {
    auto& [g, n] = per_degree[it.degree];
    g += it.grounded > it.not_grounded;
    ++n;
  }
  std::map<int, double> out;
  for (const auto& [d, gn] : per_degree) out[d] = 100.0 * gn.first / gn.second;
  return out;
}

/// Mean rank (1 = least abstract) per caption type over all items and annotators.
inline std::map<std::string, double> average_abstraction_rank(const std::vector<AnnotationRecord>& records) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (r.task != AnnotationTaskType::kRanking || !r.ranking) throw DataError("average_abstraction_rank needs ranking records");
    if (r.slot_types.size() != kRankingSlots) throw DataError("ranking record for " + r.item_id + " has no resolved slot types");
    const auto& ranking = *r.ranking;
    for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
      auto& [sum, n] = acc[r.slot_types[static_cast<std::size_t>(ranking[pos] - 1)]];
      sum += static_cast<double>(pos + 1);
      ++n;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [type, sn] : acc) out[type] = sn.first / sn.second;
  return out;
}

/// Item × category counts over items annotated by exactly raters_per_item
/// annotators. Grounding: categories are ratings 1..4. Ranking: each
/// (item, caption type) is a unit and its categories are ranks 1..6.
inline std::vector<std::vector<int>> agreement_table(const std::vector<AnnotationRecord>& records, AnnotationTaskType task,
                                                     int raters_per_item) {
  std::map<std::string, std::vector<const AnnotationRecord*>> by_item;
  for (const auto& r : records)
    if (r.task == task) by_item[r.item_id].push_back(&r);
  std::vector<std::vector<int>> table;
  for (const auto& [id, recs] : by_item) {
    if (static_cast<int>(recs.size()) != raters_per_item) continue;
    if (task == AnnotationTaskType::kGrounding) {
      std::vector<int> row(kMaxRating, 0);
      for (const auto* r : recs) ++row[static_cast<std::size_t>(*r->rating - 1)];
      table.push_back(std::move(row));
    } else {
      std::map<std::string, std::vector<int>> units;
      for (const auto* r : recs) {
        if (r->slot_types.size() != kRankingSlots) throw DataError("ranking record for " + id + " has no resolved slot types");
        for (std::size_t pos = 0; pos < r->ranking->size(); ++pos) {
          auto& row = units.try_emplace(r->slot_types[static_cast<std::size_t>((*r->ranking)[pos] - 1)],
                                        std::vector<int>(kRankingSlots, 0)).first->second;
          ++row[pos];
        }
      }
      for (auto& [type, row] : units) table.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace ladderkit::eval

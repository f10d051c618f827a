// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ladderkit/error.hpp"
#include "ladderkit/eval/embedding.hpp"

namespace ladderkit::eval {

/// Dense query × candidate scores with a gold candidate per query.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> query_ids, std::vector<std::string> candidate_ids, std::vector<double> scores)
      : queries_(std::move(query_ids)), candidates_(std::move(candidate_ids)), scores_(std::move(scores)) {
    if (scores_.size() != queries_.size() * candidates_.size()) throw DataError("score matrix shape mismatch");
    for (double s : scores_)
      if (!std::isfinite(s)) throw DataError("similarity scores must be finite");
  }

  std::size_t num_queries() const { return queries_.size(); }
  std::size_t num_candidates() const { return candidates_.size(); }
  const std::vector<std::string>& query_ids() const { return queries_; }
  const std::vector<std::string>& candidate_ids() const { return candidates_; }
  double score(std::size_t q, std::size_t c) const { return scores_[q * candidates_.size() + c]; }

  /// query_id → candidate_id. Every query must get a gold that exists.
  void set_gold(const std::map<std::string, std::string>& gold) {
    std::unordered_map<std::string, std::size_t> cand_index;
    for (std::size_t i = 0; i < candidates_.size(); ++i) cand_index.emplace(candidates_[i], i);
    gold_.assign(queries_.size(), 0);
    for (std::size_t q = 0; q < queries_.size(); ++q) {
      auto g = gold.find(queries_[q]);
      if (g == gold.end()) throw DataError("no gold candidate for query " + queries_[q]);
      auto c = cand_index.find(g->second);
      if (c == cand_index.end()) throw DataError("gold candidate " + g->second + " is not among the candidates");
      gold_[q] = c->second;
    }
  }

  void set_gold_indices(std::vector<std::size_t> gold) {
    if (gold.size() != queries_.size()) throw DataError("gold index count must equal query count");
    for (auto g : gold)
      if (g >= candidates_.size()) throw DataError("gold index out of range");
    gold_ = std::move(gold);
  }

  bool has_gold() const { return !gold_.empty() || queries_.empty(); }
  std::size_t gold(std::size_t q) const { return gold_.at(q); }

 private:
  std::vector<std::string> queries_;
  std::vector<std::string> candidates_;
  std::vector<double> scores_;
  std::vector<std::size_t> gold_;
};

/// scores[i][j] = cos(q_i, c_j). Zero rows and dimension mismatches are errors.
inline SimilarityMatrix cosine_similarity(const EmbeddingMatrix& q, const EmbeddingMatrix& c) {
  if (q.dim() != c.dim())
    throw DataError("dimension mismatch: " + std::to_string(q.dim()) + " vs " + std::to_string(c.dim()));
  auto norms = [](const EmbeddingMatrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double s = 0;
      for (float v : m.row(i)) s += static_cast<double>(v) * v;
      if (s == 0.0) throw DataError("zero vector for id " + m.ids()[i]);
      out[i] = std::sqrt(s);
    }
    return out;
  };
  const auto qn = norms(q);
  const auto cn = norms(c);
  std::vector<double> scores(q.rows() * c.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const auto qi = q.row(i);
    for (std::size_t j = 0; j < c.rows(); ++j) {
      const auto cj = c.row(j);
      double dot = 0;
      for (std::size_t k = 0; k < q.dim(); ++k) dot += static_cast<double>(qi[k]) * cj[k];
      scores[i * c.rows() + j] = dot / (qn[i] * cn[j]);
    }
  }
  return SimilarityMatrix(q.ids(), c.ids(), std::move(scores));
}

/// Competition rank of the gold candidate: 1 + #{non-gold scoring ≥ gold}.
/// Ties count against the gold.
inline std::vector<std::size_t> gold_ranks(const SimilarityMatrix& sim) {
  if (!sim.has_gold()) throw DataError("similarity matrix has no gold mapping");
  std::vector<std::size_t> ranks(sim.num_queries());
  for (std::size_t q = 0; q < sim.num_queries(); ++q) {
    const auto g = sim.gold(q);
    const double gs = sim.score(q, g);
    std::size_t rank = 1;
    for (std::size_t c = 0; c < sim.num_candidates(); ++c)
      if (c != g && sim.score(q, c) >= gs) ++rank;
    ranks[q] = rank;
  }
  return ranks;
}

inline double recall_at_k(const std::vector<std::size_t>& ranks, std::size_t k) {
  if (ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto r : ranks) hits += r <= k;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

inline double recall_at_k(const SimilarityMatrix& sim, std::size_t k) {
  if (k < 1 || k > sim.num_candidates()) throw UsageError("k must be in [1, #candidates]");
  return recall_at_k(gold_ranks(sim), k);
}

inline double average_rank(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) return 0.0;
  double s = 0;
  for (auto r : ranks) s += static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

inline double average_rank(const SimilarityMatrix& sim) { return average_rank(gold_ranks(sim)); }

/// Per-pair outcome of a over b: 1, 0.5 for a tie, 0.
inline std::vector<double> preference_outcomes(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("preference lists differ in length");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > b[i] ? 1.0 : (a[i] == b[i] ? 0.5 : 0.0);
  return out;
}

inline double pairwise_preference(const std::vector<double>& a, const std::vector<double>& b) {
  const auto o = preference_outcomes(a, b);
  if (o.empty()) return 0.0;
  double s = 0;
  for (double v : o) s += v;
  return s / static_cast<double>(o.size());
}

/// How often the correct item outscores the incorrect one (ties count 0.5).
inline double matching_preference(const std::vector<double>& sim_correct, const std::vector<double>& sim_incorrect) {
  return pairwise_preference(sim_correct, sim_incorrect);
}

/// Same pairwise rate, applied to original / creative / FOIL caption scores.
inline double foil_preference(const std::vector<double>& sim_a, const std::vector<double>& sim_b) {
  return pairwise_preference(sim_a, sim_b);
}

}  // namespace ladderkit::eval

// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ladderkit/eval/retrieval.hpp"
#include "ladderkit/eval/significance.hpp"
#include "ladderkit/jsonl.hpp"

namespace ladderkit::eval {

struct EvalReport {
  std::string metric;
  std::size_t n = 0;
  std::map<std::size_t, double> recall_at;
  std::optional<double> avg_rank;
  std::optional<double> preference_rate;
  std::optional<double> p_value;
  std::optional<std::string> test_name;
  std::optional<double> test_statistic;
};

inline json to_json(const EvalReport& r) {
  json j = {{"metric", r.metric}, {"n", r.n}};
  if (!r.recall_at.empty()) {
    json ks = json::array();
    json rec = json::object();
    for (const auto& [k, v] : r.recall_at) {
      ks.push_back(k);
      rec[std::to_string(k)] = v;
    }
    j["k"] = ks;
    j["recall_at"] = rec;
  }
  if (r.avg_rank) j["avg_rank"] = *r.avg_rank;
  if (r.preference_rate) j["preference_rate"] = *r.preference_rate;
  if (r.test_name) {
    j["test"] = *r.test_name;
    j["p_value"] = r.p_value ? json(*r.p_value) : json(nullptr);
    if (r.test_statistic) j["statistic"] = *r.test_statistic;
  }
  return j;
}

/// Recall@k for each k and the average gold rank. With a baseline, per-query
/// rank pairs are compared by a Wilcoxon signed-rank test.
inline EvalReport retrieval_report(const SimilarityMatrix& sim, const std::vector<std::size_t>& ks,
                                   const SimilarityMatrix* baseline = nullptr) {
  EvalReport r;
  r.metric = "retrieval";
  const auto ranks = gold_ranks(sim);
  r.n = ranks.size();
  for (auto k : ks) {
    if (k < 1 || k > sim.num_candidates()) throw UsageError("k=" + std::to_string(k) + " outside [1, #candidates]");
    r.recall_at[k] = recall_at_k(ranks, k);
  }
  r.avg_rank = average_rank(ranks);
  if (baseline) {
    const auto base = gold_ranks(*baseline);
    if (base.size() != ranks.size()) throw DataError("baseline has a different number of queries");
    std::vector<double> a(ranks.begin(), ranks.end()), b(base.begin(), base.end());
    r.test_name = "wilcoxon_signed_rank";
    if (auto w = wilcoxon_signed_rank(a, b)) {
      r.p_value = w->p_value;
      r.test_statistic = w->statistic;
    }
  }
  return r;
}

/// Pairwise preference of a over b. With a baseline pair, per-item outcomes
/// are compared by a paired t-test.
inline EvalReport preference_report(const std::string& metric, const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<double>* base_a = nullptr, const std::vector<double>* base_b = nullptr) {
  EvalReport r;
  r.metric = metric;
  r.n = a.size();
  r.preference_rate = pairwise_preference(a, b);
  if (base_a && base_b) {
    r.test_name = "paired_t_test";
    if (auto t = paired_t_test(preference_outcomes(a, b), preference_outcomes(*base_a, *base_b))) {
      r.p_value = t->p_value;
      r.test_statistic = t->t;
    }
  }
  return r;
}

}  // namespace ladderkit::eval

// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numbers>

#include "ladderkit/eval/annotations.hpp"
#include "ladderkit/eval/embedding.hpp"
#include "ladderkit/eval/report.hpp"
#include "ladderkit/eval/retrieval.hpp"
#include "ladderkit/eval/significance.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace ladderkit;
using namespace ladderkit::eval;
using ladderkit::testing::Gen;
using ladderkit::testing::TempDir;
namespace oracle = ladderkit::testing::oracle;

namespace {

EmbeddingMatrix emb(std::vector<std::string> ids, std::size_t dim, std::vector<float> v) {
  return EmbeddingMatrix(std::move(ids), dim, std::move(v));
}

std::vector<std::string> names(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Scores on a coarse grid so ties are frequent.
SimilarityMatrix random_sim(Gen& g, std::size_t q, std::size_t c, std::vector<std::vector<double>>& rows,
                            std::vector<std::size_t>& gold) {
  std::vector<double> flat;
  rows.assign(q, {});
  gold.clear();
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double s = g.range(-4, 4) / 4.0;
      rows[i].push_back(s);
      flat.push_back(s);
    }
    gold.push_back(static_cast<std::size_t>(g.range(0, static_cast<int>(c) - 1)));
  }
  SimilarityMatrix sim(names("q", q), names("c", c), flat);
  sim.set_gold_indices(gold);
  return sim;
}

AnnotationRecord grounding(const std::string& item, const std::string& who, int rating, int degree) {
  AnnotationRecord r;
  r.task = AnnotationTaskType::kGrounding;
  r.item_id = item;
  r.annotator_id = who;
  r.rating = rating;
  r.degree = degree;
  return r;
}

// Slots presented in a fixed shuffled order; ranking lists slots from least to most abstract.
AnnotationRecord ranking(const std::string& item, const std::string& who, const std::vector<std::string>& order_by_type) {
  static const std::vector<std::string> slots = {"d3", "original", "d5", "d1", "d4", "d2"};
  AnnotationRecord r;
  r.task = AnnotationTaskType::kRanking;
  r.item_id = item;
  r.annotator_id = who;
  r.slot_types = slots;
  std::vector<int> rk;
  for (const auto& type : order_by_type)
    rk.push_back(static_cast<int>(std::find(slots.begin(), slots.end(), type) - slots.begin()) + 1);
  r.ranking = rk;
  return r;
}

}  // namespace

// ---- EMB1 ----

TEST(Emb1, BitExactLayout) {
  const auto m = emb({"a", "b"}, 2, {1.0f, -2.0f, 0.5f, 0.0f});
  const auto bytes = encode_emb1(m);
  const std::string expect = std::string("EMB1 2 2\n") + std::string("\x00\x00\x80\x3f", 4) +
                             std::string("\x00\x00\x00\xc0", 4) + std::string("\x00\x00\x00\x3f", 4) +
                             std::string("\x00\x00\x00\x00", 4);
  EXPECT_EQ(bytes, expect);
}

TEST(Emb1, FileRoundTripIsBitExact) {
  TempDir dir;
  Gen g(42);
  std::vector<float> v;
  for (int i = 0; i < 7 * 5; ++i) v.push_back(static_cast<float>(g.uniform(-3, 3)));
  v[3] = -0.0f;
  v[4] = std::numeric_limits<float>::denorm_min();
  const auto m = emb(names("id", 7), 5, v);
  write_embeddings(dir / "q.emb", m);
  EXPECT_TRUE(std::filesystem::exists(dir / "q.ids.jsonl"));
  const auto back = read_embeddings(dir / "q.emb");
  EXPECT_EQ(back.ids(), m.ids());
  ASSERT_EQ(back.values().size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint32_t>(back.values()[i]), std::bit_cast<std::uint32_t>(v[i]));
  EXPECT_EQ(io::read_file(dir / "q.emb"), encode_emb1(m));
  const auto ids = io::read_jsonl(dir / "q.ids.jsonl");
  EXPECT_EQ(ids[6], (json{{"row", 6}, {"id", "id6"}}));
}

TEST(Emb1, IdsPathNaming) {
  EXPECT_EQ(ids_path_for("x/q.emb"), std::filesystem::path("x/q.ids.jsonl"));
  EXPECT_EQ(ids_path_for("x/q.bin"), std::filesystem::path("x/q.bin.ids.jsonl"));
}

TEST(Emb1, CorruptInputsRefused) {
  const auto good = encode_emb1(emb({"a"}, 2, {1.0f, 2.0f}));
  EXPECT_NO_THROW(decode_emb1(good));
  for (const std::string bad : {std::string("EMB2 1 2\n") + good.substr(9), std::string("EMB1 1 3\n") + good.substr(9),
                                std::string("EMB1 2 2\n") + good.substr(9), std::string("EMB1 1 x\n") + good.substr(9),
                                std::string("EMB1 1\n") + good.substr(9), std::string("EMB1 -1 2\n") + good.substr(9),
                                good.substr(0, good.size() - 1), good + "x", std::string("EMB1 1 2"),
                                std::string("EMB1 1 0\n")}) {
    EXPECT_THROW(decode_emb1(bad), ParseError) << bad.substr(0, 10);
  }
  EXPECT_NO_THROW(decode_emb1("EMB1 0 4\n"));
  std::string nan = good;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 9, &q, 4);
  EXPECT_THROW(decode_emb1(nan), DataError);
}

TEST(Emb1, IdsManifestChecked) {
  TempDir dir;
  write_embeddings(dir / "m.emb", emb({"a", "b"}, 1, {1.0f, 2.0f}));
  io::write_file_atomic(dir / "m.ids.jsonl", "{\"row\": 0, \"id\": \"a\"}\n");
  EXPECT_THROW(read_embeddings(dir / "m.emb"), DataError);
  io::write_file_atomic(dir / "m.ids.jsonl", "{\"row\": 0, \"id\": \"a\"}\n{\"row\": 0, \"id\": \"b\"}\n");
  EXPECT_THROW(read_embeddings(dir / "m.emb"), ParseError);
  io::write_file_atomic(dir / "m.ids.jsonl", "{\"row\": 0, \"id\": \"a\"}\n{\"row\": 1, \"id\": \"a\"}\n");
  EXPECT_THROW(read_embeddings(dir / "m.emb"), DataError);
}

TEST(EmbeddingMatrix, Invariants) {
  EXPECT_THROW(emb({"a"}, 2, {1.0f}), DataError);
  EXPECT_THROW(emb({"a", "a"}, 1, {1.0f, 2.0f}), DataError);
  EXPECT_THROW(emb({"a"}, 1, {std::numeric_limits<float>::infinity()}), DataError);
  EXPECT_TRUE(emb({"a"}, 2, {0.6f, 0.8f}).unit_normalized());
  EXPECT_FALSE(emb({"a"}, 2, {1.0f, 1.0f}).unit_normalized());
}

// ---- cosine and retrieval ----

TEST(Cosine, Examples) {
  const auto s = cosine_similarity(emb({"q"}, 2, {1, 2}), emb({"same", "orth", "swap"}, 2, {1, 2, -2, 1, 2, 1}));
  EXPECT_NEAR(s.score(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s.score(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(s.score(0, 2), 0.8, 1e-12);
  EXPECT_THROW(cosine_similarity(emb({"q"}, 2, {0, 0}), emb({"c"}, 2, {1, 0})), DataError);
  EXPECT_THROW(cosine_similarity(emb({"q"}, 2, {1, 0}), emb({"c"}, 3, {1, 0, 0})), DataError);
}

TEST(Cosine, InvariantUnderPositiveRowScaling) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Gen g(seed);
    const std::size_t n = 6, d = 4;
    std::vector<float> q, c;
    for (std::size_t i = 0; i < n * d; ++i) {
      q.push_back(static_cast<float>(g.uniform(-1, 1)));
      c.push_back(static_cast<float>(g.uniform(-1, 1)));
    }
    auto scaled = q;
    for (std::size_t i = 0; i < n; ++i) {
      const auto f = static_cast<float>(std::pow(2.0, g.range(-6, 6)));  // exact in binary
      for (std::size_t k = 0; k < d; ++k) scaled[i * d + k] *= f;
    }
    const auto a = cosine_similarity(emb(names("q", n), d, q), emb(names("c", n), d, c));
    const auto b = cosine_similarity(emb(names("q", n), d, scaled), emb(names("c", n), d, c));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(a.score(i, j), b.score(i, j), 1e-12);
  }
}

TEST(Retrieval, SmallExamples) {
  SimilarityMatrix diag({"q0", "q1", "q2"}, {"c0", "c1", "c2"}, {0.9, 0.1, 0.2, 0.0, 0.8, 0.3, 0.1, 0.2, 0.7});
  diag.set_gold({{"q0", "c0"}, {"q1", "c1"}, {"q2", "c2"}});
  EXPECT_DOUBLE_EQ(recall_at_k(diag, 1), 1.0);
  EXPECT_DOUBLE_EQ(average_rank(diag), 1.0);

  SimilarityMatrix last({"q0", "q1"}, {"a", "b", "c"}, {0.9, 0.5, 0.1, 0.3, 0.2, 0.1});
  last.set_gold({{"q0", "c"}, {"q1", "c"}});
  EXPECT_DOUBLE_EQ(average_rank(last), 3.0);
  EXPECT_DOUBLE_EQ(recall_at_k(last, 2), 0.0);
  EXPECT_DOUBLE_EQ(recall_at_k(last, 3), 1.0);

  SimilarityMatrix ties({"q"}, {"a", "b", "c"}, {0.5, 0.5, 0.5});
  ties.set_gold({{"q", "a"}});
  EXPECT_EQ(gold_ranks(ties), std::vector<std::size_t>{3});

  EXPECT_THROW(recall_at_k(diag, 0), UsageError);
  EXPECT_THROW(recall_at_k(diag, 4), UsageError);
  EXPECT_THROW(diag.set_gold({{"q0", "c0"}}), DataError);
  EXPECT_THROW(diag.set_gold({{"q0", "zz"}, {"q1", "c1"}, {"q2", "c2"}}), DataError);
  EXPECT_THROW(SimilarityMatrix({"q"}, {"a"}, {std::nan("")}), DataError);
}

TEST(RetrievalProperty, MatchesSortOracle) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Gen g(seed);
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> gold;
    const auto q = static_cast<std::size_t>(g.range(1, 20));
    const auto c = static_cast<std::size_t>(g.range(1, 20));
    const auto sim = random_sim(g, q, c, rows, gold);
    const auto ranks = gold_ranks(sim);
    ASSERT_EQ(ranks, oracle::ranks_by_sort(rows, gold)) << seed;
    double prev = 0;
    for (std::size_t k = 1; k <= c; ++k) {
      const double r = recall_at_k(sim, k);
      EXPECT_DOUBLE_EQ(r, oracle::recall(ranks, k));
      EXPECT_GE(r, prev);
      prev = r;
    }
    EXPECT_EQ(recall_at_k(sim, c), 1.0);
    const double avg = average_rank(sim);
    EXPECT_DOUBLE_EQ(avg, oracle::mean_rank(ranks));
    EXPECT_GE(avg, 1.0);
    EXPECT_LE(avg, static_cast<double>(c));
    bool strict_argmax = true;
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (j != gold[i] && rows[i][j] >= rows[i][gold[i]]) strict_argmax = false;
    EXPECT_EQ(avg == 1.0, strict_argmax);
  }
}

TEST(Preference, Examples) {
  EXPECT_DOUBLE_EQ(matching_preference({0.9, 0.8}, {0.1, 0.2}), 1.0);
  EXPECT_DOUBLE_EQ(matching_preference({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(foil_preference({0.9, 0.9, 0.9}, {0.3, 0.2, 0.1}), 1.0);
  EXPECT_DOUBLE_EQ(foil_preference({0.9, 0.1}, {0.1, 0.9}), 0.5);
  EXPECT_THROW(matching_preference({1}, {1, 2}), DataError);
}

TEST(PreferenceProperty, Complementary) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Gen g(seed);
    std::vector<double> a, b;
    const int n = g.range(1, 40);
    for (int i = 0; i < n; ++i) {
      a.push_back(g.range(0, 3));
      b.push_back(g.range(0, 3));
    }
    EXPECT_DOUBLE_EQ(pairwise_preference(a, b) + pairwise_preference(b, a), 1.0);
  }
}

// ---- significance ----

TEST(Wilcoxon, Examples) {
  EXPECT_FALSE(wilcoxon_signed_rank({1, 2, 3}, {1, 2, 3}));
  const auto w = wilcoxon_signed_rank({2, 3, 4, 5, 6}, {1, 1, 1, 1, 1});
  ASSERT_TRUE(w);
  EXPECT_TRUE(w->exact);
  EXPECT_EQ(w->n, 5u);
  EXPECT_DOUBLE_EQ(w->p_value, 0.0625);
  EXPECT_DOUBLE_EQ(w->statistic, 0.0);
  EXPECT_DOUBLE_EQ(w->w_plus, 15.0);
  EXPECT_THROW(wilcoxon_signed_rank({1}, {1, 2}), DataError);
}

TEST(Wilcoxon, MidRanks) {
  EXPECT_EQ(wilcoxon_ranks({1, 5, 0, 3, 7}, {0, 3, 2, 3, 0}), (std::vector<double>{1, 2.5, 2.5, 4}));
}

TEST(WilcoxonProperty, ExactMatchesEnumeration) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    Gen g(seed);
    const int n = g.range(1, 12);
    std::vector<double> x, y;
    for (int i = 0; i < n; ++i) {
      x.push_back(g.range(0, 6));
      y.push_back(g.range(0, 6));
    }
    const auto w = wilcoxon_signed_rank(x, y);
    if (!w) continue;
    EXPECT_TRUE(w->exact);
    EXPECT_NEAR(w->p_value, oracle::wilcoxon_enumerated_p(x, y), 1e-12) << seed;
    EXPECT_GE(w->p_value, 0.0);
    EXPECT_LE(w->p_value, 1.0);
  }
}

TEST(Wilcoxon, NormalApproximationTracksExactAtTwelve) {
  // Distinct differences: the exact path matches enumeration, and the
  // continuity-corrected normal tail stays within 0.015 of the exact p for
  // every attainable W+ at n = 12.
  const std::vector<double> x = {3.1, 1.2, 4.7, 0.3, 2.9, 5.5, 1.8, 0.9, 6.2, 2.4, 3.8, 0.6};
  const std::vector<double> signs = {1, -1, 1, 1, -1, 1, 1, -1, 1, 1, -1, 1};
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - signs[i] * static_cast<double>(i + 1);
  const auto ranks = wilcoxon_ranks(x, y);
  const auto w = wilcoxon_signed_rank(x, y);
  ASSERT_TRUE(w);
  EXPECT_NEAR(w->p_value, oracle::wilcoxon_enumerated_p(x, y), 1e-12);
  for (int wp = 0; wp <= 78; ++wp)
    EXPECT_NEAR(wilcoxon_normal_p(ranks, wp), wilcoxon_exact_p(ranks, wp), 0.015) << "W+=" << wp;
}

TEST(Wilcoxon, LargeSampleUsesApproximation) {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i);
    y.push_back(i + (i % 3 == 0 ? -1.0 : 1.0) * (1 + i % 7));
  }
  const auto w = wilcoxon_signed_rank(x, y);
  ASSERT_TRUE(w);
  EXPECT_FALSE(w->exact);
  EXPECT_DOUBLE_EQ(w->p_value, wilcoxon_normal_p(wilcoxon_ranks(x, y), w->w_plus));
}

namespace {

// Two-sided p for Student's t with 5 degrees of freedom (closed form for odd df).
double t5_two_sided(double t) {
  const double th = std::atan(std::abs(t) / std::sqrt(5.0));
  const double c = std::cos(th);
  const double a = 2.0 / std::numbers::pi * (th + std::sin(th) * c * (1.0 + 2.0 / 3.0 * c * c));
  return 1.0 - a;
}

}  // namespace

TEST(PairedT, Examples) {
  EXPECT_FALSE(paired_t_test({2, 3, 4, 5}, {1, 2, 3, 4}));
  EXPECT_FALSE(paired_t_test({1}, {0}));
  const auto sym = paired_t_test({1, 0, 1, 0}, {0, 1, 0, 1});
  ASSERT_TRUE(sym);
  EXPECT_DOUBLE_EQ(sym->t, 0.0);
  EXPECT_DOUBLE_EQ(sym->p_value, 1.0);
}

TEST(PairedT, SixElementHandCheck) {
  // d = [2,4,1,3,5,3]: mean 3, sum of squares 10, sd sqrt(2), t = 3 / (sqrt(2)/sqrt(6)) = 3*sqrt(3)
  const auto r = paired_t_test({12, 14, 11, 13, 15, 13}, {10, 10, 10, 10, 10, 10});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->df, 5u);
  EXPECT_NEAR(r->t, 3.0 * std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(r->p_value, t5_two_sided(3.0 * std::sqrt(3.0)), 1e-9);
}

TEST(PairedT, SignFlipsWithArguments) {
  const std::vector<double> x = {1.5, 2.0, 0.2, 3.3, 1.1, 0.9}, y = {1.0, 2.2, 0.1, 2.0, 0.4, 1.0};
  const auto a = paired_t_test(x, y), b = paired_t_test(y, x);
  EXPECT_NEAR(a->t, -b->t, 1e-12);
  EXPECT_NEAR(a->p_value, b->p_value, 1e-12);
  EXPECT_NEAR(a->p_value, t5_two_sided(a->t), 1e-9);
}

TEST(FleissKappa, Examples) {
  EXPECT_DOUBLE_EQ(*fleiss_kappa({{3, 0}, {0, 3}, {3, 0}}, 3), 1.0);
  // (A,A),(A,B): P̄ = 0.5, Pe = (3/4)² + (1/4)² = 0.625, κ = -1/3
  EXPECT_NEAR(*fleiss_kappa({{2, 0}, {1, 1}}, 2), -1.0 / 3.0, 1e-12);
  EXPECT_FALSE(fleiss_kappa({{2, 0}, {2, 0}}, 2));
  EXPECT_THROW(fleiss_kappa({{2, 0}}, 2), DataError);
  EXPECT_THROW(fleiss_kappa({{2, 0}, {1, 0}}, 2), DataError);
  EXPECT_THROW(fleiss_kappa({{2, 0}, {2}}, 2), DataError);
}

TEST(FleissKappaProperty, MatchesPairwiseOracle) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Gen g(seed);
    const int raters = g.range(2, 5), cats = g.range(2, 5), items = g.range(2, 15);
    std::vector<std::vector<int>> labels(static_cast<std::size_t>(items)), table;
    for (auto& item : labels) {
      std::vector<int> row(static_cast<std::size_t>(cats), 0);
      for (int r = 0; r < raters; ++r) {
        item.push_back(g.range(0, cats - 1));
        ++row[static_cast<std::size_t>(item.back())];
      }
      table.push_back(row);
    }
    const auto k = fleiss_kappa(table, raters);
    if (!k) continue;
    EXPECT_NEAR(*k, oracle::kappa_from_labels(labels), 1e-12) << seed;
    EXPECT_LE(*k, 1.0 + 1e-12);
  }
}

TEST(FleissKappaProperty, SplittingAnItemLowersAgreement) {
  std::vector<std::vector<int>> t = {{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {3, 0, 0}};
  const double perfect = *fleiss_kappa(t, 3);
  t[3] = {1, 1, 1};
  EXPECT_LT(*fleiss_kappa(t, 3), perfect);
}

// ---- annotation aggregation ----

TEST(Annotations, RecordValidation) {
  auto g = grounding("i", "a", 4, 2);
  EXPECT_NO_THROW(g.validate());
  g.rating = 5;
  EXPECT_THROW(g.validate(), DataError);
  g.rating.reset();
  EXPECT_THROW(g.validate(), DataError);
  auto r = ranking("i", "a", {"original", "d1", "d2", "d3", "d4", "d5"});
  EXPECT_NO_THROW(r.validate());
  r.ranking = std::vector<int>{1, 2, 3, 4, 5, 5};
  EXPECT_THROW(r.validate(), DataError);
  r.ranking = std::vector<int>{1, 2, 3, 4, 5, 6};
  r.rating = 2;
  EXPECT_THROW(r.validate(), DataError);
  EXPECT_THROW(annotation_from_json(json{{"task", "vibes"}, {"item_id", "x"}, {"annotator_id", "y"}}), DataError);
  EXPECT_THROW(annotation_from_json(json{{"task", "grounding"}, {"item_id", "x"}}), DataError);
}

TEST(Annotations, JsonRoundTrip) {
  const auto g = grounding("i", "a", 3, 4);
  EXPECT_EQ(annotation_from_json(to_json(g)), g);
  const auto r = ranking("j", "b", {"original", "d1", "d2", "d3", "d4", "d5"});
  EXPECT_EQ(annotation_from_json(json::parse(to_json(r).dump())), r);
}

TEST(Annotations, GroundingBuckets) {
  std::vector<AnnotationRecord> all4;
  for (int d = 1; d <= 5; ++d) all4.push_back(grounding("i" + std::to_string(d), "a", 4, d));
  for (const auto& [d, pct] : grounding_bucket_rate(all4)) EXPECT_DOUBLE_EQ(pct, 100.0) << d;

  // {2,3,3} is grounded by majority; {2,3} ties to not grounded; single 1 is not.
  const std::vector<AnnotationRecord> mixed = {grounding("x", "a", 2, 1), grounding("x", "b", 3, 1), grounding("x", "c", 3, 1),
                                               grounding("y", "a", 2, 1), grounding("y", "b", 3, 1), grounding("z", "a", 1, 1),
                                               grounding("w", "a", 3, 2)};
  const auto rate = grounding_bucket_rate(mixed);
  EXPECT_NEAR(rate.at(1), 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(rate.at(2), 100.0);
  EXPECT_DOUBLE_EQ(grounding_bucket_rate(mixed, 4).at(2), 0.0);

  auto conflict = mixed;
  conflict.push_back(grounding("x", "d", 3, 5));
  EXPECT_THROW(grounding_bucket_rate(conflict), DataError);
}

TEST(Annotations, AverageRank) {
  const std::vector<std::string> ordered = {"original", "d1", "d2", "d3", "d4", "d5"};
  std::vector<AnnotationRecord> recs = {ranking("i", "a", ordered), ranking("j", "a", ordered), ranking("i", "b", ordered)};
  const auto avg = average_abstraction_rank(recs);
  EXPECT_DOUBLE_EQ(avg.at("original"), 1.0);
  EXPECT_DOUBLE_EQ(avg.at("d3"), 4.0);
  EXPECT_DOUBLE_EQ(avg.at("d5"), 6.0);

  std::vector<std::string> reversed(ordered.rbegin(), ordered.rend());
  const auto sym = average_abstraction_rank({ranking("i", "a", ordered), ranking("i", "b", reversed)});
  for (const auto& [type, v] : sym) EXPECT_DOUBLE_EQ(v, 3.5) << type;
  EXPECT_THROW(average_abstraction_rank({grounding("i", "a", 3, 1)}), DataError);
}

TEST(Annotations, AgreementTables) {
  const std::vector<AnnotationRecord> g = {grounding("x", "a", 4, 1), grounding("x", "b", 4, 1), grounding("x", "c", 3, 1),
                                           grounding("y", "a", 1, 2), grounding("y", "b", 1, 2), grounding("y", "c", 1, 2),
                                           grounding("z", "a", 2, 3)};
  const auto table = agreement_table(g, AnnotationTaskType::kGrounding, 3);
  EXPECT_EQ(table, (std::vector<std::vector<int>>{{0, 0, 1, 2}, {3, 0, 0, 0}}));

  const std::vector<std::string> ordered = {"original", "d1", "d2", "d3", "d4", "d5"};
  const std::vector<AnnotationRecord> r = {ranking("i", "a", ordered), ranking("i", "b", ordered), ranking("i", "c", ordered)};
  const auto rt = agreement_table(r, AnnotationTaskType::kRanking, 3);
  ASSERT_EQ(rt.size(), 6u);
  EXPECT_DOUBLE_EQ(*fleiss_kappa(rt, 3), 1.0);
}

// ---- reports ----

TEST(Reports, RetrievalReportJson) {
  SimilarityMatrix sim({"q0", "q1"}, {"a", "b"}, {0.9, 0.1, 0.9, 0.1});
  sim.set_gold({{"q0", "a"}, {"q1", "b"}});
  const auto j = to_json(retrieval_report(sim, {1, 2}));
  EXPECT_EQ(j["metric"], "retrieval");
  EXPECT_EQ(j["k"], json::array({1, 2}));
  EXPECT_DOUBLE_EQ(j["recall_at"]["1"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j["recall_at"]["2"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["avg_rank"].get<double>(), 1.5);
  EXPECT_FALSE(j.contains("test"));
  EXPECT_THROW(retrieval_report(sim, {3}), UsageError);

  const auto with_base = to_json(retrieval_report(sim, {1}, &sim));
  EXPECT_EQ(with_base["test"], "wilcoxon_signed_rank");
  EXPECT_TRUE(with_base["p_value"].is_null());
}

TEST(Reports, PreferenceReportJson) {
  const std::vector<double> a = {0.9, 0.8, 0.1, 0.6}, b = {0.1, 0.2, 0.3, 0.6};
  const std::vector<double> ba = {0.1, 0.2, 0.9, 0.5}, bb = {0.5, 0.5, 0.1, 0.6};
  const auto j = to_json(preference_report("matching", a, b, &ba, &bb));
  EXPECT_EQ(j["metric"], "matching");
  EXPECT_EQ(j["n"], 4);
  EXPECT_DOUBLE_EQ(j["preference_rate"].get<double>(), 0.625);
  EXPECT_EQ(j["test"], "paired_t_test");
  const auto t = paired_t_test(preference_outcomes(a, b), preference_outcomes(ba, bb));
  EXPECT_DOUBLE_EQ(j["p_value"].get<double>(), t->p_value);
}

// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Annotation task pool, assignment and judgment storage. Hidden metadata
// (degrees, caption types) stays server-side and is joined back on submit.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ladderkit/caption_forge.hpp"
#include "ladderkit/corpus.hpp"
#include "ladderkit/error.hpp"
#include "ladderkit/eval/annotations.hpp"
#include "ladderkit/gateway.hpp"
#include "ladderkit/jsonl.hpp"

namespace ladderkit::annotation {

using eval::AnnotationRecord;
using eval::AnnotationTaskType;

class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

/// Payload failed validation (HTTP 422).
class InvalidSubmissionError : public DataError {
 public:
  using DataError::DataError;
};

/// Submission conflicts with assignment state (HTTP 409).
class ConflictError : public DataError {
 public:
  using DataError::DataError;
};

struct AnnotationTask {
  std::string task_id;
  AnnotationTaskType type = AnnotationTaskType::kGrounding;
  std::string image_uri;
  // grounding
  std::string caption;
  int degree = 0;  // hidden
  // ranking: presentation order, and the hidden true type of each slot
  std::vector<std::string> captions;
  std::vector<std::string> slot_types;  // hidden
  int required_annotations = 1;
};

/// What the client sees. Never includes degree or slot types.
inline json wire_payload(const AnnotationTask& t) {
  json j = {{"task_id", t.task_id}, {"type", eval::to_string(t.type)}, {"image_uri", t.image_uri}};
  if (t.type == AnnotationTaskType::kGrounding) {
    j["caption"] = t.caption;
  } else {
    j["captions"] = t.captions;
  }
  return j;
}

inline json to_json(const AnnotationTask& t) {
  json j = wire_payload(t);
  j["required_annotations"] = t.required_annotations;
  if (t.type == AnnotationTaskType::kGrounding) {
    j["degree"] = t.degree;
  } else {
    j["slot_types"] = t.slot_types;
  }
  return j;
}

inline AnnotationTask task_from_json(const json& j) {
  AnnotationTask t;
  t.task_id = j.at("task_id").get<std::string>();
  auto type = eval::parse_task_type(j.at("type").get<std::string>());
  if (!type) throw DataError("unknown task type in pool");
  t.type = *type;
  t.image_uri = j.at("image_uri").get<std::string>();
  t.required_annotations = j.value("required_annotations", 1);
  if (t.type == AnnotationTaskType::kGrounding) {
    t.caption = j.at("caption").get<std::string>();
    t.degree = j.at("degree").get<int>();
  } else {
    t.captions = j.at("captions").get<std::vector<std::string>>();
    t.slot_types = j.at("slot_types").get<std::vector<std::string>>();
    if (t.captions.size() != eval::kRankingSlots || t.slot_types.size() != eval::kRankingSlots)
      throw DataError("ranking task " + t.task_id + " must carry exactly 6 captions");
  }
  return t;
}

/// Deterministic generator for sampling and presentation order; the output is
/// fixed across standard library implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : salt) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return SeededRng(seed ^ h).next();
}

/// Number of tasks that need triple annotation: ceil(fraction × pool).
inline std::size_t overlap_count(std::size_t pool_size, double fraction) {
  const double x = fraction * static_cast<double>(pool_size);
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

struct PoolConfig {
  std::size_t grounding_tasks = 100;  // balanced across the five degrees
  std::size_t ranking_tasks = 100;
  double overlap_fraction = 0.2;
  int overlap_annotators = 3;
  std::uint64_t seed = 0;
};

/// Marks exactly overlap_count(...) tasks of each type for multi-annotation.
inline void assign_overlap(std::vector<AnnotationTask>& pool, const PoolConfig& cfg) {
  for (auto type : {AnnotationTaskType::kGrounding, AnnotationTaskType::kRanking}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i].type == type) idx.push_back(i);
    SeededRng rng(mix_seed(cfg.seed, std::string("overlap/") + eval::to_string(type)));
    rng.shuffle(idx);
    const auto k = std::min(idx.size(), overlap_count(idx.size(), cfg.overlap_fraction));
    for (std::size_t i = 0; i < idx.size(); ++i) pool[idx[i]].required_annotations = i < k ? cfg.overlap_annotators : 1;
  }
}

/// Samples grounding tasks (admitted captions, equal share per degree) and
/// ranking tasks (original caption plus one caption per degree, shuffled).
inline std::vector<AnnotationTask> build_task_pool(const std::vector<ImageRecord>& images,
                                                   const std::vector<CreativeCaption>& captions, const PoolConfig& cfg) {
  std::map<std::string, const ImageRecord*> by_id;
  for (const auto& r : images) by_id.emplace(r.image_id, &r);
  std::array<std::vector<const CreativeCaption*>, kNumDegrees> by_degree;
  std::map<std::string, std::array<std::vector<const CreativeCaption*>, kNumDegrees>> by_image;
  for (const auto& c : captions) {
    if (!c.admitted() || !by_id.contains(c.image_id)) continue;
    by_degree[c.degree.index()].push_back(&c);
    by_image[c.image_id][c.degree.index()].push_back(&c);
  }

  std::vector<AnnotationTask> pool;
  const std::size_t per_degree = cfg.grounding_tasks / kNumDegrees;
  for (auto d : all_degrees()) {
    auto cands = by_degree[d.index()];
    SeededRng rng(mix_seed(cfg.seed, "grounding/" + std::to_string(d.value())));
    rng.shuffle(cands);
    cands.resize(std::min(cands.size(), per_degree));
    for (const auto* c : cands) {
      AnnotationTask t;
      t.type = AnnotationTaskType::kGrounding;
      t.image_uri = by_id[c->image_id]->image_uri;
      t.caption = c->text;
      t.degree = d.value();
      pool.push_back(std::move(t));
    }
  }
  // Interleave degrees so a rater does not see them in blocks.
  {
    SeededRng rng(mix_seed(cfg.seed, "grounding/order"));
    rng.shuffle(pool);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].task_id = "g" + std::to_string(i + 1);

  std::vector<std::string> eligible;
  for (const auto& [id, degrees] : by_image)
    if (std::all_of(degrees.begin(), degrees.end(), [](const auto& v) { return !v.empty(); })) eligible.push_back(id);
  SeededRng rng(mix_seed(cfg.seed, "ranking/images"));
  rng.shuffle(eligible);
  eligible.resize(std::min(eligible.size(), cfg.ranking_tasks));
  std::size_t next_id = 1;
  for (const auto& id : eligible) {
    AnnotationTask t;
    t.type = AnnotationTaskType::kRanking;
    t.task_id = "r" + std::to_string(next_id++);
    t.image_uri = by_id[id]->image_uri;
    std::vector<std::pair<std::string, std::string>> slots = {{by_id[id]->c_short, "original"}};
    SeededRng pick(mix_seed(cfg.seed, "ranking/pick/" + id));
    for (auto d : all_degrees()) {
      const auto& opts = by_image[id][d.index()];
      slots.emplace_back(opts[pick.below(opts.size())]->text, "d" + std::to_string(d.value()));
    }
    SeededRng order(mix_seed(cfg.seed, "ranking/order/" + t.task_id));
    order.shuffle(slots);
    for (auto& [text, type] : slots) {
      t.captions.push_back(text);
      t.slot_types.push_back(type);
    }
    pool.push_back(std::move(t));
  }
  assign_overlap(pool, cfg);
  return pool;
}

inline void write_task_pool(const std::filesystem::path& path, const std::vector<AnnotationTask>& pool) {
  std::vector<json> rows;
  for (const auto& t : pool) rows.push_back(to_json(t));
  io::write_jsonl(path, rows);
}

inline std::vector<AnnotationTask> read_task_pool(const std::filesystem::path& path) {
  std::vector<AnnotationTask> pool;
  io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    try {
      pool.push_back(task_from_json(j));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line, 0, e.what());
    }
  });
  return pool;
}

struct TaskProgress {
  std::size_t tasks = 0;
  std::size_t required = 0;   // total judgments the pool needs
  std::size_t submitted = 0;
  std::size_t complete_tasks = 0;
};

/// Thread-safe assignment and storage. Submissions are appended to a JSONL
/// file through one writer; a restarted service reloads it.
class AnnotationService {
 public:
  explicit AnnotationService(std::vector<AnnotationTask> pool, std::optional<std::filesystem::path> store = std::nullopt)
      : pool_(std::move(pool)), store_(std::move(store)) {
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (!index_.emplace(pool_[i].task_id, i).second) throw DataError("duplicate task id " + pool_[i].task_id);
    }
    state_.resize(pool_.size());
    if (store_ && std::filesystem::exists(*store_)) {
      for (auto& r : eval::read_annotations(*store_)) {
        auto it = index_.find(r.item_id);
        if (it == index_.end()) throw DataError("stored annotation for unknown task " + r.item_id);
        state_[it->second].assigned.insert(r.annotator_id);
        state_[it->second].submitted.insert(r.annotator_id);
        records_.push_back(std::move(r));
      }
    }
  }

  const std::vector<AnnotationTask>& pool() const { return pool_; }

  /// A task this annotator has not seen that still needs judgments, or the
  /// one already granted to them and not yet submitted. nullopt when done.
  std::optional<AnnotationTask> next_task(const std::string& annotator, AnnotationTaskType type) {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (pool_[i].type != type) continue;
      const auto& st = state_[i];
      if (st.assigned.contains(annotator) && !st.submitted.contains(annotator)) return pool_[i];
    }
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (pool_[i].type != type) continue;
      auto& st = state_[i];
      if (st.assigned.contains(annotator)) continue;
      if (static_cast<int>(st.assigned.size()) >= pool_[i].required_annotations) continue;
      st.assigned.insert(annotator);
      return pool_[i];
    }
    return std::nullopt;
  }

  /// Validates the payload ({rating} or {ranking}), resolves hidden metadata and
  /// stores the record.
  AnnotationRecord submit_annotation(const std::string& annotator, const std::string& task_id, const json& payload) {
    std::lock_guard lock(mu_);
    auto it = index_.find(task_id);
    if (it == index_.end()) throw NotFoundError("unknown task " + task_id);
    const auto& task = pool_[it->second];
    auto& st = state_[it->second];
    if (st.submitted.contains(annotator)) throw ConflictError("annotator already submitted task " + task_id);
    if (!st.assigned.contains(annotator) && static_cast<int>(st.assigned.size()) >= task.required_annotations)
      throw ConflictError("task " + task_id + " needs no further annotations");

    AnnotationRecord rec;
    rec.task = task.type;
    rec.item_id = task_id;
    rec.annotator_id = annotator;
    if (task.type == AnnotationTaskType::kGrounding) {
      auto r = payload.find("rating");
      if (r == payload.end() || !r->is_number_integer()) throw InvalidSubmissionError("rating must be an integer");
      const int rating = r->get<int>();
      if (rating < eval::kMinRating || rating > eval::kMaxRating) throw InvalidSubmissionError("rating must be in 1..4");
      if (payload.contains("ranking")) throw InvalidSubmissionError("grounding tasks take a rating only");
      rec.rating = rating;
      rec.degree = task.degree;
    } else {
      auto r = payload.find("ranking");
      if (r == payload.end() || !r->is_array()) throw InvalidSubmissionError("ranking must be an array");
      std::vector<int> ranking;
      for (const auto& v : *r) {
        if (!v.is_number_integer()) throw InvalidSubmissionError("ranking entries must be integers");
        ranking.push_back(v.get<int>());
      }
      if (!eval::is_slot_permutation(ranking)) throw InvalidSubmissionError("ranking must be a permutation of slots 1..6");
      if (payload.contains("rating")) throw InvalidSubmissionError("ranking tasks take a ranking only");
      rec.ranking = std::move(ranking);
      rec.slot_types = task.slot_types;
    }
    rec.timestamp = utc_timestamp();
    if (store_) {
      if (store_->has_parent_path()) std::filesystem::create_directories(store_->parent_path());
      std::ofstream out(*store_, std::ios::app | std::ios::binary);
      if (!out) throw DataError("cannot append to " + store_->string());
      out << eval::to_json(rec).dump() << '\n';
    }
    st.assigned.insert(annotator);
    st.submitted.insert(annotator);
    records_.push_back(rec);
    return rec;
  }

  std::vector<AnnotationRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  std::map<AnnotationTaskType, TaskProgress> progress() const {
    std::lock_guard lock(mu_);
    std::map<AnnotationTaskType, TaskProgress> out;
    out[AnnotationTaskType::kGrounding];
    out[AnnotationTaskType::kRanking];
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      auto& p = out[pool_[i].type];
      ++p.tasks;
      p.required += static_cast<std::size_t>(pool_[i].required_annotations);
      p.submitted += state_[i].submitted.size();
      p.complete_tasks += static_cast<int>(state_[i].submitted.size()) >= pool_[i].required_annotations;
    }
    return out;
  }

  static std::string issue_token() {
    std::random_device rd;
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (int i = 0; i < 32; ++i) out.push_back(kHex[rd() & 0xF]);
    return out;
  }

 private:
  struct TaskState {
    std::set<std::string> assigned;
    std::set<std::string> submitted;
  };

  std::vector<AnnotationTask> pool_;
  std::optional<std::filesystem::path> store_;
  std::map<std::string, std::size_t> index_;
  std::vector<TaskState> state_;
  std::vector<AnnotationRecord> records_;
  mutable std::mutex mu_;
};

/// JSONL consumable by the eval harness (read back with eval::read_annotations).
inline std::string export_annotations(const std::vector<AnnotationRecord>& records) {
  std::vector<json> rows;
  for (const auto& r : records) rows.push_back(eval::to_json(r));
  return io::to_jsonl(rows);
}

inline json progress_json(const std::map<AnnotationTaskType, TaskProgress>& p) {
  json j = json::object();
  for (const auto& [type, tp] : p)
    j[eval::to_string(type)] = {{"tasks", tp.tasks}, {"required_annotations", tp.required},
                                {"submitted", tp.submitted}, {"complete_tasks", tp.complete_tasks}};
  return j;
}

}  // namespace ladderkit::annotation

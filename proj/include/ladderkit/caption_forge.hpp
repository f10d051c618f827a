// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Stage 3: one creative caption per (image, element, association, degree),
// checked against the prompt's constraints.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "ladderkit/corpus.hpp"
#include "ladderkit/gateway.hpp"
#include "ladderkit/ladder.hpp"
#include "ladderkit/miner.hpp"
#include "ladderkit/prompts.hpp"
#include "ladderkit/text.hpp"

namespace ladderkit {

enum class CaptionFlag { kMissingRequiredWord, kOverLength, kGenerationFailed };

inline const char* to_string(CaptionFlag f) {
  switch (f) {
    case CaptionFlag::kMissingRequiredWord: return "missing_required_word";
    case CaptionFlag::kOverLength: return "over_length";
    case CaptionFlag::kGenerationFailed: return "generation_failed";
  }
  return "";
}

inline std::optional<CaptionFlag> parse_caption_flag(std::string_view s) {
  for (auto f : {CaptionFlag::kMissingRequiredWord, CaptionFlag::kOverLength, CaptionFlag::kGenerationFailed})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

using CaptionFlags = std::set<CaptionFlag>;

/// Captions must use fewer than this many words.
inline constexpr std::size_t kMaxCaptionWords = 10;
/// Extra draws after a caption misses its required word.
inline constexpr int kCaptionRetries = 2;

inline std::size_t caption_word_count(std::string_view caption) { return text::stripped_whitespace_tokens(caption).size(); }

/// Case-insensitive whole-word match. Hyphens and apostrophes are word-internal;
/// a trailing possessive on the caption word is ignored ("Journey's" matches
/// "journey"). Multiword targets match as a contiguous token sequence.
inline bool contains_whole_word(std::string_view caption, std::string_view word) {
  std::vector<std::string> needle;
  for (auto& t : text::tokenize_words(word)) needle.push_back(text::to_lower(t.text));
  if (needle.empty()) return false;
  const auto hay = text::tokenize_words(caption);
  auto same = [](const std::string& tok, const std::string& want) {
    const auto l = text::to_lower(tok);
    return l == want || text::strip_possessive(l) == want;
  };
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool all = true;
    for (std::size_t k = 0; k < needle.size() && all; ++k) all = same(hay[i + k].text, needle[k]);
    if (all) return true;
  }
  return false;
}

inline CaptionFlags validate_caption(std::string_view caption, std::string_view new_word) {
  CaptionFlags flags;
  if (!contains_whole_word(caption, new_word)) flags.insert(CaptionFlag::kMissingRequiredWord);
  if (caption_word_count(caption) >= kMaxCaptionWords) flags.insert(CaptionFlag::kOverLength);
  return flags;
}

/// Comma-joined salient words with the target replaced by the association.
inline std::string build_all_words(const std::vector<SalientElement>& elements, const std::string& target,
                                   const std::string& association) {
  std::vector<std::string> words;
  bool found = false;
  for (const auto& e : elements) {
    if (e.surface == target) {
      if (found) throw DataError("target element '" + target + "' appears twice in the element list");
      found = true;
      words.push_back(association);
    } else {
      words.push_back(e.surface);
    }
  }
  if (!found) throw DataError("target element '" + target + "' is not among the image's salient elements");
  return text::join(words, ", ");
}

struct CreativeCaption {
  std::string image_id;
  std::string element_surface;
  std::string association;
  AbstractionDegree degree{1};
  std::string text;
  std::size_t word_count = 0;
  CaptionFlags constraint_flags;

  bool admitted() const {
    return !constraint_flags.contains(CaptionFlag::kMissingRequiredWord) &&
           !constraint_flags.contains(CaptionFlag::kGenerationFailed);
  }
};

inline json to_json(const CreativeCaption& c) {
  json flags = json::array();
  for (auto f : c.constraint_flags) flags.push_back(to_string(f));
  return {{"image_id", c.image_id}, {"element", c.element_surface}, {"association", c.association},
          {"degree", c.degree.value()}, {"caption", c.text}, {"flags", flags}};
}

inline CreativeCaption caption_from_json(const json& j) {
  try {
    CreativeCaption c;
    c.image_id = j.at("image_id").get<std::string>();
    c.element_surface = j.at("element").get<std::string>();
    c.association = j.at("association").get<std::string>();
    c.degree = AbstractionDegree(j.at("degree").get<int>());
    c.text = j.at("caption").get<std::string>();
    c.word_count = caption_word_count(c.text);
    for (const auto& f : j.at("flags")) {
      auto flag = parse_caption_flag(f.get<std::string>());
      if (!flag) throw DataError("unknown caption flag " + f.dump());
      c.constraint_flags.insert(*flag);
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed caption record: ") + e.what());
  }
}

struct CaptionJob {
  const ImageRecord* record;
  const std::vector<SalientElement>* elements;  // the image's full element list
  std::string element;
  std::string association;
  AbstractionDegree degree{1};
};

inline ModelRequest creative_caption_request(const CaptionJob& job, const StageOptions& opts, int variant) {
  ModelRequest req;
  req.backend_id = opts.vision_backend;
  req.prompt = render_prompt(TemplateId::kCreativeCaption,
                             {{"all_words", build_all_words(*job.elements, job.element, job.association)},
                              {"level", std::to_string(job.degree.value())},
                              {"new_word", job.association}});
  req.image_uri = job.record->image_uri;
  req.params = ModelParams::vision();
  req.variant = variant;
  return req;
}

/// Generates captions for all jobs. A caption missing its required word is
/// redrawn up to kCaptionRetries times; whatever survives carries its flags.
inline std::vector<CreativeCaption> generate_creative_captions(const std::vector<CaptionJob>& jobs, Gateway& gateway,
                                                               const StageOptions& opts = {},
                                                               int retries = kCaptionRetries) {
  std::vector<CreativeCaption> out(jobs.size());
  std::vector<std::size_t> pending(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    pending[i] = i;
    out[i].image_id = jobs[i].record->image_id;
    out[i].element_surface = jobs[i].element;
    out[i].association = jobs[i].association;
    out[i].degree = jobs[i].degree;
  }
  for (int variant = 0; variant <= retries && !pending.empty(); ++variant) {
    std::vector<ModelRequest> reqs;
    reqs.reserve(pending.size());
    for (auto i : pending) reqs.push_back(creative_caption_request(jobs[i], opts, variant));
    auto responses = gateway.submit(reqs, opts.policy);
    detail::throw_on_replay_miss(responses);
    std::vector<std::size_t> again;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      auto& cap = out[pending[k]];
      const auto text = text::normalize_whitespace(responses[k].text);
      if (!responses[k].ok() || text.empty()) {
        // Keep an earlier draw if there was one.
        if (cap.text.empty()) cap.constraint_flags = {CaptionFlag::kGenerationFailed};
        continue;
      }
      cap.text = text;
      cap.word_count = caption_word_count(text);
      cap.constraint_flags = validate_caption(text, cap.association);
      if (cap.constraint_flags.contains(CaptionFlag::kMissingRequiredWord)) again.push_back(pending[k]);
    }
    pending = std::move(again);
  }
  return out;
}

inline CreativeCaption generate_creative_caption(const ImageRecord& record, const std::vector<SalientElement>& elements,
                                                 const std::string& element, const std::string& association,
                                                 AbstractionDegree degree, Gateway& gateway, const StageOptions& opts = {}) {
  return generate_creative_captions({CaptionJob{&record, &elements, element, association, degree}}, gateway, opts).front();
}

/// Jobs for every association of every ladder: |elements| × 5 × 3 per image.
inline std::vector<CaptionJob> caption_jobs_for(const ImageRecord& record, const std::vector<SalientElement>& elements,
                                                const std::vector<AssociationLadder>& ladders) {
  std::vector<CaptionJob> jobs;
  for (const auto& l : ladders)
    for (auto d : all_degrees())
      for (const auto& a : l.at(d)) jobs.push_back({&record, &elements, l.element.surface, a, d});
  return jobs;
}

}  // namespace ladderkit

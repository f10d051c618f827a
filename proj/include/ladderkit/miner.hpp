// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Stage 1 (detailed captions) and stage 2 (association ladders) of the
// generation pipeline. Both run batched through the gateway.

#pragma once

#include <string>
#include <vector>

#include "ladderkit/corpus.hpp"
#include "ladderkit/gateway.hpp"
#include "ladderkit/ladder.hpp"
#include "ladderkit/prompts.hpp"
#include "ladderkit/salience.hpp"

namespace ladderkit {

struct StageOptions {
  std::string vision_backend = "vlm";
  std::string text_backend = "llm";
  SubmitPolicy policy;
  bool overwrite = false;
};

namespace detail {

/// Replay misses are hard errors: a test fixture is incomplete.
inline void throw_on_replay_miss(const std::vector<ModelResponse>& responses) {
  for (const auto& r : responses)
    if (r.error && r.error->kind == FailureKind::kReplayMiss) throw ReplayMissError(r.request_digest);
}

}  // namespace detail

inline ModelRequest detailed_caption_request(const ImageRecord& record, const StageOptions& opts) {
  ModelRequest req;
  req.backend_id = opts.vision_backend;
  req.prompt = render_prompt(TemplateId::kDetailedCaption);
  req.image_uri = record.image_uri;
  req.params = ModelParams::vision();
  return req;
}

/// Sets c_detailed on every record that lacks one (or all, with overwrite).
/// Failed records get skip_reason "caption_failed" and are retried on the
/// next run.
inline std::vector<ImageRecord> generate_detailed_captions(std::vector<ImageRecord> records, Gateway& gateway,
                                                           const StageOptions& opts = {}) {
  std::vector<ModelRequest> reqs;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].skip_reason && *records[i].skip_reason != "caption_failed") continue;
    if (records[i].c_detailed && !opts.overwrite) continue;
    reqs.push_back(detailed_caption_request(records[i], opts));
    slots.push_back(i);
  }
  auto responses = gateway.submit(reqs, opts.policy);
  detail::throw_on_replay_miss(responses);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    auto& rec = records[slots[k]];
    const auto text = std::string(text::trim(responses[k].text));
    if (!responses[k].ok() || text.empty()) {
      rec.skip_reason = "caption_failed";
      continue;
    }
    rec.c_detailed = text;
    rec.skip_reason.reset();
  }
  return records;
}

inline ImageRecord generate_detailed_caption(ImageRecord record, Gateway& gateway, const StageOptions& opts = {}) {
  return generate_detailed_captions({std::move(record)}, gateway, opts).front();
}

struct MiningFailure {
  std::string image_id;
  std::string element;
  std::string reason;  // "mining_failed" or "gateway_failed"
  std::vector<Diagnostic> diagnostics;
};

inline json to_json(const MiningFailure& f) {
  json diags = json::array();
  for (const auto& d : f.diagnostics) diags.push_back(to_json(d));
  return {{"image_id", f.image_id}, {"element", f.element}, {"reason", f.reason}, {"diagnostics", diags}};
}

struct MiningResult {
  std::vector<AssociationLadder> ladders;  // element order of the input
  std::vector<MiningFailure> failures;
};

struct MiningJob {
  const ImageRecord* record;
  std::vector<SalientElement> elements;
};

inline std::string element_list_json(const std::vector<SalientElement>& elements) {
  json words = json::array();
  for (const auto& e : elements) words.push_back(e.surface);
  return words.dump();
}

inline ModelRequest mining_request(const ImageRecord& record, const std::vector<SalientElement>& elements,
                                   const StageOptions& opts) {
  if (!record.c_detailed) throw DataError("image " + record.image_id + " has no detailed caption");
  ModelRequest req;
  req.backend_id = opts.text_backend;
  req.system = render_prompt(TemplateId::kMineAssociations,
                             {{"context_caption", *record.c_detailed}, {"original_caption", record.c_short}});
  req.prompt = element_list_json(elements);
  req.params = ModelParams::text_association();
  return req;
}

/// The original request with the validator's findings appended.
inline ModelRequest repair_request(ModelRequest original, const std::vector<Diagnostic>& diagnostics) {
  original.prompt += "\n\nYour previous answer was invalid:\n";
  for (const auto& d : diagnostics) original.prompt += "- " + d.message() + "\n";
  original.prompt += "Answer again with the corrected JSON for every word.";
  return original;
}

/// Mines ladders for many images: one request per image, then one repair
/// reprompt for images with invalid elements. Elements still invalid after the
/// repair are reported as "mining_failed".
inline std::vector<MiningResult> mine_associations_batch(const std::vector<MiningJob>& jobs, Gateway& gateway,
                                                         const StageOptions& opts = {}) {
  std::vector<MiningResult> results(jobs.size());
  std::vector<ModelRequest> reqs;
  reqs.reserve(jobs.size());
  for (const auto& job : jobs) {
    if (job.elements.empty()) throw DataError("image " + job.record->image_id + ": no salient elements to mine");
    reqs.push_back(mining_request(*job.record, job.elements, opts));
  }
  auto first = gateway.submit(reqs, opts.policy);
  detail::throw_on_replay_miss(first);

  std::vector<LadderParse> parses(jobs.size());
  std::vector<ModelRequest> repairs;
  std::vector<std::size_t> repair_slots;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!first[i].ok()) continue;
    parses[i] = parse_ladder_json(first[i].text, jobs[i].elements);
    if (!parses[i].failed_words(jobs[i].elements).empty()) {
      repairs.push_back(repair_request(reqs[i], parses[i].diagnostics));
      repair_slots.push_back(i);
    }
  }
  auto second = gateway.submit(repairs, opts.policy);
  detail::throw_on_replay_miss(second);
  std::vector<std::optional<LadderParse>> repaired(jobs.size());
  for (std::size_t k = 0; k < repair_slots.size(); ++k)
    if (second[k].ok()) repaired[repair_slots[k]] = parse_ladder_json(second[k].text, jobs[repair_slots[k]].elements);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    auto& res = results[i];
    for (const auto& e : job.elements) {
      if (!first[i].ok()) {
        res.failures.push_back({job.record->image_id, e.surface, "gateway_failed",
                                {{DiagnosticKind::kNonJson, e.surface, 0, first[i].error->message}}});
        continue;
      }
      const Rungs* rungs = nullptr;
      if (auto it = parses[i].ladders.find(e.surface); it != parses[i].ladders.end()) {
        rungs = &it->second;
      } else if (repaired[i]) {
        if (auto jt = repaired[i]->ladders.find(e.surface); jt != repaired[i]->ladders.end()) rungs = &jt->second;
      }
      if (rungs) {
        res.ladders.push_back({job.record->image_id, e, *rungs});
        continue;
      }
      std::vector<Diagnostic> diags;
      const auto& last = repaired[i] ? *repaired[i] : parses[i];
      for (const auto& d : last.diagnostics)
        if (d.word == e.surface || d.word.empty()) diags.push_back(d);
      res.failures.push_back({job.record->image_id, e.surface, "mining_failed", std::move(diags)});
    }
  }
  return results;
}

inline MiningResult mine_associations(const ImageRecord& record, const std::vector<SalientElement>& elements,
                                      Gateway& gateway, const StageOptions& opts = {}) {
  return mine_associations_batch({MiningJob{&record, elements}}, gateway, opts).front();
}

}  // namespace ladderkit

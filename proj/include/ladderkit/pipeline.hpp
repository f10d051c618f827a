// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Store-to-store pipeline stages: ingest → describe → mine → caption.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ladderkit/caption_forge.hpp"
#include "ladderkit/corpus.hpp"
#include "ladderkit/gateway.hpp"
#include "ladderkit/miner.hpp"
#include "ladderkit/salience.hpp"
#include "ladderkit/store.hpp"

namespace ladderkit {

struct StageSummary {
  std::size_t processed = 0;
  std::size_t failed = 0;
  std::size_t produced = 0;
};

inline json to_json(const StageSummary& s) {
  return {{"processed", s.processed}, {"failed", s.failed}, {"produced", s.produced}};
}

inline StageSummary ingest(const DatasetStore& store, const std::filesystem::path& manifest, CorpusFormat format,
                           const LoadOptions& opts = {}, const json& config_snapshot = nullptr) {
  const auto corpus = load_corpus(manifest, format, opts);
  store.write_images(corpus.records());
  store.write_manifest(config_snapshot);
  return {corpus.size(), 0, corpus.size()};
}

inline StageSummary describe(const DatasetStore& store, Gateway& gateway, const StageOptions& opts = {},
                             const json& config_snapshot = nullptr) {
  auto images = store.read_images();
  StageSummary s;
  for (const auto& r : images) s.processed += !r.skip_reason && (!r.c_detailed || opts.overwrite);
  images = generate_detailed_captions(std::move(images), gateway, opts);
  for (const auto& r : images) {
    s.failed += r.skip_reason == std::optional<std::string>("caption_failed");
    s.produced += r.c_detailed.has_value();
  }
  store.write_images(images);
  store.write_manifest(config_snapshot);
  return s;
}

struct MineOptions {
  StageOptions stage;
  double threshold = kDefaultConcretenessThreshold;
};

/// Extracts salient elements and mines one ladder per element for every
/// described image. Images without elements are marked "no_salient_elements".
inline StageSummary mine(const DatasetStore& store, Gateway& gateway, const PosTagger& tagger,
                         const ConcretenessLexicon& lexicon, const MineOptions& opts = {},
                         const json& config_snapshot = nullptr) {
  auto images = store.read_images();
  std::vector<ImageElements> elements;
  std::vector<MiningJob> jobs;
  for (auto& r : images) {
    if (r.skip_reason || !r.c_detailed) continue;
    auto found = extract_salient_elements(tagger.tag(r.image_id, r.c_short), lexicon, opts.threshold);
    if (found.empty()) {
      r.skip_reason = "no_salient_elements";
      continue;
    }
    elements.push_back({r.image_id, std::move(found)});
  }
  for (std::size_t i = 0, k = 0; i < images.size() && k < elements.size(); ++i)
    if (images[i].image_id == elements[k].image_id) jobs.push_back({&images[i], elements[k++].elements});

  const auto results = mine_associations_batch(jobs, gateway, opts.stage);
  std::vector<AssociationLadder> ladders;
  std::vector<MiningFailure> failures;
  for (const auto& res : results) {
    ladders.insert(ladders.end(), res.ladders.begin(), res.ladders.end());
    failures.insert(failures.end(), res.failures.begin(), res.failures.end());
  }
  store.write_images(images);
  store.write_elements(elements);
  store.write_ladders(ladders);
  store.write_mining_failures(failures);
  store.write_manifest(config_snapshot);
  StageSummary s;
  for (const auto& e : elements) s.processed += e.elements.size();
  s.failed = failures.size();
  s.produced = ladders.size();
  return s;
}

/// One creative caption per (element, degree, association) of every ladder.
inline StageSummary caption(const DatasetStore& store, Gateway& gateway, const StageOptions& opts = {},
                            const json& config_snapshot = nullptr) {
  const auto images = store.read_images();
  const auto all_elements = store.read_elements();
  const auto ladders = store.read_ladders();
  std::map<std::string, const ImageRecord*> by_id;
  for (const auto& r : images) by_id.emplace(r.image_id, &r);
  std::map<std::string, const std::vector<SalientElement>*> elements_of;
  for (const auto& e : all_elements) elements_of.emplace(e.image_id, &e.elements);
  std::map<std::string, std::vector<AssociationLadder>> ladders_of;
  for (const auto& l : ladders) ladders_of[l.image_id].push_back(l);

  std::vector<CaptionJob> jobs;
  for (const auto& r : images) {
    auto lt = ladders_of.find(r.image_id);
    if (lt == ladders_of.end()) continue;
    auto et = elements_of.find(r.image_id);
    if (et == elements_of.end()) throw DataError("ladders for " + r.image_id + " but no salient elements on record");
    auto image_jobs = caption_jobs_for(r, *et->second, lt->second);
    jobs.insert(jobs.end(), image_jobs.begin(), image_jobs.end());
  }
  const auto captions = generate_creative_captions(jobs, gateway, opts);
  store.write_captions(captions);
  store.write_manifest(config_snapshot);
  StageSummary s;
  s.processed = jobs.size();
  for (const auto& c : captions) (c.admitted() ? s.produced : s.failed)++;
  return s;
}

}  // namespace ladderkit

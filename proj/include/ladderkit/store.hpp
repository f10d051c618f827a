// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ladderkit/caption_forge.hpp"
#include "ladderkit/corpus.hpp"
#include "ladderkit/digest.hpp"
#include "ladderkit/jsonl.hpp"
#include "ladderkit/ladder.hpp"
#include "ladderkit/miner.hpp"
#include "ladderkit/salience.hpp"

namespace ladderkit {

inline constexpr int kStoreSchemaVersion = 1;

struct ImageElements {
  std::string image_id;
  std::vector<SalientElement> elements;
};

inline json to_json(const ImageElements& ie) {
  json arr = json::array();
  for (const auto& e : ie.elements)
    arr.push_back({{"surface", e.surface}, {"pos", to_string(e.pos)}, {"concreteness", e.concreteness},
                   {"offset", e.source_caption_offset}});
  return {{"image_id", ie.image_id}, {"elements", arr}};
}

inline ImageElements image_elements_from_json(const json& j) {
  ImageElements ie;
  ie.image_id = j.at("image_id").get<std::string>();
  for (const auto& e : j.at("elements"))
    ie.elements.push_back({e.at("surface").get<std::string>(), parse_pos(e.at("pos").get<std::string>()),
                           e.at("concreteness").get<double>(), e.at("offset").get<std::size_t>()});
  return ie;
}

/// Directory of JSONL artifacts plus manifest.json:
///   images.jsonl    ImageRecords (caption_jsonl superset)
///   elements.jsonl  salient elements per image
///   ladders.jsonl   {image_id, element, pos, rungs}
///   captions.jsonl  {image_id, element, association, degree, caption, flags[]}
///   mining_failures.jsonl, reports/*.json
/// Each stage rewrites its artifact atomically; a single writer is assumed.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(std::string_view name) const { return dir_ / name; }
  std::filesystem::path reports_dir() const { return dir_ / "reports"; }
  bool has(std::string_view name) const { return std::filesystem::exists(path(name)); }

  void write_images(const std::vector<ImageRecord>& records) const {
    std::vector<json> rows;
    for (const auto& r : records) rows.push_back(to_json(r));
    io::write_jsonl(path("images.jsonl"), rows);
  }

  std::vector<ImageRecord> read_images() const {
    if (!has("images.jsonl")) throw DataError("store " + dir_.string() + " has no images.jsonl (run ingest first)");
    std::vector<ImageRecord> out;
    io::for_each_jsonl(path("images.jsonl"), [&](std::size_t line, const json& j) {
      out.push_back(detail::record_from_caption_line(j, line, path("images.jsonl").string()));
    });
    return out;
  }

  void write_elements(const std::vector<ImageElements>& all) const {
    std::vector<json> rows;
    for (const auto& e : all) rows.push_back(to_json(e));
    io::write_jsonl(path("elements.jsonl"), rows);
  }

  std::vector<ImageElements> read_elements() const {
    std::vector<ImageElements> out;
    if (!has("elements.jsonl")) return out;
    for (const auto& j : io::read_jsonl(path("elements.jsonl"))) out.push_back(image_elements_from_json(j));
    return out;
  }

  void write_ladders(const std::vector<AssociationLadder>& ladders) const {
    std::vector<json> rows;
    for (const auto& l : ladders) rows.push_back(to_json(l));
    io::write_jsonl(path("ladders.jsonl"), rows);
  }

  std::vector<AssociationLadder> read_ladders() const {
    std::vector<AssociationLadder> out;
    if (!has("ladders.jsonl")) return out;
    for (const auto& j : io::read_jsonl(path("ladders.jsonl"))) out.push_back(ladder_from_json(j));
    return out;
  }

  void write_mining_failures(const std::vector<MiningFailure>& failures) const {
    std::vector<json> rows;
    for (const auto& f : failures) rows.push_back(to_json(f));
    io::write_jsonl(path("mining_failures.jsonl"), rows);
  }

  void write_captions(const std::vector<CreativeCaption>& captions, std::string_view name = "captions.jsonl") const {
    std::vector<json> rows;
    for (const auto& c : captions) rows.push_back(to_json(c));
    io::write_jsonl(path(name), rows);
  }

  std::vector<CreativeCaption> read_captions(std::string_view name = "captions.jsonl") const {
    std::vector<CreativeCaption> out;
    if (!has(name)) return out;
    for (const auto& j : io::read_jsonl(path(name))) out.push_back(caption_from_json(j));
    return out;
  }

  void write_report(const std::string& name, const json& report) const {
    io::write_file_atomic(reports_dir() / (name + ".json"), report.dump(2) + "\n");
  }

  json read_manifest() const {
    if (!has("manifest.json")) return json::object();
    return json::parse(io::read_file(path("manifest.json")));
  }

  /// Rewrites manifest.json: schema version, artifact counts and digests, and
  /// the run configuration snapshot (kept from the previous manifest if null).
  void write_manifest(const json& config_snapshot = nullptr) const {
    json m = read_manifest();
    m["schema_version"] = kStoreSchemaVersion;
    json counts = json::object();
    json digests = json::object();
    for (const char* name : {"images.jsonl", "elements.jsonl", "ladders.jsonl", "captions.jsonl",
                             "captions.dropped.jsonl", "mining_failures.jsonl"}) {
      if (!has(name)) continue;
      digests[name] = sha256_file(path(name));
    }
    if (has("images.jsonl")) {
      const auto images = read_images();
      counts["images"] = images.size();
      counts["images_skipped"] = std::count_if(images.begin(), images.end(), [](const ImageRecord& r) { return r.skip_reason.has_value(); });
    }
    if (has("ladders.jsonl")) counts["ladders"] = io::read_jsonl(path("ladders.jsonl")).size();
    if (has("mining_failures.jsonl")) counts["mining_failures"] = io::read_jsonl(path("mining_failures.jsonl")).size();
    if (has("captions.jsonl") || has("captions.dropped.jsonl")) {
      auto caps = read_captions();
      const auto dropped_file = read_captions("captions.dropped.jsonl");
      const auto admitted = static_cast<std::size_t>(std::count_if(caps.begin(), caps.end(), [](const CreativeCaption& c) { return c.admitted(); }));
      counts["captions_generated"] = caps.size() + dropped_file.size();
      counts["captions_admitted"] = admitted;
      counts["captions_dropped"] = caps.size() - admitted + dropped_file.size();
    }
    m["counts"] = counts;
    m["digests"] = digests;
    if (!config_snapshot.is_null()) m["config"] = config_snapshot;
    io::write_file_atomic(path("manifest.json"), m.dump(2) + "\n");
  }

  /// Moves non-admitted captions out of captions.jsonl into
  /// captions.dropped.jsonl, resolving flags so consumers see only admitted ones.
  void compact() const {
    auto caps = read_captions();
    auto dropped = read_captions("captions.dropped.jsonl");
    std::vector<CreativeCaption> keep;
    for (auto& c : caps) (c.admitted() ? keep : dropped).push_back(std::move(c));
    write_captions(keep);
    write_captions(dropped, "captions.dropped.jsonl");
    write_manifest();
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace ladderkit

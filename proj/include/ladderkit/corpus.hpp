// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ladderkit/error.hpp"
#include "ladderkit/jsonl.hpp"
#include "ladderkit/text.hpp"

namespace ladderkit {

enum class Split { kTrain, kValidation, kTest };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

inline std::optional<Split> parse_split(std::string_view s) {
  const auto l = text::to_lower(s);
  if (l == "train") return Split::kTrain;
  if (l == "validation" || l == "val") return Split::kValidation;
  if (l == "test") return Split::kTest;
  return std::nullopt;
}

struct ImageRecord {
  std::string image_id;
  std::string image_uri;
  std::string c_short;
  std::optional<std::string> c_detailed;
  Split split = Split::kTrain;
  std::vector<std::string> alternates;
  // Set when a stage failed for this image; later stages skip it.
  std::optional<std::string> skip_reason;

  bool operator==(const ImageRecord&) const = default;
};

inline json to_json(const ImageRecord& r) {
  json j = {{"image_id", r.image_id}, {"image_uri", r.image_uri}, {"caption", r.c_short}, {"split", to_string(r.split)}};
  if (!r.alternates.empty()) j["alternates"] = r.alternates;
  if (r.c_detailed) j["detailed_caption"] = *r.c_detailed;
  if (r.skip_reason) j["skip_reason"] = *r.skip_reason;
  return j;
}

/// Immutable set of image records in manifest order, indexed by image_id.
class Corpus {
 public:
  Corpus() = default;

  explicit Corpus(std::vector<ImageRecord> records) : records_(std::move(records)) {
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (text::trim(records_[i].c_short).empty())
        throw DataError("image " + records_[i].image_id + ": empty caption");
      if (++seen[records_[i].image_id] == 1) index_.emplace(records_[i].image_id, i);
    }
    std::vector<std::string> dups;
    for (const auto& [id, n] : seen)
      if (n > 1) dups.push_back(id);
    if (!dups.empty()) throw DataError("duplicate image_id: " + text::join(dups, ", "));
  }

  const std::vector<ImageRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const ImageRecord* find(const std::string& image_id) const {
    auto it = index_.find(image_id);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  std::string to_jsonl() const {
    std::vector<json> rows;
    rows.reserve(records_.size());
    for (const auto& r : records_) rows.push_back(to_json(r));
    return io::to_jsonl(rows);
  }

 private:
  std::vector<ImageRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { kCocoJson, kCaptionJsonl };

inline std::optional<CorpusFormat> parse_corpus_format(std::string_view s) {
  if (s == "coco_json" || s == "coco") return CorpusFormat::kCocoJson;
  if (s == "caption_jsonl" || s == "jsonl") return CorpusFormat::kCaptionJsonl;
  return std::nullopt;
}

struct LoadOptions {
  // COCO annotation files carry no split; this one is applied to every record.
  Split default_split = Split::kTrain;
  // Joined with COCO file_name to form image_uri when non-empty.
  std::filesystem::path image_root;
};

namespace detail {

inline std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError("image id must be a string or integer");
}

inline ImageRecord record_from_caption_line(const json& j, std::size_t line, const std::string& source) {
  if (!j.is_object()) throw ParseError(source, line, 0, "expected a JSON object");
  ImageRecord r;
  try {
    r.image_id = detail::id_string(j.at("image_id"));
    r.image_uri = io::require_string(j, "image_uri", "line " + std::to_string(line));
    r.c_short = io::require_string(j, "caption", "line " + std::to_string(line));
  } catch (const json::out_of_range&) {
    throw ParseError(source, line, 0, "missing field 'image_id'");
  } catch (const DataError& e) {
    throw ParseError(source, line, 0, e.what());
  }
  if (text::trim(r.c_short).empty()) throw ParseError(source, line, 0, "caption is empty");
  if (auto it = j.find("split"); it != j.end()) {
    auto s = it->is_string() ? parse_split(it->get<std::string>()) : std::nullopt;
    if (!s) throw ParseError(source, line, 0, "unknown split");
    r.split = *s;
  }
  if (auto it = j.find("alternates"); it != j.end()) r.alternates = it->get<std::vector<std::string>>();
  if (auto it = j.find("detailed_caption"); it != j.end() && it->is_string()) r.c_detailed = it->get<std::string>();
  if (auto it = j.find("skip_reason"); it != j.end() && it->is_string()) r.skip_reason = it->get<std::string>();
  return r;
}

inline Corpus load_caption_jsonl(const std::filesystem::path& path) {
  std::vector<ImageRecord> records;
  io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    records.push_back(record_from_caption_line(j, line, path.string()));
  });
  if (records.empty()) throw DataError("empty corpus");
  return Corpus(std::move(records));
}

inline Corpus load_coco_json(const std::filesystem::path& path, const LoadOptions& opts) {
  const std::string raw = io::read_file(path);
  if (text::trim(raw).empty()) throw DataError("empty corpus");
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    // Report line/column for the byte offset nlohmann gives us.
    std::size_t line = 1, col = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte ? e.byte - 1 : 0, raw.size()); ++i) {
      if (raw[i] == '\n') {
        ++line;
        col = 0;
      } else {
        ++col;
      }
    }
    throw ParseError(path.string(), line, col, "malformed COCO JSON");
  }
  if (!doc.is_object() || !doc.contains("images") || !doc.contains("annotations"))
    throw ParseError(path.string(), 1, 0, "expected an object with images[] and annotations[]");

  std::vector<ImageRecord> records;
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::string> dups;
  for (const auto& img : doc["images"]) {
    ImageRecord r;
    r.image_id = id_string(img.at("id"));
    r.split = opts.default_split;
    const std::string file = img.value("file_name", std::string());
    if (!file.empty() && !opts.image_root.empty()) {
      r.image_uri = (opts.image_root / file).string();
    } else if (img.contains("coco_url") && img["coco_url"].is_string()) {
      r.image_uri = img["coco_url"].get<std::string>();
    } else {
      r.image_uri = file;
    }
    if (by_id.contains(r.image_id)) {
      dups.push_back(r.image_id);
      continue;
    }
    by_id.emplace(r.image_id, records.size());
    records.push_back(std::move(r));
  }
  if (!dups.empty()) throw DataError("duplicate image_id: " + text::join(dups, ", "));

  for (const auto& ann : doc["annotations"]) {
    const std::string id = id_string(ann.at("image_id"));
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("annotation references unknown image_id " + id);
    const std::string caption = text::normalize_whitespace(ann.at("caption").get<std::string>());
    if (caption.empty()) continue;
    auto& rec = records[it->second];
    if (rec.c_short.empty()) {
      rec.c_short = caption;
    } else {
      rec.alternates.push_back(caption);
    }
  }
  // Images without any caption cannot seed extraction and are left out.
  std::erase_if(records, [](const ImageRecord& r) { return r.c_short.empty(); });
  if (records.empty()) throw DataError("empty corpus");
  return Corpus(std::move(records));
}

}  // namespace detail

inline Corpus load_corpus(const std::filesystem::path& manifest, CorpusFormat format, const LoadOptions& opts = {}) {
  if (!std::filesystem::exists(manifest)) throw DataError("manifest not found: " + manifest.string());
  switch (format) {
    case CorpusFormat::kCaptionJsonl: return detail::load_caption_jsonl(manifest);
    case CorpusFormat::kCocoJson: return detail::load_coco_json(manifest, opts);
  }
  throw UsageError("unknown corpus format");
}

}  // namespace ladderkit

// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Abstraction degrees, association ladders and the strict parser/validator for
// model-produced ladder JSON.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ladderkit/error.hpp"
#include "ladderkit/jsonl.hpp"
#include "ladderkit/salience.hpp"
#include "ladderkit/text.hpp"

namespace ladderkit {

inline constexpr int kNumDegrees = 5;
inline constexpr std::size_t kAssociationsPerRung = 3;

/// Degree of abstraction, 1 (near synonyms) through 5 (full abstraction).
class AbstractionDegree {
 public:
  static constexpr std::array<std::string_view, kNumDegrees> kLabels = {
      "near_synonyms", "slight_abstraction", "broader_context", "conceptual_association", "full_abstraction"};

  constexpr explicit AbstractionDegree(int value) : value_(value) {
    if (value < 1 || value > kNumDegrees) throw DataError("abstraction degree out of range: " + std::to_string(value));
  }

  static std::optional<AbstractionDegree> from_label(std::string_view label) {
    for (int i = 0; i < kNumDegrees; ++i)
      if (kLabels[static_cast<std::size_t>(i)] == label) return AbstractionDegree(i + 1);
    return std::nullopt;
  }

  constexpr int value() const { return value_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(value_ - 1); }
  std::string_view label() const { return kLabels[index()]; }

  auto operator<=>(const AbstractionDegree&) const = default;

 private:
  int value_;
};

inline std::array<AbstractionDegree, kNumDegrees> all_degrees() {
  return {AbstractionDegree(1), AbstractionDegree(2), AbstractionDegree(3), AbstractionDegree(4), AbstractionDegree(5)};
}

/// rungs[d-1] holds the associations at degree d.
using Rungs = std::array<std::vector<std::string>, kNumDegrees>;

struct AssociationLadder {
  std::string image_id;
  SalientElement element;
  Rungs rungs;

  const std::vector<std::string>& at(AbstractionDegree d) const { return rungs[d.index()]; }
};

enum class DiagnosticKind {
  kNonJson,
  kMissingWord,
  kUnexpectedWord,
  kMissingDegree,
  kBadDegreeKey,
  kDuplicateDegree,
  kWrongArity,
  kOriginalWordEcho,
  kInvalidEntry,
};

inline const char* to_string(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::kNonJson: return "non_json";
    case DiagnosticKind::kMissingWord: return "missing_word";
    case DiagnosticKind::kUnexpectedWord: return "unexpected_word";
    case DiagnosticKind::kMissingDegree: return "missing_degree";
    case DiagnosticKind::kBadDegreeKey: return "bad_degree_key";
    case DiagnosticKind::kDuplicateDegree: return "duplicate_degree";
    case DiagnosticKind::kWrongArity: return "wrong_arity";
    case DiagnosticKind::kOriginalWordEcho: return "original_word_echo";
    case DiagnosticKind::kInvalidEntry: return "invalid_entry";
  }
  return "unknown";
}

struct Diagnostic {
  DiagnosticKind kind;
  std::string word;  // empty for whole-document problems
  int degree = 0;    // 0 when not degree-specific
  std::string detail;

  bool operator==(const Diagnostic&) const = default;

  std::string message() const {
    std::string m = to_string(kind);
    if (!word.empty()) m += "(" + word + (degree ? ", d=" + std::to_string(degree) : "") + ")";
    if (!detail.empty()) m += ": " + detail;
    return m;
  }
};

inline json to_json(const Diagnostic& d) {
  json j = {{"kind", to_string(d.kind)}, {"word", d.word}};
  if (d.degree) j["degree"] = d.degree;
  if (!d.detail.empty()) j["detail"] = d.detail;
  return j;
}

/// Checks one element's rungs against the ladder invariants: every degree
/// present with exactly three non-empty entries, none equal to the element.
inline std::vector<Diagnostic> validate_rungs(const std::string& surface, const Rungs& rungs) {
  std::vector<Diagnostic> out;
  const auto key = text::to_lower(surface);
  for (int d = 1; d <= kNumDegrees; ++d) {
    const auto& rung = rungs[static_cast<std::size_t>(d - 1)];
    if (rung.empty()) {
      out.push_back({DiagnosticKind::kMissingDegree, surface, d, {}});
      continue;
    }
    if (rung.size() != kAssociationsPerRung)
      out.push_back({DiagnosticKind::kWrongArity, surface, d, "expected 3, got " + std::to_string(rung.size())});
    for (const auto& entry : rung) {
      if (entry.empty()) out.push_back({DiagnosticKind::kInvalidEntry, surface, d, "empty association"});
      else if (text::canonical(entry) == key) out.push_back({DiagnosticKind::kOriginalWordEcho, surface, d, {}});
    }
  }
  return out;
}

struct LadderParse {
  std::map<std::string, Rungs> ladders;  // only elements that validated
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
  /// Surfaces that did not yield a valid ladder.
  std::set<std::string> failed_words(const std::vector<SalientElement>& elements) const {
    std::set<std::string> out;
    for (const auto& e : elements)
      if (!ladders.contains(e.surface)) out.insert(e.surface);
    return out;
  }
};

namespace detail {

inline std::string_view strip_code_fence(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 6 && s.substr(0, 3) == "```" && s.substr(s.size() - 3) == "```") {
    s.remove_suffix(3);
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? s.substr(3) : s.substr(nl + 1);
    // A one-line fence like ```json {...}``` carries the tag on the same line.
    auto t = text::trim(s);
    if (nl == std::string_view::npos || t.empty()) {
      auto brace = s.find('{');
      if (brace != std::string_view::npos) s = s.substr(brace);
    }
  }
  return text::trim(s);
}

/// "1", "Degree 1", "degree_1", "degree 1" (any case) → 1..5.
inline std::optional<int> parse_degree_key(const std::string& key) {
  static const std::regex re(R"(^\s*(?:degree[ _]?)?([1-5])\s*$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(key, m, re)) return std::nullopt;
  return m[1].str()[0] - '0';
}

}  // namespace detail

/// Strict parse of {word: {degree: [w, w, w]}}. Association strings are
/// lowercased and whitespace-normalized. Elements with any problem are left out
/// of `ladders` and described in `diagnostics`.
inline LadderParse parse_ladder_json(std::string_view raw, const std::vector<SalientElement>& elements) {
  LadderParse out;
  json doc;
  try {
    doc = json::parse(detail::strip_code_fence(raw));
  } catch (const json::parse_error& e) {
    out.diagnostics.push_back({DiagnosticKind::kNonJson, {}, 0, e.what()});
    return out;
  }
  if (!doc.is_object()) {
    out.diagnostics.push_back({DiagnosticKind::kNonJson, {}, 0, "top level is not an object"});
    return out;
  }

  std::map<std::string, const json*> by_word;
  for (const auto& [key, value] : doc.items()) {
    const auto canon = text::canonical(key);
    const bool known = std::any_of(elements.begin(), elements.end(), [&](const SalientElement& e) { return e.surface == canon; });
    if (!known) {
      out.diagnostics.push_back({DiagnosticKind::kUnexpectedWord, key, 0, {}});
      continue;
    }
    by_word[canon] = &value;
  }

  for (const auto& e : elements) {
    auto it = by_word.find(e.surface);
    if (it == by_word.end()) {
      out.diagnostics.push_back({DiagnosticKind::kMissingWord, e.surface, 0, {}});
      continue;
    }
    const json& value = *it->second;
    std::vector<Diagnostic> diags;
    Rungs rungs;
    if (!value.is_object()) {
      diags.push_back({DiagnosticKind::kInvalidEntry, e.surface, 0, "value is not a degree dictionary"});
    } else {
      std::array<bool, kNumDegrees> seen{};
      for (const auto& [dkey, list] : value.items()) {
        auto d = detail::parse_degree_key(dkey);
        if (!d) {
          diags.push_back({DiagnosticKind::kBadDegreeKey, e.surface, 0, dkey});
          continue;
        }
        const auto idx = static_cast<std::size_t>(*d - 1);
        if (seen[idx]) {
          diags.push_back({DiagnosticKind::kDuplicateDegree, e.surface, *d, dkey});
          continue;
        }
        seen[idx] = true;
        if (!list.is_array()) {
          diags.push_back({DiagnosticKind::kInvalidEntry, e.surface, *d, "degree value is not a list"});
          continue;
        }
        for (const auto& w : list) {
          if (!w.is_string()) {
            diags.push_back({DiagnosticKind::kInvalidEntry, e.surface, *d, "association is not a string"});
            continue;
          }
          rungs[idx].push_back(text::canonical(w.get<std::string>()));
        }
        // Arrays that were entirely non-string must not read as "missing".
        if (rungs[idx].empty() && !list.empty()) rungs[idx].push_back({});
      }
      for (auto& d : validate_rungs(e.surface, rungs)) {
        // An empty placeholder entry was already reported as invalid_entry.
        if (d.kind == DiagnosticKind::kInvalidEntry &&
            std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& x) {
              return x.kind == DiagnosticKind::kInvalidEntry && x.degree == d.degree;
            }))
          continue;
        diags.push_back(std::move(d));
      }
    }
    if (diags.empty()) {
      out.ladders.emplace(e.surface, std::move(rungs));
    } else {
      out.diagnostics.insert(out.diagnostics.end(), diags.begin(), diags.end());
    }
  }
  return out;
}

/// Model-output form: {"word": {"1": [...], ..., "5": [...]}}.
inline json rungs_to_json(const Rungs& rungs) {
  json r = json::object();
  for (int d = 1; d <= kNumDegrees; ++d) r[std::to_string(d)] = rungs[static_cast<std::size_t>(d - 1)];
  return r;
}

/// Persisted form: {image_id, element, pos, rungs:{"1":[...],...,"5":[...]}}.
inline json to_json(const AssociationLadder& l) {
  return {{"image_id", l.image_id}, {"element", l.element.surface}, {"pos", to_string(l.element.pos)}, {"rungs", rungs_to_json(l.rungs)}};
}

inline AssociationLadder ladder_from_json(const json& j) {
  AssociationLadder l;
  try {
    l.image_id = j.at("image_id").get<std::string>();
    l.element.surface = j.at("element").get<std::string>();
    l.element.pos = parse_pos(j.at("pos").get<std::string>());
    const auto& r = j.at("rungs");
    for (int d = 1; d <= kNumDegrees; ++d)
      l.rungs[static_cast<std::size_t>(d - 1)] = r.at(std::to_string(d)).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ladder record: ") + e.what());
  }
  if (auto diags = validate_rungs(l.element.surface, l.rungs); !diags.empty())
    throw DataError("invalid ladder for " + l.image_id + "/" + l.element.surface + ": " + diags.front().message());
  return l;
}

}  // namespace ladderkit

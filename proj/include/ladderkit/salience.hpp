// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Salient visual elements: content words of a short caption (nouns, verbs,
// adjectives) that clear a concreteness threshold.

#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ladderkit/error.hpp"
#include "ladderkit/jsonl.hpp"
#include "ladderkit/text.hpp"

namespace ladderkit {

enum class Pos { kNoun, kVerb, kAdjective, kAdverb, kDeterminer, kAdposition, kPronoun, kConjunction, kNumber, kParticle, kOther };

inline const char* to_string(Pos p) {
  switch (p) {
    case Pos::kNoun: return "noun";
    case Pos::kVerb: return "verb";
    case Pos::kAdjective: return "adjective";
    case Pos::kAdverb: return "adverb";
    case Pos::kDeterminer: return "determiner";
    case Pos::kAdposition: return "adposition";
    case Pos::kPronoun: return "pronoun";
    case Pos::kConjunction: return "conjunction";
    case Pos::kNumber: return "number";
    case Pos::kParticle: return "particle";
    case Pos::kOther: return "other";
  }
  return "other";
}

/// Accepts our own tag names plus Universal Dependencies tags (NOUN, ADJ, ...).
inline Pos parse_pos(std::string_view tag) {
  const auto t = text::to_lower(tag);
  if (t == "noun" || t == "n") return Pos::kNoun;
  if (t == "verb" || t == "v") return Pos::kVerb;
  if (t == "adjective" || t == "adj" || t == "a") return Pos::kAdjective;
  if (t == "adverb" || t == "adv") return Pos::kAdverb;
  if (t == "determiner" || t == "det") return Pos::kDeterminer;
  if (t == "adposition" || t == "adp") return Pos::kAdposition;
  if (t == "pronoun" || t == "pron") return Pos::kPronoun;
  if (t == "conjunction" || t == "cconj" || t == "sconj" || t == "conj") return Pos::kConjunction;
  if (t == "number" || t == "num") return Pos::kNumber;
  if (t == "particle" || t == "part") return Pos::kParticle;
  return Pos::kOther;
}

inline bool is_content_pos(Pos p) { return p == Pos::kNoun || p == Pos::kVerb || p == Pos::kAdjective; }

struct PosToken {
  std::string token;
  Pos pos = Pos::kOther;
  std::size_t offset = 0;
};

/// Tagged tokens of one caption, offsets strictly increasing.
class PosAnnotation {
 public:
  PosAnnotation() = default;
  explicit PosAnnotation(std::vector<PosToken> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 1; i < tokens_.size(); ++i)
      if (tokens_[i].offset <= tokens_[i - 1].offset) throw DataError("POS token offsets must be strictly increasing");
  }
  const std::vector<PosToken>& tokens() const { return tokens_; }

 private:
  std::vector<PosToken> tokens_;
};

/// Word → concreteness rating in [1, 5]. Lookups are case-insensitive.
class ConcretenessLexicon {
 public:
  ConcretenessLexicon() = default;
  explicit ConcretenessLexicon(const std::unordered_map<std::string, double>& entries) {
    for (const auto& [w, r] : entries) add(w, r);
  }

  void add(std::string_view word, double rating) {
    if (!(rating >= 1.0 && rating <= 5.0)) throw DataError("concreteness rating out of [1,5] for '" + std::string(word) + "'");
    entries_[text::to_lower(word)] = rating;
  }

  /// nullopt means "unrated".
  std::optional<double> rating(std::string_view word) const {
    auto it = entries_.find(text::to_lower(word));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }

  /// Tab-separated file with one header line. The rating column is "Conc.M"
  /// when the header names it (published norm releases), otherwise column 2.
  static ConcretenessLexicon load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("lexicon " + path.string() + " is empty");
    std::size_t rating_col = 1;
    {
      auto header = split_tabs(line);
      for (std::size_t i = 0; i < header.size(); ++i)
        if (text::to_lower(text::trim(header[i])) == "conc.m") rating_col = i;
    }
    ConcretenessLexicon lex;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty()) continue;
      auto cols = split_tabs(line);
      if (cols.size() <= rating_col) throw ParseError(path.string(), line_no, 0, "missing rating column");
      const auto field = text::trim(cols[rating_col]);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError(path.string(), line_no, static_cast<std::size_t>(field.data() - line.data()), "rating is not a number");
      lex.add(text::trim(cols[0]), value);
    }
    return lex;
  }

 private:
  static std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        out.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    return out;
  }

  std::unordered_map<std::string, double> entries_;
};

struct SalientElement {
  std::string surface;  // lowercase
  Pos pos = Pos::kNoun;
  double concreteness = 0.0;
  std::size_t source_caption_offset = 0;

  bool operator==(const SalientElement&) const = default;
};

inline constexpr double kDefaultConcretenessThreshold = 3.0;

/// Content words rated at or above threshold, first occurrence of each surface
/// form kept, in caption order. Unrated words are excluded.
inline std::vector<SalientElement> extract_salient_elements(const PosAnnotation& pos, const ConcretenessLexicon& lexicon,
                                                            double threshold = kDefaultConcretenessThreshold) {
  if (!(threshold >= 1.0 && threshold <= 5.0)) throw UsageError("concreteness threshold must be in [1,5]");
  std::vector<SalientElement> out;
  std::unordered_set<std::string> seen;
  for (const auto& tok : pos.tokens()) {
    if (!is_content_pos(tok.pos)) continue;
    const auto words = text::tokenize_words(tok.token);
    if (words.empty()) continue;
    // Strip surrounding punctuation; the lexicon holds inflected forms so no lemmatizing.
    const std::size_t first = words.front().offset;
    const std::size_t last = words.back().offset + words.back().text.size();
    const std::string surface = text::to_lower(std::string_view(tok.token).substr(first, last - first));
    const auto rating = lexicon.rating(surface);
    if (!rating || *rating < threshold) continue;
    if (!seen.insert(surface).second) continue;
    out.push_back({surface, tok.pos, *rating, tok.offset + first});
  }
  return out;
}

/// Source of POS annotations for a caption.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual PosAnnotation tag(const std::string& image_id, const std::string& caption) const = 0;
};

/// Dictionary tagger: closed-class words and common caption adjectives/verbs
/// are looked up, everything else falls back to noun.
class LexiconTagger final : public PosTagger {
 public:
  LexiconTagger() {
    static constexpr std::string_view kDeterminers[] = {"a", "an", "the", "this", "that", "these", "those", "some", "any",
                                                        "each", "every", "another", "no", "its", "their", "his", "her",
                                                        "my", "your", "our", "several", "many", "few", "both", "all"};
    static constexpr std::string_view kAdpositions[] = {
        "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto", "over", "under", "near", "behind",
        "beside", "between", "through", "across", "around", "down", "up", "off", "out", "inside", "outside", "along",
        "atop", "above", "below", "next", "against", "toward", "towards", "during", "while", "about", "like", "past"};
    static constexpr std::string_view kPronouns[] = {"he", "she", "it", "they", "them", "him", "we", "you", "i",
                                                     "me", "us", "who", "which", "what", "someone", "something"};
    static constexpr std::string_view kConjunctions[] = {"and", "or", "but", "as", "if", "because", "so", "than", "nor", "yet"};
    static constexpr std::string_view kAuxiliaries[] = {"is", "are", "was", "were", "be", "been", "being", "am",
                                                        "has", "have", "had", "do", "does", "did", "can", "will"};
    static constexpr std::string_view kAdverbs[] = {"very", "there", "here", "together", "away", "back", "outdoors",
                                                    "indoors", "very", "just", "also", "almost", "nearby", "not"};
    static constexpr std::string_view kNumbers[] = {"one", "two", "three", "four", "five", "six", "seven", "eight",
                                                    "nine", "ten", "dozen", "couple", "pair"};
    static constexpr std::string_view kAdjectives[] = {
        "red", "blue", "green", "yellow", "white", "black", "brown", "orange", "pink", "purple", "gray", "grey",
        "small", "large", "big", "little", "tall", "short", "long", "old", "young", "new", "wooden", "metal", "empty",
        "full", "open", "closed", "dark", "bright", "wet", "dry", "hot", "cold", "clean", "dirty", "busy", "grassy",
        "sandy", "snowy", "rainy", "sunny", "cloudy", "colorful", "striped", "shiny", "fresh", "round", "square",
        "huge", "tiny", "giant", "narrow", "wide", "plastic", "glass", "stone", "brick", "leather", "furry", "fluffy",
        "happy", "sad", "beautiful", "pretty", "crowded", "parked", "stuffed", "frosted", "cooked", "sliced"};
    static constexpr std::string_view kVerbs[] = {
        "sitting", "standing", "holding", "riding", "playing", "walking", "running", "eating", "flying", "laying",
        "lying", "looking", "watching", "waiting", "carrying", "wearing", "using", "driving", "swinging", "throwing",
        "catching", "hitting", "surfing", "skiing", "skateboarding", "grazing", "sleeping", "jumping", "cutting",
        "cooking", "talking", "posing", "smiling", "reading", "drinking", "pulling", "pushing", "crossing", "floating",
        "parking", "hanging", "leaning", "resting", "covered", "filled", "topped", "sits", "stands", "holds", "rides",
        "plays", "walks", "runs", "eats", "flies", "lays", "looks", "watches", "waits", "carries", "wears", "swings",
        "throws", "catches", "hits", "surfs", "sleeps", "jumps", "cuts", "sit", "stand", "hold", "ride", "play",
        "walk", "run", "eat", "fly", "lay", "look", "watch", "wait", "carry", "wear", "swing", "throw", "catch",
        "hit", "surf", "sleep", "jump", "cut", "glides", "heading", "heads", "parked"};
    auto fill = [this](auto& words, Pos p) {
      for (auto w : words) tags_.emplace(std::string(w), p);
    };
    fill(kDeterminers, Pos::kDeterminer);
    fill(kAdpositions, Pos::kAdposition);
    fill(kPronouns, Pos::kPronoun);
    fill(kConjunctions, Pos::kConjunction);
    fill(kAuxiliaries, Pos::kVerb);
    fill(kAdverbs, Pos::kAdverb);
    fill(kNumbers, Pos::kNumber);
    fill(kAdjectives, Pos::kAdjective);
    fill(kVerbs, Pos::kVerb);
    // Auxiliaries are verbs grammatically but never visual elements.
    for (auto w : kAuxiliaries) tags_[std::string(w)] = Pos::kParticle;
  }

  /// Extra or overriding entries, e.g. loaded from a user dictionary.
  void set(std::string_view word, Pos pos) { tags_[text::to_lower(word)] = pos; }

  PosAnnotation tag(const std::string&, const std::string& caption) const override {
    std::vector<PosToken> out;
    for (auto& w : text::tokenize_words(caption)) {
      auto it = tags_.find(text::to_lower(w.text));
      Pos p = Pos::kNoun;
      if (it != tags_.end()) {
        p = it->second;
      } else if (std::all_of(w.text.begin(), w.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        p = Pos::kNumber;
      }
      out.push_back({std::move(w.text), p, w.offset});
    }
    return PosAnnotation(std::move(out));
  }

 private:
  std::unordered_map<std::string, Pos> tags_;
};

/// Pre-tagged captions from a JSONL sidecar of {image_id, tokens:[{t, pos, off}]}.
class SidecarTagger final : public PosTagger {
 public:
  static SidecarTagger load(const std::filesystem::path& path) {
    SidecarTagger tagger;
    io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
      try {
        std::vector<PosToken> toks;
        for (const auto& t : j.at("tokens"))
          toks.push_back({t.at("t").get<std::string>(), parse_pos(t.at("pos").get<std::string>()), t.at("off").get<std::size_t>()});
        tagger.by_image_.insert_or_assign(j.at("image_id").get<std::string>(), PosAnnotation(std::move(toks)));
      } catch (const json::exception& e) {
        throw ParseError(path.string(), line, 0, e.what());
      }
    });
    return tagger;
  }

  void add(const std::string& image_id, PosAnnotation ann) { by_image_.insert_or_assign(image_id, std::move(ann)); }

  PosAnnotation tag(const std::string& image_id, const std::string& caption) const override {
    auto it = by_image_.find(image_id);
    if (it == by_image_.end()) throw DataError("no POS annotation for image " + image_id);
    for (const auto& t : it->second.tokens())
      if (t.offset + t.token.size() > caption.size() || caption.compare(t.offset, t.token.size(), t.token) != 0)
        throw DataError("POS annotation for image " + image_id + " does not match its caption at offset " +
                        std::to_string(t.offset));
    return it->second;
  }

 private:
  std::unordered_map<std::string, PosAnnotation> by_image_;
};

}  // namespace ladderkit

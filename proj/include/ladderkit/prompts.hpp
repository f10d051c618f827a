// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ladderkit/error.hpp"

namespace ladderkit {

enum class TemplateId { kDetailedCaption, kMineAssociations, kCreativeCaption, kErrorAnalysis };

inline const char* to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kDetailedCaption: return "detailed_caption";
    case TemplateId::kMineAssociations: return "mine_associations";
    case TemplateId::kCreativeCaption: return "creative_caption";
    case TemplateId::kErrorAnalysis: return "error_analysis";
  }
  return "";
}

inline std::optional<TemplateId> parse_template_id(std::string_view s) {
  for (auto id : {TemplateId::kDetailedCaption, TemplateId::kMineAssociations, TemplateId::kCreativeCaption,
                  TemplateId::kErrorAnalysis})
    if (s == to_string(id)) return id;
  return std::nullopt;
}

namespace prompts {

inline constexpr std::string_view kDetailedCaption =
    "USER: <image> Please generate a detailed caption of this image. ASSISTANT:";

// System prompt; the user turn carries the word list.
inline constexpr std::string_view kMineAssociations =
    "For a given list of words, generate a new list for each word using the same part of speech. "
    "The words should follow a semantic abstraction scale where degrees increase from near-synonyms to abstract concepts.\n"
    "\n"
    "Approach:\n"
    "\n"
    "1. Degree 1 \xE2\x80\x93 Near Synonyms: Close in meaning or form (e.g., Ball \xE2\x86\x92 Sphere).\n"
    "2. Degree 2 \xE2\x80\x93 Slight Abstraction: Slightly broader category (e.g., Ball \xE2\x86\x92 Toy).\n"
    "3. Degree 3 \xE2\x80\x93 Broader Context: Indirectly linked through situational and emotional context "
    "(e.g., Ball \xE2\x86\x92 Game).\n"
    "4. Degree 4 \xE2\x80\x93 Conceptual Association: More abstract or theme-related (e.g., Ball \xE2\x86\x92 Competition).\n"
    "5. Degree 5 \xE2\x80\x93 Full Abstraction: Highly abstract or metaphorical (e.g., Ball \xE2\x86\x92 Journey).\n"
    "\n"
    "Generate three words each for degrees 1 to 5. Generated words should fit into the overall emotional and "
    "situational context of this context caption: {context_caption}.\n"
    "\n"
    "Generated words, when replaced with the original word in this short caption {original_caption}, should be "
    "semantically correct.\n"
    "\n"
    "Do not generate the original word in the new generations.\n"
    "\n"
    "Output format: Use JSON. The key is the original word, and the value is a dictionary with degrees as keys and "
    "lists of generated words as values.";

inline constexpr std::string_view kCreativeCaption =
    "USER: <image>\n"
    "Write a short caption grounded in this image and semantically correct, using fewer than 10 words. "
    "Choose some or all of these words: {all_words} to best represent the image.\n"
    "\n"
    "Steer the caption's style toward the abstraction level {level} following these rules:\n"
    "\n"
    "- Degree 1 \xE2\x80\x93 Near Synonyms: Close in meaning to the original image\n"
    "- Degree 2 \xE2\x80\x93 Slight Abstraction: Slightly more abstract than the image\n"
    "- Degree 3 \xE2\x80\x93 Broader Context: Indirectly linked through situational or emotional context\n"
    "- Degree 4 \xE2\x80\x93 Conceptual Association: More abstract, theme-related to the image\n"
    "- Degree 5 \xE2\x80\x93 Full Abstraction: Highly abstract or metaphorical\n"
    "\n"
    "The caption MUST include the word: {new_word}.\n"
    "\n"
    "ASSISTANT:";

inline constexpr std::string_view kErrorAnalysis =
    "{captions} For this image count the number of errors for each sentence where errors are mistakes that "
    "significantly alter meaning of the image. Abstract elements are not errors if they do not alter the meaning of "
    "the image. Give an explanation for each sentence's score.";

}  // namespace prompts

inline std::string_view template_body(TemplateId id) {
  switch (id) {
    case TemplateId::kDetailedCaption: return prompts::kDetailedCaption;
    case TemplateId::kMineAssociations: return prompts::kMineAssociations;
    case TemplateId::kCreativeCaption: return prompts::kCreativeCaption;
    case TemplateId::kErrorAnalysis: return prompts::kErrorAnalysis;
  }
  return {};
}

namespace detail {

inline bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9'); }

}  // namespace detail

/// Names of the {placeholders} a template expects, in order of first use.
inline std::vector<std::string> template_placeholders(std::string_view body) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < body.size() && detail::is_placeholder_char(body[j])) ++j;
    if (j < body.size() && body[j] == '}' && j > i + 1) {
      std::string name(body.substr(i + 1, j - i - 1));
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
      i = j;
    }
  }
  return out;
}

/// Single-pass substitution: bound values are inserted verbatim and never re-expanded.
inline std::string render_template(std::string_view body, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(body.size() + 256);
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && detail::is_placeholder_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}' && j > i + 1) {
        const std::string name(body.substr(i + 1, j - i - 1));
        auto it = bindings.find(name);
        if (it == bindings.end()) throw UsageError("unbound placeholder {" + name + "}");
        out += it->second;
        i = j;
        continue;
      }
    }
    out.push_back(body[i]);
  }
  return out;
}

inline std::string render_prompt(TemplateId id, const std::map<std::string, std::string>& bindings = {}) {
  return render_template(template_body(id), bindings);
}

}  // namespace ladderkit

// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// EMB1 embedding files: an ASCII header line "EMB1 <n> <dim>\n" followed by
// n*dim little-endian float32 values (row-major), plus a sidecar
// "<name>.ids.jsonl" of {row, id}.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/error.hpp"
#include "ladderkit/jsonl.hpp"

namespace ladderkit::eval {

class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim, std::vector<float> values)
      : ids_(std::move(ids)), dim_(dim), values_(std::move(values)) {
    if (values_.size() != ids_.size() * dim_) throw DataError("embedding matrix shape does not match id count");
    std::set<std::string> seen;
    for (const auto& id : ids_)
      if (!seen.insert(id).second) throw DataError("duplicate embedding id " + id);
    for (float v : values_)
      if (!std::isfinite(v)) throw DataError("embedding matrix contains a non-finite value");
  }

  std::size_t rows() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& values() const { return values_; }
  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

  bool unit_normalized(double tol = 1e-5) const {
    for (std::size_t i = 0; i < rows(); ++i) {
      double s = 0;
      for (float v : row(i)) s += static_cast<double>(v) * v;
      if (std::abs(std::sqrt(s) - 1.0) > tol) return false;
    }
    return true;
  }

  std::optional<std::size_t> index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
      if (ids_[i] == id) return i;
    return std::nullopt;
  }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// "x.emb" → "x.ids.jsonl"; any other name gets ".ids.jsonl" appended.
inline std::filesystem::path ids_path_for(const std::filesystem::path& emb) {
  if (emb.extension() == ".emb") {
    auto p = emb;
    p.replace_extension(".ids.jsonl");
    return p;
  }
  auto p = emb;
  p += ".ids.jsonl";
  return p;
}

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  return v;
}

inline bool parse_size(std::string_view s, std::size_t& out) {
  if (s.empty() || s.size() > 12) return false;
  out = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + static_cast<std::size_t>(c - '0');
  }
  return true;
}

}  // namespace detail

inline std::string encode_emb1(const EmbeddingMatrix& m) {
  std::string out = "EMB1 " + std::to_string(m.rows()) + " " + std::to_string(m.dim()) + "\n";
  out.reserve(out.size() + m.values().size() * 4);
  for (float v : m.values()) {
    const auto bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(v));
    char b[4];
    std::memcpy(b, &bits, 4);
    out.append(b, 4);
  }
  return out;
}

/// Parses the binary part; ids are placeholders "0".."n-1".
inline EmbeddingMatrix decode_emb1(std::string_view bytes, const std::string& source = "<memory>") {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos || nl > 64) throw ParseError(source, 1, 0, "missing EMB1 header line");
  const auto header = bytes.substr(0, nl);
  if (header.substr(0, 5) != "EMB1 ") throw ParseError(source, 1, 0, "bad magic, expected 'EMB1 '");
  const auto rest = header.substr(5);
  const auto sp = rest.find(' ');
  std::size_t n = 0, dim = 0;
  if (sp == std::string_view::npos || !detail::parse_size(rest.substr(0, sp), n) ||
      !detail::parse_size(rest.substr(sp + 1), dim))
    throw ParseError(source, 1, 5, "header must be 'EMB1 <n> <dim>'");
  if (dim == 0 && n > 0) throw ParseError(source, 1, 5, "dim must be positive");
  const auto payload = bytes.substr(nl + 1);
  if (payload.size() != n * dim * 4)
    throw ParseError(source, 1, 0, "payload is " + std::to_string(payload.size()) + " bytes, header implies " +
                                       std::to_string(n * dim * 4));
  std::vector<float> values(n * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, payload.data() + i * 4, 4);
    values[i] = std::bit_cast<float>(detail::to_little_endian(bits));
  }
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return EmbeddingMatrix(std::move(ids), dim, std::move(values));
}

inline void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  io::write_file_atomic(path, encode_emb1(m));
  std::vector<json> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back({{"row", i}, {"id", m.ids()[i]}});
  io::write_jsonl(ids_path_for(path), rows);
}

inline EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  auto raw = decode_emb1(io::read_file(path), path.string());
  const auto ids_file = ids_path_for(path);
  std::vector<std::string> ids(raw.rows());
  std::vector<bool> filled(raw.rows(), false);
  io::for_each_jsonl(ids_file, [&](std::size_t line, const json& j) {
    if (!j.contains("row") || !j["row"].is_number_unsigned() || !j.contains("id") || !j["id"].is_string())
      throw ParseError(ids_file.string(), line, 0, "expected {row, id}");
    const auto row = j["row"].get<std::size_t>();
    if (row >= ids.size() || filled[row]) throw ParseError(ids_file.string(), line, 0, "row out of range or repeated");
    filled[row] = true;
    ids[row] = j["id"].get<std::string>();
  });
  for (std::size_t i = 0; i < filled.size(); ++i)
    if (!filled[i]) throw DataError(ids_file.string() + ": no id for row " + std::to_string(i));
  return EmbeddingMatrix(std::move(ids), raw.dim(), raw.values());
}

}  // namespace ladderkit::eval

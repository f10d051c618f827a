// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ladderkit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage or missing configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with a 1-based line number and a byte offset within the line.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t offset, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ":" + std::to_string(offset) + ": " + what),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

/// A model backend could not produce a response.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Replay backend asked for a digest it has no fixture for.
class ReplayMissError : public BackendError {
 public:
  explicit ReplayMissError(const std::string& digest)
      : BackendError("replay backend has no entry for digest " + digest), digest_(digest) {}

  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

}  // namespace ladderkit

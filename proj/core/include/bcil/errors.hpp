// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bcil {

// Error taxonomy shared across the library. The CLI maps each class to a
// distinct process exit code.
enum class ErrorClass : int {
  usage = 64,       // bad flags / unknown tokens
  config = 65,      // invalid configuration values or keys
  format = 66,      // malformed file structure (magic, version, truncation)
  sequence = 67,    // out-of-order records
  state = 68,       // operation illegal in current state
  corruption = 69,  // checksum mismatch
  fault = 70,       // runtime execution fault (underrun, non-finite values)
  io = 74,          // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& msg) : std::runtime_error(msg), cls_(cls) {}
  ErrorClass cls() const noexcept { return cls_; }
  int exit_code() const noexcept { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error(ErrorClass::usage, m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorClass::config, m) {}
};

// Carries the byte offset at which parsing a file failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& m, std::uint64_t offset)
      : Error(ErrorClass::format, m + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

struct SequenceError : Error {
  explicit SequenceError(const std::string& m) : Error(ErrorClass::sequence, m) {}
};

struct StateError : Error {
  explicit StateError(const std::string& m) : Error(ErrorClass::state, m) {}
};

struct CorruptionError : Error {
  explicit CorruptionError(const std::string& m) : Error(ErrorClass::corruption, m) {}
};

struct ExecFault : Error {
  explicit ExecFault(const std::string& m) : Error(ErrorClass::fault, m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorClass::io, m) {}
};

}  // namespace bcil

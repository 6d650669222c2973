// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bcil {

// UTF-8 `key = value` configuration text. Blank lines and lines starting with
// '#' are ignored. Malformed lines report their 1-based line number; lookups
// against an allowed-key list reject unknown keys.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse_text(const std::string& text);
  static KvConfig parse_file(const std::string& path);

  // Throws ConfigError naming the first key not in `allowed`.
  void restrict_keys(const std::vector<std::string>& allowed) const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& values() const { return values_; }

  // Canonical `key=value\n` serialization, keys sorted.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace bcil

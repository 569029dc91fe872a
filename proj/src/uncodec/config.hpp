// Copyright 2026 The uncodec Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace uncodec {

enum class ValueType { kInt, kReal, kBool, kString, kChoice, kList };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // kChoice only
};

/// Registry of every accepted configuration key, in documentation order.
const std::vector<KeySpec>& config_keys();

/// Human-readable table of all keys with defaults, used by `--help`.
std::string describe_config_keys();

/// Flat key=value configuration. Every key has a default; unknown keys and
/// malformed values are rejected with ErrorCode::kConfig.
class Config {
 public:
  Config();

  static Config from_file(const std::string& path);
  static Config from_text(std::string_view text, const std::string& origin = "<text>");

  void set(const std::string& key, const std::string& value);
  /// Accepts "key=value".
  void apply_override(std::string_view assignment);

  const std::string& raw(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const { return raw(key); }
  std::vector<double> get_real_list(const std::string& key) const;

  /// Canonical "key=value" lines in registry order. Round-trips through from_text.
  std::string dump() const;

  bool operator==(const Config& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace uncodec

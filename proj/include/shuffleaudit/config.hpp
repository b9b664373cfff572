//
// Copyright 2026 The shuffle-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef SHUFFLEAUDIT_CONFIG_HPP_
#define SHUFFLEAUDIT_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace shuffleaudit {

// Flat key=value configuration. Values stay strings until read through a
// typed getter; keys are kept sorted so echoes are byte-stable.
class FlatConfig {
 public:
  FlatConfig() = default;

  // Parses `key = value` lines; '#' starts a comment. A .json path (or a
  // run_manifest.json produced by this tool) is unwrapped from its "config"
  // object, enabling manifest round-trips.
  static FlatConfig load(const std::string& path);
  static FlatConfig parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // Applies "key=value" override strings; overrides win over file values.
  void apply_overrides(const std::vector<std::string>& overrides);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;

  // Rejects keys outside `allowed`; the error names the offending key.
  void require_known_keys(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_CONFIG_HPP_

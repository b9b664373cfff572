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
#include "shuffleaudit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace shuffleaudit {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

FlatConfig FlatConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  if (ends_with(path, ".json")) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("bad JSON config: ") + e.what());
    }
    const nlohmann::json& cfg = doc.contains("config") ? doc["config"] : doc;
    if (!cfg.is_object()) {
      throw std::invalid_argument("JSON config must hold an object");
    }
    FlatConfig out;
    for (const auto& [key, value] : cfg.items()) {
      if (value.is_string()) {
        out.set(key, value.get<std::string>());
      } else {
        out.set(key, value.dump());
      }
    }
    return out;
  }
  return parse(text);
}

FlatConfig FlatConfig::parse(const std::string& text) {
  FlatConfig out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    }
    out.set(key, value);
  }
  return out;
}

void FlatConfig::set(const std::string& key, const std::string& value) {
  map_[key] = value;
}

void FlatConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("override must look like key=value: " + item);
    }
    set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

bool FlatConfig::has(const std::string& key) const {
  return map_.count(key) != 0;
}

std::string FlatConfig::get_string(const std::string& key,
                                   const std::string& fallback) const {
  const auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second;
}

std::int64_t FlatConfig::get_int(const std::string& key,
                                 std::int64_t fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  try {
    std::size_t used = 0;
    // Scientific notation like 1e6 is accepted for counts when exact.
    const double d = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    const auto v = static_cast<std::int64_t>(d);
    if (static_cast<double>(v) != d) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' is not an integer: " + it->second);
  }
}

std::uint64_t FlatConfig::get_uint(const std::string& key,
                                   std::uint64_t fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' is not an unsigned integer: " + it->second);
  }
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "' is not a number: " + it->second);
  }
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key +
                              "' is not a boolean: " + v);
}

std::optional<double> FlatConfig::get_optional_double(
    const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key, 0.0);
}

void FlatConfig::require_known_keys(
    const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : map_) {
    if (allowed.count(key) == 0) {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

}  // namespace shuffleaudit

/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include "lst/config.hpp"

#include <charconv>
#include <fstream>

#include "lst/common.hpp"
#include "lst/rng.hpp"

namespace lst {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw DataError(source + ":" + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

void KeyValueConfig::set_pair(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ContractError("config override '" + assignment + "' is not key=value");
  }
  entries_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ContractError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

void ConfigBinder::add(const std::string& key, Setter setter) {
  auto [it, inserted] = setters_.emplace(key, setter);
  if (inserted) return;
  // Several components may share a key; each receives the value.
  it->second = [first = std::move(it->second), second = std::move(setter)](const std::string& v) {
    first(v);
    second(v);
  };
}

void ConfigBinder::bind(const std::string& key, int& target) {
  add(key, [&target, key](const std::string& v) { target = parse_number<int>(key, v); });
}

void ConfigBinder::bind(const std::string& key, double& target) {
  add(key, [&target, key](const std::string& v) { target = parse_number<double>(key, v); });
}

void ConfigBinder::bind(const std::string& key, std::uint64_t& target) {
  add(key, [&target, key](const std::string& v) { target = parse_number<std::uint64_t>(key, v); });
}

void ConfigBinder::bind(const std::string& key, bool& target) {
  add(key, [&target, key](const std::string& v) {
    if (v == "1" || v == "true" || v == "on") {
      target = true;
    } else if (v == "0" || v == "false" || v == "off") {
      target = false;
    } else {
      throw ContractError("config key '" + key + "': expected boolean, got '" + v + "'");
    }
  });
}

void ConfigBinder::apply(const KeyValueConfig& config) const {
  for (const auto& [key, value] : config.entries()) {
    auto it = setters_.find(key);
    if (it == setters_.end()) throw ContractError("unknown config key '" + key + "'");
    it->second(value);
  }
}

Rng make_stream(std::uint64_t seed, std::string_view name) {
  // FNV-1a; std::hash is not stable across implementations.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace lst

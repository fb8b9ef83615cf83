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


#ifndef LST_CONFIG_HPP_
#define LST_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <string>

namespace lst {

// Flat key=value file: UTF-8, one pair per line, '#' starts a comment,
// surrounding whitespace ignored. Later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<stream>");
  static KeyValueConfig from_file(const std::filesystem::path& path);

  // Parses "key=value"; throws ContractError when '=' is missing.
  void set_pair(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

 private:
  std::map<std::string, std::string> entries_;
};

// Routes config keys to typed setters. apply() rejects any key that no
// component registered, naming it.
class ConfigBinder {
 public:
  void bind(const std::string& key, int& target);
  void bind(const std::string& key, double& target);
  void bind(const std::string& key, bool& target);
  void bind(const std::string& key, std::uint64_t& target);
  void apply(const KeyValueConfig& config) const;
  bool knows(const std::string& key) const { return setters_.count(key) != 0; }

 private:
  using Setter = std::function<void(const std::string&)>;
  void add(const std::string& key, Setter setter);

  std::map<std::string, Setter> setters_;
};

}  // namespace lst

#endif  // LST_CONFIG_HPP_

// Copyright 2026 The DummyNet Authors
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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dummynet/pipeline/toy.hpp"

namespace dummynet::pipeline {

/// Sectioned key-value settings after schema validation. Every known key is
/// present (defaults filled in); unknown sections or keys are ConfigError.
class Config {
 public:
  /// Defaults only.
  Config();
  /// Parses an INI file. Relative paths resolve against the file's directory.
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, const std::filesystem::path& base_dir = ".");

  const std::string& get(const std::string& key) const;  // "section.key"
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  /// Checks the value against the key's type.
  void set(const std::string& key, const std::string& value);

  std::filesystem::path data_dir() const;  // DUMMYNET_DATA_DIR wins
  std::filesystem::path work_dir() const;
  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("run.seed")); }

  ToyConfig toy() const;
  /// Canonical "key=value" lines of the listed sections, sorted.
  std::string canonical(const std::vector<std::string>& sections) const;
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_ = ".";
};

/// Text of a config file with every key at its default.
std::string default_config_text();

}  // namespace dummynet::pipeline

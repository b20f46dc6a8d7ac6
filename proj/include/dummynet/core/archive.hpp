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

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "dummynet/core/tensor.hpp"

namespace dummynet {

/// Named-tensor checkpoint file. The first line of the file is the format tag
/// (e.g. "me_v1"); loading with a different expected tag is a FormatError.
///
/// Layout: "<tag>\n" then a little-endian body: u64 metadata length, metadata
/// JSON bytes, u64 tensor count, and per tensor: u64 name length, name bytes,
/// 4 x i32 extent, doubles.
class Archive {
 public:
  explicit Archive(std::string tag) : tag_(std::move(tag)) {}

  const std::string& tag() const { return tag_; }
  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  void put(const std::string& name, const Tensor& t) { tensors_[name] = t; }
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor& get(const std::string& name) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  void save(const std::filesystem::path& path) const;
  static Archive load(const std::filesystem::path& path, const std::string& expected_tag);
  /// Reads only the tag line; empty string if the file is unreadable.
  static std::string peek_tag(const std::filesystem::path& path);

 private:
  std::string tag_;
  nlohmann::json meta_ = nlohmann::json::object();
  std::map<std::string, Tensor> tensors_;
};

}  // namespace dummynet

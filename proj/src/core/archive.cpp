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

#include "dummynet/core/archive.hpp"

#include <cstdint>
#include <fstream>

#include "dummynet/core/error.hpp"
#include "dummynet/core/rng.hpp"

namespace dummynet {
namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error(ErrorCode::FormatError, "truncated archive");
  return v;
}

std::string read_bytes(std::istream& is, std::uint64_t n) {
  if (n > (1ull << 32)) throw Error(ErrorCode::FormatError, "implausible archive field length");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw Error(ErrorCode::FormatError, "truncated archive");
  return s;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return splitmix64(splitmix64(root ^ h) + index);
}

const Tensor& Archive::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end())
    throw Error(ErrorCode::FormatError, "archive '" + tag_ + "' has no tensor '" + name + "'");
  return it->second;
}

void Archive::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  os << tag_ << '\n';
  const std::string meta = meta_.dump();
  write_u64(os, meta.size());
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  write_u64(os, tensors_.size());
  for (const auto& [name, t] : tensors_) {
    write_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const std::int32_t dims[4] = {t.n(), t.c(), t.h(), t.w()};
    os.write(reinterpret_cast<const char*>(dims), sizeof dims);
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string Archive::peek_tag(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::string tag;
  if (!is || !std::getline(is, tag)) return {};
  return tag;
}

Archive Archive::load(const std::filesystem::path& path, const std::string& expected_tag) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::MissingArtifact, "cannot open " + path.string());
  std::string tag;
  std::getline(is, tag);
  if (tag != expected_tag)
    throw Error(ErrorCode::FormatError,
                path.string() + ": expected header '" + expected_tag + "', found '" + tag + "'");
  Archive ar(tag);
  ar.meta_ = nlohmann::json::parse(read_bytes(is, read_u64(is)));
  const std::uint64_t count = read_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = read_bytes(is, read_u64(is));
    std::int32_t dims[4];
    is.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!is) throw Error(ErrorCode::FormatError, "truncated archive");
    Tensor t(Shape{dims[0], dims[1], dims[2], dims[3]});
    is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!is) throw Error(ErrorCode::FormatError, "truncated tensor " + name);
    ar.tensors_.emplace(std::move(name), std::move(t));
  }
  return ar;
}

}  // namespace dummynet

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
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dummynet/pipeline/config.hpp"

namespace dummynet::pipeline {

/// Lowercase hex SHA-1 of "blob <size>\0<bytes>", as git hashes file contents.
std::string blob_hash(const std::string& bytes);
std::string file_hash(const std::filesystem::path& path);

struct RunOptions {
  int workers = 1;
  bool force = false;         // ignore matching manifests
  std::ostream* log = nullptr;  // progress lines
};

struct StageResult {
  bool skipped = false;  // a matching manifest was found
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> outputs;
};

struct EvalOptions {
  bool plot = false;  // MR vs FPPI PNG
};

/// The command-line stages. Each writes its artifacts and a manifest holding
/// the config hash, seed, arguments, the input hash (outputs of the stages
/// it depends on) and the content hash of every output. A rerun with the
/// same manifest and intact outputs does nothing. MissingArtifact when a
/// prerequisite stage has not run.
class Pipeline {
 public:
  Pipeline(Config config, RunOptions options);

  const Config& config() const { return config_; }

  StageResult synth();
  StageResult fit_poses();
  StageResult train_mask();
  StageResult train_vae();
  StageResult train_gan();
  StageResult sample(int count);
  StageResult augment(Mode mode, int count, double max_brightness);
  StageResult eval(const EvalOptions& options);
  StageResult ablate(Mode mode);
  /// Table of every ablation mode run so far, as JSON / CSV / Markdown.
  std::vector<std::filesystem::path> write_ablation_report();

  std::filesystem::path manifest_path(const std::string& stage) const;

 private:
  using Body = std::function<std::vector<std::filesystem::path>()>;
  StageResult run_stage(const std::string& name, const std::vector<std::string>& sections, const nlohmann::json& args,
                        const std::vector<std::string>& deps, const Body& body);
  void say(const std::string& line) const;

  Config config_;
  RunOptions options_;
};

}  // namespace dummynet::pipeline

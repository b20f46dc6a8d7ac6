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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dummynet/core/error.hpp"
#include "dummynet/pipeline/stages.hpp"

using namespace dummynet;
using namespace dummynet::pipeline;

namespace {

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::MissingArtifact:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DummyNet person augmentation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::optional<std::int64_t> seed;
  int workers = 1;
  bool force = false;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "INI config file (defaults when omitted)");
  app.add_option("--seed", seed, "root seed, overrides run.seed");
  app.add_option("--workers", workers, "intra-stage threads")->check(CLI::Range(1, 256));
  app.add_flag("--force", force, "rerun even when the manifest matches");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  std::string init_out = "dummynet.ini";
  auto* init = app.add_subcommand("init-config", "write a config file with every default");
  init->add_option("output", init_out);

  auto* synth = app.add_subcommand("synth", "render the synthetic toy dataset");
  auto* fit = app.add_subcommand("fit-poses", "cluster keypoints and fit per-cluster PCA models");
  auto* mask = app.add_subcommand("train-mask", "train the mask estimator");
  auto* vae = app.add_subcommand("train-vae", "train the appearance encoder");
  auto* gan = app.add_subcommand("train-gan", "train the generator and critic");

  int sample_count = 16;
  auto* sample = app.add_subcommand("sample", "draw poses, masks and people on a flat background");
  sample->add_option("-n,--count", sample_count)->check(CLI::PositiveNumber);

  std::string augment_mode = "full";
  int augment_count = -1;
  double max_brightness = 0.0;
  auto* augment = app.add_subcommand("augment", "generate positives and insert people into scenes");
  augment->add_option("--mode", augment_mode);
  augment->add_option("-n,--count", augment_count, "generated positives (default data.generated_positives)");
  augment->add_option("--max-brightness", max_brightness, "keep appearance sources at most this bright")
      ->expected(0, 1)
      ->default_str("0.35");

  bool plot = false;
  auto* ev = app.add_subcommand("eval", "baseline vs augmented classifier and detector metrics");
  ev->add_flag("--plot", plot, "write the MR-FPPI plot");

  std::string ablate_mode = "all";
  auto* ablate = app.add_subcommand("ablate", "train the classifier on positives from an ablated generator");
  ablate->add_option("--mode", ablate_mode, "full, fixed-pose, hull-mask, gaussian-appearance, "
                                            "fixed-appearance, fixed-background or all");

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      std::ofstream out(init_out);
      if (!out) throw Error(ErrorCode::IoError, "cannot write " + init_out);
      out << default_config_text();
      return 0;
    }
    Config config = config_path.empty() ? Config() : Config::load(config_path);
    if (seed) config.set("run.seed", std::to_string(*seed));
    RunOptions opts;
    opts.workers = workers;
    opts.force = force;
    opts.log = quiet ? nullptr : &std::cerr;
    Pipeline p(config, opts);

    if (synth->parsed()) p.synth();
    if (fit->parsed()) p.fit_poses();
    if (mask->parsed()) p.train_mask();
    if (vae->parsed()) p.train_vae();
    if (gan->parsed()) p.train_gan();
    if (sample->parsed()) p.sample(sample_count);
    if (augment->parsed()) {
      // A bare --max-brightness means the default night threshold.
      if (augment->count("--max-brightness") == 0)
        max_brightness = config.get_double("augment.max_brightness");
      else if (augment->get_option("--max-brightness")->results().empty())
        max_brightness = 0.35;
      const int n = augment_count > 0 ? augment_count : config.get_int("data.generated_positives");
      p.augment(parse_mode(augment_mode), n, max_brightness);
    }
    if (ev->parsed()) p.eval({plot});
    if (ablate->parsed()) {
      if (ablate_mode == "all") {
        p.ablate(Mode::full);
        for (Mode m : ablation_modes()) p.ablate(m);
      } else {
        p.ablate(parse_mode(ablate_mode));
      }
      const auto report = p.write_ablation_report();
      if (!quiet) {
        std::ifstream md(report.back());
        std::cout << md.rdbuf();
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

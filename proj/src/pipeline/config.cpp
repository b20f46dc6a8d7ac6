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

#include "dummynet/pipeline/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dummynet/core/error.hpp"

namespace dummynet::pipeline {
namespace {

enum class Kind { integer, real, text };

struct Key {
  const char* name;
  Kind kind;
  const char* value;
  double lo, hi;  // inclusive range for numbers
};

// Section order is the order of the default config file.
const std::vector<Key>& schema() {
  static const std::vector<Key> k = {
      {"run.seed", Kind::integer, "0", 0, 2147483647},
      {"paths.data_dir", Kind::text, "data", 0, 0},
      {"paths.work_dir", Kind::text, "work", 0, 0},
      {"data.corpus_size", Kind::integer, "800", 20, 1e6},
      {"data.real_positives", Kind::integer, "50", 1, 1e6},
      {"data.train_negatives", Kind::integer, "400", 1, 1e6},
      {"data.generated_positives", Kind::integer, "200", 1, 1e6},
      {"data.test_positives", Kind::integer, "300", 1, 1e6},
      {"data.test_negatives", Kind::integer, "600", 1, 1e6},
      {"data.scenes", Kind::integer, "40", 0, 1e6},
      {"pose.viewpoint_clusters", Kind::integer, "6", 1, 10000},
      {"pose.viewpoint_threshold", Kind::real, "0.4", 1e-6, 1e6},
      {"pose.pose_threshold", Kind::real, "0.5", 1e-6, 1e6},
      {"pose.branching_factor", Kind::integer, "50", 2, 10000},
      {"pose.members_per_pose_cluster", Kind::integer, "150", 1, 1e6},
      {"pose.min_members", Kind::integer, "20", 20, 1e6},
      {"pose.sigma", Kind::real, "2.0", 0.1, 100},
      {"mask.width", Kind::integer, "16", 1, 1024},
      {"mask.epochs", Kind::integer, "4", 1, 100000},
      {"vae.width", Kind::integer, "16", 1, 1024},
      {"vae.epochs", Kind::integer, "30", 1, 100000},
      {"vae.lr", Kind::real, "0.002", 1e-9, 1},
      {"gan.n_blocks", Kind::integer, "2", 1, 6},
      {"gan.base_width", Kind::integer, "32", 1, 1024},
      {"gan.hidden", Kind::integer, "16", 1, 1024},
      {"gan.critic_width", Kind::integer, "16", 1, 1024},
      {"gan.critic_blocks", Kind::integer, "4", 1, 8},
      {"gan.stage_steps", Kind::integer, "150", 0, 1e8},
      {"gan.final_steps", Kind::integer, "600", 0, 1e8},
      {"gan.fade_steps", Kind::integer, "75", 0, 1e8},
      {"gan.batch", Kind::integer, "8", 1, 4096},
      {"gan.lr_generator", Kind::real, "0.0005", 1e-9, 1},
      {"gan.lr_critic", Kind::real, "0.0005", 1e-9, 1},
      {"gan.beta1", Kind::real, "0.5", 0, 0.999999},
      {"gan.beta2", Kind::real, "0.9", 0, 0.999999},
      {"gan.lambda1", Kind::real, "1", 1e-12, 1e6},
      {"gan.lambda2", Kind::real, "10", 0, 1e6},
      {"gan.lambda3", Kind::real, "10", 0, 1e6},
      {"gan.lambda4", Kind::real, "1", 0, 1e6},
      {"gan.gp_weight", Kind::real, "10", 0, 1e6},
      {"augment.max_brightness", Kind::real, "0", 0, 1},
      {"eval.classifier_epochs", Kind::integer, "60", 1, 100000},
      {"eval.seeds", Kind::integer, "5", 1, 1000},
  };
  return k;
}

const Key& find_key(const std::string& name) {
  for (const Key& k : schema())
    if (name == k.name) return k;
  throw Error(ErrorCode::ConfigError, "unknown config key '" + name + "'");
}

void check_value(const Key& k, const std::string& v) {
  if (k.kind == Kind::text) {
    if (v.empty()) throw Error(ErrorCode::ConfigError, std::string(k.name) + " must not be empty");
    return;
  }
  std::size_t used = 0;
  double x = 0;
  try {
    x = k.kind == Kind::integer ? static_cast<double>(std::stoll(v, &used)) : std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty())
    throw Error(ErrorCode::ConfigError,
                std::string(k.name) + ": '" + v + "' is not " + (k.kind == Kind::integer ? "an integer" : "a number"));
  if (x < k.lo || x > k.hi)
    throw Error(ErrorCode::ConfigError, std::string(k.name) + " = " + v + " is out of range");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Config::Config() {
  for (const Key& k : schema()) values_[k.name] = k.value;
}

Config Config::parse(const std::string& text, const std::filesystem::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Config c;
  c.base_dir_ = base_dir;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::ConfigError, "key '" + section + "' outside a section");
    for (const auto& [key, value] : body) c.set(section + "." + key, value.data());
  }
  const int s = 16 << c.get_int("gan.n_blocks");
  if (s != 64) throw Error(ErrorCode::ConfigError, "toy data is 64x64; gan.n_blocks must be 2");
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  return it->second;
}

int Config::get_int(const std::string& key) const { return static_cast<int>(std::stoll(get(key))); }
double Config::get_double(const std::string& key) const { return std::stod(get(key)); }

void Config::set(const std::string& key, const std::string& value) {
  const Key& k = find_key(key);
  check_value(k, value);
  values_[key] = value;
}

std::filesystem::path Config::data_dir() const {
  if (const char* env = std::getenv("DUMMYNET_DATA_DIR"); env && *env) return env;
  return resolve(base_dir_, get("paths.data_dir"));
}

std::filesystem::path Config::work_dir() const { return resolve(base_dir_, get("paths.work_dir")); }

ToyConfig Config::toy() const {
  ToyConfig t;
  t.corpus_size = get_int("data.corpus_size");
  t.real_positives = get_int("data.real_positives");
  t.train_negatives = get_int("data.train_negatives");
  t.generated_positives = get_int("data.generated_positives");
  t.test_positives = get_int("data.test_positives");
  t.test_negatives = get_int("data.test_negatives");
  t.classifier_epochs = get_int("eval.classifier_epochs");
  t.sigma = get_double("pose.sigma");
  t.pose.viewpoint = pose::BirchOptions{get_double("pose.viewpoint_threshold"), get_int("pose.branching_factor"),
                                        get_int("pose.viewpoint_clusters")};
  t.pose.pose = pose::BirchOptions{get_double("pose.pose_threshold"), get_int("pose.branching_factor"), 0};
  t.pose.members_per_pose_cluster = get_int("pose.members_per_pose_cluster");
  t.pose.min_members = get_int("pose.min_members");
  t.mask_width = get_int("mask.width");
  t.mask_epochs = get_int("mask.epochs");
  t.vae_width = get_int("vae.width");
  t.vae_epochs = get_int("vae.epochs");
  t.vae_lr = get_double("vae.lr");
  t.generator = gan::GeneratorConfig{get_int("gan.n_blocks"), get_int("gan.base_width"), get_int("gan.hidden")};
  t.critic = gan::DiscriminatorConfig{get_int("gan.critic_blocks"), get_int("gan.critic_width")};
  t.gan.stage_steps = get_int("gan.stage_steps");
  t.gan.final_steps = get_int("gan.final_steps");
  t.gan.fade_steps = get_int("gan.fade_steps");
  t.gan.batch = get_int("gan.batch");
  t.gan.lr_generator = get_double("gan.lr_generator");
  t.gan.lr_critic = get_double("gan.lr_critic");
  t.gan.beta1 = get_double("gan.beta1");
  t.gan.beta2 = get_double("gan.beta2");
  t.gan.weights = gan::LossWeights{get_double("gan.lambda1"), get_double("gan.lambda2"), get_double("gan.lambda3"),
                                   get_double("gan.lambda4"), get_double("gan.gp_weight")};
  return t;
}

std::string Config::canonical(const std::vector<std::string>& sections) const {
  std::string out;
  for (const auto& [key, value] : values_) {
    const std::string section = key.substr(0, key.find('.'));
    if (sections.empty() || std::find(sections.begin(), sections.end(), section) != sections.end())
      out += key + "=" + value + "\n";
  }
  return out;
}

std::string Config::canonical() const { return canonical({}); }

std::string default_config_text() {
  std::string out, section;
  for (const Key& k : schema()) {
    const std::string name = k.name;
    const std::string s = name.substr(0, name.find('.'));
    if (s != section) {
      out += (out.empty() ? "" : "\n") + std::string("[") + s + "]\n";
      section = s;
    }
    out += name.substr(name.find('.') + 1) + " = " + k.value + "\n";
  }
  return out;
}

}  // namespace dummynet::pipeline

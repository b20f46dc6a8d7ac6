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

#include "dummynet/pipeline/stages.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dummynet/core/error.hpp"
#include "dummynet/core/image.hpp"
#include "dummynet/core/parallel.hpp"
#include "dummynet/eval/detector.hpp"

namespace dummynet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string blob_hash(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string file_hash(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::MissingArtifact, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return blob_hash(ss.str());
}

namespace {

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error(ErrorCode::MissingArtifact, "cannot read " + p.string());
  return json::parse(f);
}

void write_json(const fs::path& p, const json& j) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  f << j.dump(2) << "\n";
}

std::string item_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d", i);
  return buf;
}

std::vector<fs::path> write_images(const fs::path& dir, const std::vector<Tensor>& images) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back(dir / (item_name(static_cast<int>(i)) + ".png"));
    write_png(out.back(), images[i]);
  }
  return out;
}

std::vector<Tensor> read_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingArtifact, "missing directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Tensor> out;
  for (const auto& f : files) out.push_back(read_png(f));
  return out;
}

place::Box mask_box(const Tensor& m) {
  int r0 = m.h(), r1 = -1, c0 = m.w(), c1 = -1;
  for (int y = 0; y < m.h(); ++y)
    for (int x = 0; x < m.w(); ++x)
      if (m(0, 0, y, x) > 0.5) r0 = std::min(r0, y), r1 = std::max(r1, y), c0 = std::min(c0, x), c1 = std::max(c1, x);
  if (r1 < 0) return {};
  return {static_cast<double>(c0), static_cast<double>(r0), static_cast<double>(c1 - c0 + 1),
          static_cast<double>(r1 - r0 + 1)};
}

std::vector<fs::path> write_people(const fs::path& dir, const std::vector<Tensor>& images,
                                   const std::vector<Tensor>& masks, const std::vector<pose::Skeleton>& skeletons) {
  std::vector<fs::path> out = write_images(dir / "images", images);
  std::vector<pose::PersonRecord> records;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!masks.empty()) {
      out.push_back(dir / "masks" / (item_name(static_cast<int>(i)) + ".png"));
      fs::create_directories(out.back().parent_path());
      mask::write_mask_png(out.back(), masks[i]);
    }
    const place::Box b = masks.empty() ? place::Box{} : mask_box(masks[i]);
    records.push_back({item_name(static_cast<int>(i)), {b.x, b.y, b.w, b.h}, skeletons[i]});
  }
  out.push_back(dir / "keypoints.jsonl");
  pose::write_keypoints_jsonl(out.back(), records);
  return out;
}

std::vector<pose::Skeleton> read_skeletons(const fs::path& file) {
  std::vector<pose::Skeleton> out;
  for (auto& r : pose::read_keypoints_jsonl(file)) out.push_back(r.skeleton);
  return out;
}

struct StoredScene {
  std::string id;
  place::SceneContext context;
  place::HeightModel heights;
};

std::vector<fs::path> write_scenes(const fs::path& dir, const std::vector<synth::Scene>& scenes) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  std::ofstream meta(dir / "scenes.jsonl");
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    out.push_back(dir / (item_name(static_cast<int>(i)) + ".png"));
    write_png(out.back(), s.context.image);
    std::string labels;
    for (place::Label l : s.context.labels) labels += static_cast<char>('0' + static_cast<int>(l));
    json persons = json::array();
    for (const auto& p : s.context.persons) persons.push_back({p.x, p.y_bottom, p.height, p.width});
    meta << json{{"id", item_name(static_cast<int>(i))},
                 {"height_model", {s.height_model.a, s.height_model.b}},
                 {"persons", persons},
                 {"labels", labels}}
                .dump()
         << "\n";
  }
  out.push_back(dir / "scenes.jsonl");
  return out;
}

std::vector<StoredScene> read_scenes(const fs::path& dir) {
  std::ifstream in(dir / "scenes.jsonl");
  if (!in) throw Error(ErrorCode::MissingArtifact, "missing " + (dir / "scenes.jsonl").string());
  std::vector<StoredScene> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    StoredScene s;
    s.id = j.at("id").get<std::string>();
    s.context.image = read_png(dir / (s.id + ".png"));
    for (char c : j.at("labels").get<std::string>()) s.context.labels.push_back(static_cast<place::Label>(c - '0'));
    for (const auto& p : j.at("persons")) s.context.persons.push_back({p[0], p[1], p[2], p[3]});
    s.heights = {j.at("height_model")[0].get<double>(), j.at("height_model")[1].get<double>()};
    s.context.validate();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<eval::GroundTruth> scene_truths(const std::vector<StoredScene>& scenes) {
  std::vector<eval::GroundTruth> gts;
  for (const auto& s : scenes)
    for (const auto& p : s.context.persons) gts.push_back({s.id, place::to_image_box(p, s.context.height())});
  return gts;
}

synth::Scene random_scene_with_people(Rng& rng) {
  for (;;) {
    synth::Scene s = synth::random_background(rng);
    const int n = rng.uniform_int(1, 2);
    for (int k = 0; k < n; ++k) synth::add_random_person(s, rng);
    if (!s.people.empty()) return s;
  }
}

struct Paths {
  fs::path data, work;
  fs::path corpus() const { return data / "corpus"; }
  fs::path real() const { return data / "real"; }
  fs::path models() const { return work / "models"; }
};

std::vector<synth::PersonCrop> read_corpus(const fs::path& dir) {
  const std::vector<Tensor> images = read_images(dir / "images");
  const std::vector<Tensor> masks = read_images(dir / "masks");
  const std::vector<pose::Skeleton> sk = read_skeletons(dir / "keypoints.jsonl");
  if (images.size() != masks.size() || images.size() != sk.size())
    throw Error(ErrorCode::FormatError, "corpus files disagree in count under " + dir.string());
  std::vector<synth::PersonCrop> out(images.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].image = images[i];
    out[i].mask = masks[i];
    out[i].skeleton = sk[i];
  }
  return out;
}

std::vector<AppearanceSource> read_sources(const fs::path& dir) {
  const std::vector<Tensor> images = read_images(dir / "images");
  const std::vector<pose::Skeleton> sk = read_skeletons(dir / "keypoints.jsonl");
  if (images.size() != sk.size()) throw Error(ErrorCode::FormatError, "real positives disagree in count");
  std::vector<AppearanceSource> out;
  for (std::size_t i = 0; i < images.size(); ++i) out.push_back({images[i], sk[i]});
  return out;
}

// Everything but the corpus.
ToyData read_task(const Paths& p) {
  ToyData d;
  d.real_positives = read_sources(p.real());
  d.train_negatives = read_images(p.data / "negatives");
  d.backgrounds = read_images(p.data / "backgrounds");
  d.test_positives = read_images(p.data / "test" / "positives");
  d.test_negatives = read_images(p.data / "test" / "negatives");
  return d;
}

CanvasPlacement read_canvas(const fs::path& p) {
  const json j = read_json(p);
  return {j.at("torso_height").get<double>(), j.at("cx").get<double>(), j.at("cy").get<double>()};
}

struct LoadedModels {
  pose::PoseModel poses;
  mask::MaskEstimator mask;
  appearance::Vae vae;
  gan::Generator generator;
  CanvasPlacement placement;
  double sigma;

  Models view() const {
    Models m;
    m.poses = &poses;
    m.mask = &mask;
    m.vae = &vae;
    m.generator = &generator;
    m.placement = placement;
    m.sigma = sigma;
    return m;
  }
};

LoadedModels load_models(const Paths& p, double sigma) {
  const fs::path m = p.models();
  return LoadedModels{pose::PoseModel::load(m / "pose_model.bin"), mask::MaskEstimator::load(m / "mask.bin"),
                      appearance::Vae::load(m / "vae.bin"), gan::Generator::load(m / "generator.bin"),
                      read_canvas(m / "canvas.json"), sigma};
}

Tensor tile(const std::vector<Tensor>& images, int cols) {
  if (images.empty()) return Tensor(1, 3, 1, 1);
  const int s = images[0].h();
  const int rows = (static_cast<int>(images.size()) + cols - 1) / cols;
  Tensor g(1, 3, rows * s, cols * s);
  for (std::size_t i = 0; i < images.size(); ++i)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
          g(0, c, static_cast<int>(i / cols) * s + y, static_cast<int>(i % cols) * s + x) =
              images[i](0, images[i].c() == 1 ? 0 : c, y, x);
  return g;
}

json report_json(const eval::MetricsReport& r) {
  return {{"mr_at_1fpr", r.mr_at_1fpr}, {"mr_at_10fpr", r.mr_at_10fpr}, {"lamr", r.lamr}, {"n_pos", r.n_pos},
          {"n_neg", r.n_neg}};
}

struct ClassifierRun {
  eval::MetricsReport report;
  std::vector<eval::RocPoint> roc;
  std::vector<eval::Detection> detections;
  std::vector<eval::FppiPoint> curve;
};

ClassifierRun run_classifier(const ToyConfig& toy, const std::vector<Tensor>& pos, const std::vector<Tensor>& neg,
                             const ToyData& task, const std::vector<StoredScene>& scenes, std::uint64_t seed) {
  eval::Classifier model(derive_seed(seed, "classifier-init"));
  eval::ClassifierTrainConfig tc;
  tc.epochs = toy.classifier_epochs;
  tc.seed = derive_seed(seed, "classifier-train");
  eval::train_classifier(model, pos, neg, tc);
  std::vector<Tensor> test = task.test_positives;
  test.insert(test.end(), task.test_negatives.begin(), task.test_negatives.end());
  const std::vector<double> scores = eval::score_images(model, test);
  std::vector<eval::ScoredSample> samples;
  for (std::size_t i = 0; i < scores.size(); ++i) samples.push_back({scores[i], i < task.test_positives.size()});
  ClassifierRun r;
  r.report = eval::make_report(samples);
  r.roc = eval::roc_sweep(samples);
  if (!scenes.empty()) {
    for (const auto& s : scenes) {
      auto d = eval::detect_people(model, s.context.image, s.heights, s.id);
      r.detections.insert(r.detections.end(), d.begin(), d.end());
    }
    const auto gts = scene_truths(scenes);
    const int n = static_cast<int>(scenes.size());
    r.report.lamr = eval::lamr(r.detections, gts, n);
    r.curve = eval::fppi_curve(r.detections, gts, n);
  }
  return r;
}

eval::MetricsReport mean_report(const std::vector<eval::MetricsReport>& rs) {
  eval::MetricsReport m{0, 0, 0, rs.front().n_pos, rs.front().n_neg};
  for (const auto& r : rs) {
    m.mr_at_1fpr += r.mr_at_1fpr / rs.size();
    m.mr_at_10fpr += r.mr_at_10fpr / rs.size();
    m.lamr += r.lamr / rs.size();
  }
  return m;
}

}  // namespace

Pipeline::Pipeline(Config config, RunOptions options) : config_(std::move(config)), options_(options) {}

void Pipeline::say(const std::string& line) const {
  if (options_.log) *options_.log << line << std::endl;
}

fs::path Pipeline::manifest_path(const std::string& stage) const {
  if (stage == "synth") return config_.data_dir() / "manifests" / "synth.json";
  return config_.work_dir() / "manifests" / (stage + ".json");
}

StageResult Pipeline::run_stage(const std::string& name, const std::vector<std::string>& sections, const json& args,
                                const std::vector<std::string>& deps, const Body& body) {
  json inputs = json::object();
  for (const std::string& dep : deps) {
    const fs::path mp = manifest_path(dep);
    if (!fs::exists(mp))
      throw Error(ErrorCode::MissingArtifact, "'" + name + "' needs the outputs of '" + dep + "'; run it first");
    const json m = read_json(mp);
    for (const auto& [file, hash] : m.at("outputs").items())
      if (!fs::exists(file))
        throw Error(ErrorCode::MissingArtifact, "output " + file + " of '" + dep + "' is missing; rerun it");
    inputs[dep] = m.at("outputs");
  }
  json manifest = {{"stage", name},
                   {"config_hash", blob_hash(config_.canonical(sections))},
                   {"seed", config_.seed()},
                   {"args", args},
                   {"input_hash", blob_hash(inputs.dump())}};
  StageResult result;
  result.manifest = manifest_path(name);
  if (!options_.force && fs::exists(result.manifest)) {
    const json old = read_json(result.manifest);
    bool same = true;
    for (const char* k : {"config_hash", "seed", "args", "input_hash"}) same = same && old.value(k, json()) == manifest[k];
    const json old_outputs = old.value("outputs", json::object());
    for (const auto& [file, hash] : old_outputs.items())
      same = same && fs::exists(file) && file_hash(file) == hash.get<std::string>();
    if (same) {
      say(name + ": up to date");
      result.skipped = true;
      for (const auto& [file, hash] : old_outputs.items()) result.outputs.emplace_back(file);
      return result;
    }
  }
  say(name + ": running");
  result.outputs = body();
  std::sort(result.outputs.begin(), result.outputs.end());
  json outputs = json::object();
  for (const fs::path& p : result.outputs) outputs[p.string()] = file_hash(p);
  manifest["outputs"] = outputs;
  write_json(result.manifest, manifest);
  say(name + ": wrote " + std::to_string(result.outputs.size()) + " files");
  return result;
}

StageResult Pipeline::synth() {
  return run_stage("synth", {"run", "data"}, json::object(), {}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const ToyConfig toy = config_.toy();
    const std::uint64_t seed = derive_seed(config_.seed(), "synth");
    const ToyData d = make_toy_data(toy, seed, options_.workers);
    std::vector<fs::path> out;
    auto add = [&](std::vector<fs::path> v) { out.insert(out.end(), v.begin(), v.end()); };
    {
      std::vector<Tensor> img, msk;
      std::vector<pose::Skeleton> sk;
      for (const auto& c : d.corpus) img.push_back(c.image), msk.push_back(c.mask), sk.push_back(c.skeleton);
      add(write_people(p.corpus(), img, msk, sk));
    }
    {
      std::vector<Tensor> img;
      std::vector<pose::Skeleton> sk;
      for (const auto& c : d.real_positives) img.push_back(c.image), sk.push_back(c.skeleton);
      add(write_people(p.real(), img, {}, sk));
    }
    add(write_images(p.data / "negatives", d.train_negatives));
    add(write_images(p.data / "backgrounds", d.backgrounds));
    add(write_images(p.data / "test" / "positives", d.test_positives));
    add(write_images(p.data / "test" / "negatives", d.test_negatives));
    const int n_scenes = config_.get_int("data.scenes");
    for (const char* split : {"scenes", "test_scenes"}) {
      std::vector<synth::Scene> scenes(n_scenes);
      parallel_for(n_scenes, options_.workers, [&](int i) {
        Rng rng(seed, split, i);
        scenes[i] = random_scene_with_people(rng);
      });
      add(write_scenes(p.data / split, scenes));
    }
    return out;
  });
}

StageResult Pipeline::fit_poses() {
  return run_stage("fit-poses", {"run", "pose"}, json::object(), {"synth"}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const std::vector<pose::Skeleton> sk = read_skeletons(p.corpus() / "keypoints.jsonl");
    const pose::PoseModel model = pose::fit_pose_model(sk, config_.toy().pose);
    if (model.clusters.empty()) throw Error(ErrorCode::NoSamples, "no pose cluster reached the member minimum");
    fs::create_directories(p.models());
    model.save(p.models() / "pose_model.bin");
    const CanvasPlacement c = fit_canvas_placement(sk);
    write_json(p.models() / "canvas.json", {{"torso_height", c.torso_height}, {"cx", c.cx}, {"cy", c.cy}});
    json clusters = json::array();
    for (const auto& m : model.clusters)
      clusters.push_back({{"viewpoint", m.viewpoint_id}, {"pose_cluster", m.pose_cluster_id}, {"members", m.member_count}});
    write_json(p.models() / "pose_summary.json", {{"input", model.n_input},
                                                  {"accepted", model.n_accepted},
                                                  {"viewpoint_clusters", model.viewpoints.size()},
                                                  {"models", clusters}});
    say("fit-poses: " + std::to_string(model.clusters.size()) + " pose clusters");
    return std::vector<fs::path>{p.models() / "pose_model.bin", p.models() / "canvas.json",
                                 p.models() / "pose_summary.json"};
  });
}

StageResult Pipeline::train_mask() {
  return run_stage("train-mask", {"run", "pose", "mask"}, json::object(), {"synth"}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const ToyConfig toy = config_.toy();
    const auto corpus = read_corpus(p.corpus());
    const mask::MaskEstimator me =
        train_corpus_mask(toy, corpus, derive_seed(config_.seed(), "mask"), options_.log != nullptr);
    fs::create_directories(p.models());
    me.save(p.models() / "mask.bin");
    // Held-out IoU on the validation tenth.
    double iou = 0.0;
    int n = 0;
    for (std::size_t i = 9; i < corpus.size(); i += 10, ++n)
      iou += mask::mask_iou(mask::estimate_mask(me, pose::render_heatmaps(corpus[i].skeleton, toy.sigma)),
                            corpus[i].mask);
    write_json(p.models() / "mask_metrics.json", {{"val_iou", n ? iou / n : 0.0}, {"val_samples", n}});
    return std::vector<fs::path>{p.models() / "mask.bin", p.models() / "mask_metrics.json"};
  });
}

StageResult Pipeline::train_vae() {
  return run_stage("train-vae", {"run", "pose", "vae"}, json::object(), {"synth", "train-mask"}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const ToyConfig toy = config_.toy();
    const auto corpus = read_corpus(p.corpus());
    const auto me = mask::MaskEstimator::load(p.models() / "mask.bin");
    const appearance::Vae vae =
        train_corpus_vae(toy, corpus, me, derive_seed(config_.seed(), "vae"), options_.log != nullptr);
    vae.save(p.models() / "vae.bin");
    // Posterior means of the real positives, the default appearance pool.
    std::vector<appearance::Latent> latents;
    for (const auto& s : read_sources(p.real())) {
      const Tensor m = mask::estimate_mask(me, pose::render_heatmaps(s.skeleton, toy.sigma));
      latents.push_back(appearance::to_latent(vae.encode(appearance::mask_background(s.image, m), nullptr).first));
    }
    appearance::write_latents(p.models() / "latents.bin", latents);
    return std::vector<fs::path>{p.models() / "vae.bin", p.models() / "latents.bin"};
  });
}

StageResult Pipeline::train_gan() {
  return run_stage("train-gan", {"run", "pose", "gan"}, json::object(), {"synth", "train-mask", "train-vae"}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const ToyConfig toy = config_.toy();
    const auto corpus = read_corpus(p.corpus());
    const auto me = mask::MaskEstimator::load(p.models() / "mask.bin");
    appearance::Vae vae = appearance::Vae::load(p.models() / "vae.bin");
    gan::Generator g(toy.generator, derive_seed(config_.seed(), "gen-init"));
    gan::Discriminator d(toy.critic, gan::kCondChannels, derive_seed(config_.seed(), "dis-init"));
    gan::GanTrainConfig gc = toy.gan;
    gc.seed = derive_seed(config_.seed(), "gan-train");
    gc.log_path = p.models() / "gan_log.csv";
    gc.verbose = options_.log != nullptr;
    gan::train_gan(g, d, vae, gan_samples(corpus, me, toy.sigma), gc);
    g.save(p.models() / "generator.bin");
    d.save(p.models() / "critic.bin");
    return std::vector<fs::path>{p.models() / "generator.bin", p.models() / "critic.bin", p.models() / "gan_log.csv"};
  });
}

StageResult Pipeline::sample(int count) {
  if (count <= 0) throw Error(ErrorCode::ConfigError, "sample count must be positive");
  return run_stage("sample", {"run", "pose"}, {{"count", count}}, {"fit-poses", "train-mask", "train-vae", "train-gan"},
                   [&] {
                     const Paths p{config_.data_dir(), config_.work_dir()};
                     const LoadedModels lm = load_models(p, config_.toy().sigma);
                     const int s = lm.generator.config().output_size();
                     const std::vector<Tensor> gray{Tensor(1, 3, s, s, 0.5)};
                     const auto people = generate_people(lm.view(), gray, {}, count, Mode::gaussian_appearance,
                                                         derive_seed(config_.seed(), "sample"), options_.workers);
                     const fs::path dir = config_.work_dir() / "samples";
                     fs::create_directories(dir);
                     std::vector<Tensor> show, persons, masks;
                     std::vector<pose::Skeleton> sk;
                     for (const auto& g : people) {
                       Tensor heat = pose::render_heatmaps(g.skeleton, lm.sigma);
                       Tensor peak(1, 1, s, s);
                       for (int k = 0; k < pose::kNumKeypoints; ++k)
                         for (int y = 0; y < s; ++y)
                           for (int x = 0; x < s; ++x) peak(0, 0, y, x) = std::max(peak(0, 0, y, x), heat(0, k, y, x));
                       show.push_back(peak);
                       show.push_back(g.mask);
                       show.push_back(g.composite);
                       persons.push_back(g.composite);
                       masks.push_back(g.mask);
                       sk.push_back(g.skeleton);
                     }
                     std::vector<fs::path> out = write_people(dir, persons, masks, sk);
                     out.push_back(dir / "grid.png");
                     write_png(out.back(), tile(show, 6));
                     return out;
                   });
}

StageResult Pipeline::augment(Mode mode, int count, double max_brightness) {
  const std::string name = "augment-" + std::string(mode_name(mode));
  const json args = {{"mode", mode_name(mode)}, {"count", count}, {"max_brightness", max_brightness}};
  return run_stage(name, {"run", "pose"}, args, {"synth", "fit-poses", "train-mask", "train-vae", "train-gan"}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const LoadedModels lm = load_models(p, config_.toy().sigma);
    const auto sources = filter_by_brightness(read_sources(p.real()), max_brightness);
    if (sources.empty() && mode != Mode::gaussian_appearance)
      throw Error(ErrorCode::ConfigError, "no appearance source is darker than --max-brightness");
    const std::vector<Tensor> backgrounds = read_images(p.data / "backgrounds");
    const std::uint64_t seed = derive_seed(config_.seed(), "augment");
    const auto people = generate_people(lm.view(), backgrounds, sources, count, mode, seed, options_.workers);
    const fs::path dir = config_.work_dir() / "augment" / mode_name(mode);
    std::vector<Tensor> images, masks;
    std::vector<pose::Skeleton> sk;
    for (const auto& g : people) images.push_back(g.composite), masks.push_back(g.mask), sk.push_back(g.skeleton);
    std::vector<fs::path> out = write_people(dir / "positives", images, masks, sk);
    {
      out.push_back(dir / "manifest.jsonl");
      std::ofstream m(out.back());
      for (int i = 0; i < count; ++i)
        m << json{{"file", "positives/images/" + item_name(i) + ".png"},
                  {"mode", mode_name(mode)},
                  {"background", item_name(i % static_cast<int>(backgrounds.size()))},
                  {"donor", people[i].donor},
                  {"seed", seed},
                  {"index", i}}
                 .dump()
          << "\n";
    }
    // Full scenes: one generated person per scene at a proposed footprint.
    const auto scenes = read_scenes(p.data / "scenes");
    std::vector<Tensor> augmented(scenes.size());
    std::vector<json> boxes(scenes.size());
    parallel_for(static_cast<int>(scenes.size()), options_.workers, [&](int i) {
      const auto& s = scenes[i];
      const SceneAugmentation a =
          augment_scene(lm.view(), s.context, s.heights, sources, mode, derive_seed(seed, "scene", i));
      augmented[i] = a.insertion.image;
      json real = json::array();
      for (const auto& b : s.context.persons) {
        const place::Box ib = place::to_image_box(b, s.context.height());
        real.push_back({ib.x, ib.y, ib.w, ib.h});
      }
      const place::Box g = a.insertion.box;
      boxes[i] = {{"image_id", s.id}, {"persons", real}, {"generated", {g.x, g.y, g.w, g.h}}};
    });
    std::vector<fs::path> sc = write_images(dir / "scenes", augmented);
    out.insert(out.end(), sc.begin(), sc.end());
    out.push_back(dir / "scenes" / "boxes.jsonl");
    std::ofstream b(out.back());
    for (const auto& j : boxes) b << j.dump() << "\n";
    return out;
  });
}

StageResult Pipeline::eval(const EvalOptions& opts) {
  return run_stage("eval", {"run", "eval"}, {{"plot", opts.plot}}, {"synth", "augment-full"}, [&] {
    const Paths p{config_.data_dir(), config_.work_dir()};
    const ToyConfig toy = config_.toy();
    const ToyData task = read_task(p);
    const auto scenes = read_scenes(p.data / "test_scenes");
    std::vector<Tensor> real;
    for (const auto& s : task.real_positives) real.push_back(s.image);
    std::vector<Tensor> augmented = real;
    for (auto& t : read_images(config_.work_dir() / "augment" / "full" / "positives" / "images"))
      augmented.push_back(std::move(t));

    const int seeds = config_.get_int("eval.seeds");
    std::vector<ClassifierRun> base(seeds), aug(seeds);
    parallel_for(seeds, options_.workers, [&](int k) {
      const std::uint64_t s = derive_seed(config_.seed(), "eval", k);
      base[k] = run_classifier(toy, real, task.train_negatives, task, scenes, s);
      aug[k] = run_classifier(toy, augmented, task.train_negatives, task, scenes, s);
    });
    std::vector<eval::MetricsReport> rb, ra;
    json per_seed = json::array();
    for (int k = 0; k < seeds; ++k) {
      rb.push_back(base[k].report);
      ra.push_back(aug[k].report);
      per_seed.push_back({{"seed", k}, {"baseline", report_json(base[k].report)}, {"augmented", report_json(aug[k].report)}});
    }
    const eval::MetricsReport mb = mean_report(rb), ma = mean_report(ra);
    const fs::path dir = config_.work_dir() / "eval";
    fs::create_directories(dir);
    std::vector<fs::path> out{dir / "baseline.json", dir / "augmented.json", dir / "metrics.json",
                              dir / "roc_baseline.csv", dir / "roc_augmented.csv", dir / "detections_baseline.jsonl",
                              dir / "detections_augmented.jsonl"};
    eval::write_report_json(out[0], mb);
    eval::write_report_json(out[1], ma);
    write_json(out[2], {{"baseline", report_json(mb)},
                        {"augmented", report_json(ma)},
                        {"mr_at_10fpr_reduction", mb.mr_at_10fpr - ma.mr_at_10fpr},
                        {"real_positives", real.size()},
                        {"generated_positives", augmented.size() - real.size()},
                        {"per_seed", per_seed}});
    eval::write_roc_csv(out[3], base[0].roc);
    eval::write_roc_csv(out[4], aug[0].roc);
    eval::write_detections_jsonl(out[5], base[0].detections);
    eval::write_detections_jsonl(out[6], aug[0].detections);
    if (opts.plot) {
      out.push_back(dir / "mr_fppi.png");
      eval::write_mr_fppi_plot(out.back(), {base[0].curve, aug[0].curve});
    }
    say("eval: MR@10%FPR baseline " + std::to_string(mb.mr_at_10fpr) + ", augmented " + std::to_string(ma.mr_at_10fpr));
    return out;
  });
}

StageResult Pipeline::ablate(Mode mode) {
  const std::string name = "ablate-" + std::string(mode_name(mode));
  StageResult r = run_stage(
      name, {"run", "eval", "data"}, {{"mode", mode_name(mode)}},
      {"synth", "fit-poses", "train-mask", "train-vae", "train-gan"}, [&] {
        const Paths p{config_.data_dir(), config_.work_dir()};
        const ToyConfig toy = config_.toy();
        const ToyData task = read_task(p);
        const LoadedModels lm = load_models(p, toy.sigma);
        // The same seed in every mode keeps backgrounds and draws paired.
        const auto people = generate_people(lm.view(), task.backgrounds, task.real_positives, toy.generated_positives,
                                             mode, derive_seed(config_.seed(), "ablate"), options_.workers);
        std::vector<Tensor> pos;
        for (const auto& s : task.real_positives) pos.push_back(s.image);
        for (const auto& g : people) pos.push_back(g.composite);
        const int seeds = config_.get_int("eval.seeds");
        std::vector<ClassifierRun> runs(seeds);
        parallel_for(seeds, options_.workers, [&](int k) {
          runs[k] = run_classifier(toy, pos, task.train_negatives, task, {}, derive_seed(config_.seed(), "eval", k));
        });
        std::vector<eval::MetricsReport> rs;
        json per_seed = json::array();
        for (int k = 0; k < seeds; ++k) {
          rs.push_back(runs[k].report);
          per_seed.push_back({{"seed", k}, {"mr_at_1fpr", runs[k].report.mr_at_1fpr}, {"mr_at_10fpr", runs[k].report.mr_at_10fpr}});
        }
        const eval::MetricsReport m = mean_report(rs);
        const fs::path dir = config_.work_dir() / "ablate";
        std::vector<fs::path> out{dir / (std::string(mode_name(mode)) + ".json"),
                                  dir / (std::string(mode_name(mode)) + "_samples.png")};
        write_json(out[0], {{"mode", mode_name(mode)},
                            {"mr_at_1fpr", m.mr_at_1fpr},
                            {"mr_at_10fpr", m.mr_at_10fpr},
                            {"seeds", seeds},
                            {"per_seed", per_seed}});
        std::vector<Tensor> show;
        for (std::size_t i = 0; i < std::min<std::size_t>(16, people.size()); ++i) show.push_back(people[i].composite);
        write_png(out[1], tile(show, 8));
        return out;
      });
  write_ablation_report();
  return r;
}

std::vector<fs::path> Pipeline::write_ablation_report() {
  const fs::path dir = config_.work_dir() / "ablate";
  std::vector<Mode> order{Mode::full};
  for (Mode m : ablation_modes()) order.push_back(m);
  json rows = json::array();
  std::ostringstream csv, md;
  csv << "mode,mr_at_1fpr,mr_at_10fpr\n";
  md << "| mode | MR @ 1% FPR | MR @ 10% FPR |\n|---|---|---|\n";
  for (Mode m : order) {
    const fs::path f = dir / (std::string(mode_name(m)) + ".json");
    if (!fs::exists(f)) continue;
    const json j = read_json(f);
    rows.push_back(j);
    const double a = j.at("mr_at_1fpr").get<double>(), b = j.at("mr_at_10fpr").get<double>();
    csv << mode_name(m) << "," << a << "," << b << "\n";
    md << "| " << mode_name(m) << " | " << std::fixed << std::setprecision(3) << a << " | " << b << " |\n";
    md.unsetf(std::ios::fixed);
  }
  std::vector<fs::path> out{dir / "report.json", dir / "report.csv", dir / "report.md"};
  write_json(out[0], {{"rows", rows}});
  std::ofstream(out[1]) << csv.str();
  std::ofstream(out[2]) << md.str();
  return out;
}

}  // namespace dummynet::pipeline

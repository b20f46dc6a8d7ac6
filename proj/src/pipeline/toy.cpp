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

#include "dummynet/pipeline/toy.hpp"

#include <algorithm>

#include "dummynet/core/error.hpp"
#include "dummynet/core/parallel.hpp"

namespace dummynet::pipeline {

ToyConfig::ToyConfig() {
  // A few hundred skeletons support only a handful of viewpoint clusters.
  pose.viewpoint = pose::BirchOptions{0.4, 50, 6};
  pose.members_per_pose_cluster = 150;
}

ToyData make_toy_data(const ToyConfig& c, std::uint64_t seed, int workers) {
  // One derived stream per item, so the worker count cannot change the data.
  auto crops = [&](const char* label, int n) {
    std::vector<synth::PersonCrop> out(n);
    parallel_for(n, workers, [&](int i) {
      Rng rng(seed, label, i);
      out[i] = synth::random_person_crop(rng);
    });
    return out;
  };
  ToyData d;
  d.corpus = crops("corpus", c.corpus_size);
  for (auto& p : crops("real-positives", c.real_positives)) d.real_positives.push_back({p.image, p.skeleton});
  // Negatives: the same kind of window without the person.
  for (auto& p : crops("train-negatives", c.train_negatives)) d.train_negatives.push_back(p.background);
  for (auto& p : crops("backgrounds", c.generated_positives)) d.backgrounds.push_back(p.background);
  for (auto& p : crops("test-negatives", c.test_negatives)) d.test_negatives.push_back(p.background);
  for (auto& p : crops("test-positives", c.test_positives)) d.test_positives.push_back(p.image);
  return d;
}

Models TrainedModels::view() const {
  Models m;
  m.poses = &poses;
  m.mask = &mask;
  m.vae = &vae;
  m.generator = &generator;
  m.placement = placement;
  m.sigma = sigma;
  return m;
}

pose::PoseModel fit_corpus_poses(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus) {
  std::vector<pose::Skeleton> sk;
  for (const auto& p : corpus) sk.push_back(p.skeleton);
  return pose::fit_pose_model(sk, c.pose);
}

mask::MaskEstimator train_corpus_mask(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus,
                                      std::uint64_t seed, bool verbose) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyDataset, "empty corpus");
  const int size = corpus.front().image.h();
  std::vector<mask::MaskSample> train, val;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    mask::MaskSample s{pose::render_heatmaps(corpus[i].skeleton, c.sigma), corpus[i].mask};
    (i % 10 == 9 ? val : train).push_back(std::move(s));
  }
  mask::MaskEstimator me(size, c.mask_width, derive_seed(seed, "mask-init"));
  mask::MaskTrainConfig tc;
  tc.epochs = c.mask_epochs;
  tc.seed = derive_seed(seed, "mask-train");
  tc.verbose = verbose;
  mask::train_mask_estimator(me, train, val, tc);
  return me;
}

std::vector<Tensor> masked_crops(const std::vector<synth::PersonCrop>& crops, const mask::MaskEstimator& me,
                                 double sigma) {
  std::vector<Tensor> out;
  for (const auto& p : crops) {
    const Tensor m = mask::estimate_mask(me, pose::render_heatmaps(p.skeleton, sigma));
    out.push_back(appearance::mask_background(p.image, m));
  }
  return out;
}

appearance::Vae train_corpus_vae(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus,
                                 const mask::MaskEstimator& me, std::uint64_t seed, bool verbose) {
  const std::vector<Tensor> all = masked_crops(corpus, me, c.sigma);
  std::vector<Tensor> train, val;
  for (std::size_t i = 0; i < all.size(); ++i) (i % 10 == 9 ? val : train).push_back(all[i]);
  appearance::Vae vae(appearance::VaeConfig{c.vae_width}, derive_seed(seed, "vae-init"));
  appearance::VaeTrainConfig tc;
  tc.epochs = c.vae_epochs;
  tc.lr = c.vae_lr;
  tc.seed = derive_seed(seed, "vae-train");
  tc.verbose = verbose;
  appearance::train_vae(vae, train, val, tc);
  return vae;
}

std::vector<gan::GanSample> gan_samples(const std::vector<synth::PersonCrop>& crops, const mask::MaskEstimator& me,
                                        double sigma) {
  std::vector<gan::GanSample> out;
  for (const auto& p : crops) {
    Tensor heat = pose::render_heatmaps(p.skeleton, sigma);
    Tensor m = mask::estimate_mask(me, heat);
    out.push_back({p.image, std::move(m), std::move(heat)});
  }
  return out;
}

TrainedModels pretrain(const ToyConfig& c, const std::vector<synth::PersonCrop>& corpus, std::uint64_t seed,
                       const Progress& progress) {
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  say("fitting pose model");
  pose::PoseModel poses = fit_corpus_poses(c, corpus);
  std::vector<pose::Skeleton> sk;
  for (const auto& p : corpus) sk.push_back(p.skeleton);
  const CanvasPlacement placement = fit_canvas_placement(sk);
  say("training mask estimator");
  mask::MaskEstimator me = train_corpus_mask(c, corpus, seed);
  say("training appearance encoder");
  appearance::Vae vae = train_corpus_vae(c, corpus, me, seed);
  say("training generator");
  gan::Generator g(c.generator, derive_seed(seed, "gen-init"));
  gan::Discriminator d(c.critic, gan::kCondChannels, derive_seed(seed, "dis-init"));
  gan::GanTrainConfig gc = c.gan;
  gc.seed = derive_seed(seed, "gan-train");
  gan::train_gan(g, d, vae, gan_samples(corpus, me, c.sigma), gc);
  return TrainedModels{std::move(poses), std::move(me), std::move(vae), std::move(g), std::move(d), placement, c.sigma};
}

eval::MetricsReport evaluate_classifier(const ToyConfig& c, const std::vector<Tensor>& pos,
                                        const std::vector<Tensor>& neg, const ToyData& data, std::uint64_t seed) {
  eval::Classifier model(derive_seed(seed, "classifier-init"));
  eval::ClassifierTrainConfig tc;
  tc.epochs = c.classifier_epochs;
  tc.seed = derive_seed(seed, "classifier-train");
  eval::train_classifier(model, pos, neg, tc);
  std::vector<Tensor> test = data.test_positives;
  test.insert(test.end(), data.test_negatives.begin(), data.test_negatives.end());
  const std::vector<double> scores = eval::score_images(model, test);
  std::vector<eval::ScoredSample> samples;
  for (std::size_t i = 0; i < scores.size(); ++i) samples.push_back({scores[i], i < data.test_positives.size()});
  return eval::make_report(samples);
}

std::vector<Tensor> composites(const std::vector<GeneratedPerson>& people) {
  std::vector<Tensor> out;
  for (const auto& p : people) out.push_back(p.composite);
  return out;
}

}  // namespace dummynet::pipeline

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

#include "dummynet/eval/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "dummynet/core/archive.hpp"
#include "dummynet/core/error.hpp"
#include "dummynet/core/rng.hpp"
#include "dummynet/nn/functional.hpp"
#include "dummynet/nn/optim.hpp"

namespace dummynet::eval {

Classifier::Classifier(std::uint64_t seed, std::array<int, 4> widths) : widths_(widths) {
  Rng rng(seed);
  net_ = std::make_unique<nn::Sequential>();
  int cin = 3;
  for (int w : widths) {
    net_->add<nn::Conv2d>(cin, w, 3, 2, 1, rng);
    net_->add<nn::LeakyRelu>(0.0);
    net_->add<nn::MaxPool2>();
    cin = w;
  }
  net_->add<nn::Linear>(cin, 1, rng);
  net_->register_parameters(params_, "cls");
}

Tensor Classifier::logits(const Tensor& images, nn::Tape* tape) const {
  if (images.c() != 3) throw Error(ErrorCode::ShapeMismatch, "classifier input " + images.shape().str());
  const Tensor y = net_->forward(images, tape);
  return y;
}

Tensor Classifier::predict(const Tensor& images) const { return nn::sigmoid(logits(images, nullptr)); }

void Classifier::backward(const Tensor& dlogits, nn::Tape& tape) { net_->backward(dlogits, tape); }

void Classifier::save(const std::filesystem::path& path) const {
  Archive ar(kClassifierTag);
  ar.meta()["widths"] = widths_;
  params_.save_to(ar);
  ar.save(path);
}

Classifier Classifier::load(const std::filesystem::path& path) {
  const Archive ar = Archive::load(path, kClassifierTag);
  Classifier c(0, ar.meta().at("widths").get<std::array<int, 4>>());
  c.params_.load_from(ar);
  return c;
}

std::size_t classifier_parameter_count(std::array<int, 4> widths, int in_channels) {
  std::size_t total = 0;
  int cin = in_channels;
  for (int w : widths) {
    total += static_cast<std::size_t>(cin) * w * 9 + w;
    cin = w;
  }
  return total + cin + 1;
}

std::vector<double> score_images(const Classifier& model, const std::vector<Tensor>& images) {
  std::vector<double> out;
  out.reserve(images.size());
  constexpr std::size_t kChunk = 64;
  for (std::size_t i = 0; i < images.size(); i += kChunk) {
    const std::size_t e = std::min(images.size(), i + kChunk);
    const Tensor p = model.predict(concat_batch(std::span<const Tensor>(images.data() + i, e - i)));
    for (std::size_t k = 0; k < p.size(); ++k) out.push_back(p[k]);
  }
  return out;
}

namespace {

struct Labeled {
  const Tensor* image;
  double label;
};

// Class-balanced mean BCE: each class carries half the weight.
double balanced_bce(const Tensor& logits, const std::vector<double>& labels, double w_pos, double w_neg,
                    Tensor* grad) {
  if (grad) *grad = Tensor(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double z = logits[i];
    const double t = labels[i];
    const double w = t > 0.5 ? w_pos : w_neg;
    total += w * (std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * t);
    if (grad) {
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      (*grad)[i] = w * (p - t);
    }
  }
  return total;
}

}  // namespace

ClassifierTrainResult train_classifier(Classifier& model, const std::vector<Tensor>& pos,
                                       const std::vector<Tensor>& neg, const ClassifierTrainConfig& cfg) {
  if (pos.empty() || neg.empty()) throw Error(ErrorCode::EmptyDataset, "classifier needs both classes");
  Rng rng(cfg.seed);
  std::vector<Labeled> train, val;
  for (const auto* set : {&pos, &neg}) {
    std::vector<std::size_t> idx(set->size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    const std::size_t n_val =
        set->size() > 1 ? std::max<std::size_t>(1, static_cast<std::size_t>(cfg.val_fraction * set->size())) : 0;
    const double label = set == &pos ? 1.0 : 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) (k < n_val ? val : train).push_back({&(*set)[idx[k]], label});
  }
  if (val.empty()) val = train;

  auto class_weights = [](const std::vector<Labeled>& v, std::size_t begin, std::size_t end) {
    double np = 0, nn = 0;
    for (std::size_t i = begin; i < end; ++i) (v[i].label > 0.5 ? np : nn) += 1;
    const double wp = np > 0 ? 0.5 / np : 0.0;
    const double wn = nn > 0 ? 0.5 / nn : 0.0;
    return std::pair{wp, wn};
  };
  // Per-sample weights keep the two classes balanced over the whole epoch.
  const auto [ep_wp, ep_wn] = class_weights(train, 0, train.size());

  auto evaluate = [&](double& error, double& loss) {
    std::vector<Tensor> imgs;
    std::vector<double> labels;
    for (const auto& s : val) {
      imgs.push_back(*s.image);
      labels.push_back(s.label);
    }
    const std::vector<double> scores = score_images(model, imgs);
    const auto [wp, wn] = class_weights(val, 0, val.size());
    error = 0.0;
    loss = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double w = labels[i] > 0.5 ? wp : wn;
      if ((scores[i] > 0.5) != (labels[i] > 0.5)) error += w;
      const double p = std::clamp(scores[i], 1e-12, 1.0 - 1e-12);
      loss -= w * (labels[i] > 0.5 ? std::log(p) : std::log(1.0 - p));
    }
  };

  nn::Sgd opt(model.parameters(), {cfg.lr, cfg.momentum, 0.0});
  std::vector<Tensor> best_values;
  ClassifierTrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng.engine());
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < train.size(); b += cfg.batch) {
      const std::size_t e = std::min(train.size(), b + cfg.batch);
      std::vector<Tensor> imgs;
      std::vector<double> labels;
      for (std::size_t i = b; i < e; ++i) {
        imgs.push_back(*train[i].image);
        labels.push_back(train[i].label);
      }
      nn::Tape tape;
      const Tensor z = model.logits(concat_batch(imgs), &tape);
      Tensor grad;
      // Scale so a full epoch sums to the balanced mean, then to batch size.
      const double scale = static_cast<double>(train.size()) / (e - b);
      epoch_loss += balanced_bce(z, labels, ep_wp, ep_wn, &grad);
      scale_inplace(grad, scale);
      model.parameters().zero_grad();
      model.backward(grad, tape);
      opt.step();
    }
    result.train_loss.push_back(epoch_loss);
    double err, loss;
    evaluate(err, loss);
    if (!std::isfinite(epoch_loss)) throw Error(ErrorCode::NonFiniteLoss, "classifier loss diverged");
    if (err < result.best_val_error || (err == result.best_val_error && loss < best_loss) || result.best_epoch < 0) {
      result.best_epoch = epoch;
      result.best_val_error = err;
      result.best_val_loss = loss;
      best_loss = loss;
      best_values.clear();
      for (const auto& [name, p] : model.parameters().entries()) best_values.push_back(p->value);
    }
    if (cfg.verbose)
      std::cerr << "classifier epoch " << epoch << " loss " << epoch_loss << " val_err " << err << " val_loss "
                << loss << "\n";
  }
  const auto& entries = model.parameters().entries();
  for (std::size_t k = 0; k < entries.size(); ++k) entries[k].second->value = best_values[k];
  return result;
}

}  // namespace dummynet::eval

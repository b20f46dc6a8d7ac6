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

#include "dummynet/gan/discriminator.hpp"

#include <algorithm>

#include "dummynet/core/archive.hpp"
#include "dummynet/core/error.hpp"

namespace dummynet::gan {

Discriminator::Discriminator(DiscriminatorConfig config, int cond_channels, std::uint64_t seed)
    : config_(config), cond_channels_(cond_channels) {
  if (config.blocks < 1 || config.width < 1) throw Error(ErrorCode::ConfigError, "invalid discriminator configuration");
  Rng rng(seed);
  net_ = std::make_unique<nn::Sequential>();
  int in = 3 + cond_channels;
  for (int b = 0; b < config.blocks; ++b) {
    const int out = config.width * std::min(1 << b, 8);
    net_->add<nn::Conv2d>(in, out, 4, 2, 1, rng);
    if (b > 0) net_->add<nn::InstanceNorm>(out, false);
    net_->add<nn::LeakyRelu>(0.2);
    net_->tap();
    in = out;
  }
  net_->add<nn::Conv2d>(in, 1, 3, 1, 1, rng, true, 1.0);
  net_->register_parameters(params_, "net.");
}

Tensor Discriminator::input(const Tensor& image, const Tensor& cond) const {
  if (image.c() != 3 || cond.c() != cond_channels_ || cond.n() != image.n() || cond.h() != image.h() ||
      cond.w() != image.w())
    throw Error(ErrorCode::ShapeMismatch, "critic input " + image.shape().str() + " with conditioning " +
                                              cond.shape().str());
  if (image.h() >> config_.blocks < 1 || image.w() >> config_.blocks < 1)
    throw Error(ErrorCode::ShapeMismatch, "critic input too small for " + std::to_string(config_.blocks) + " blocks");
  const Tensor parts[2] = {image, cond};
  return concat_channels(parts);
}

Tensor Discriminator::forward(const Tensor& image, const Tensor& cond, nn::Tape* tape) const {
  return net_->forward(input(image, cond), tape);
}

Tensor Discriminator::backward(const Tensor& dscores, nn::Tape& tape) {
  return slice_channels(net_->backward(dscores, tape), 0, 3);
}

CriticOutput Discriminator::criticize(const Tensor& image, const Tensor& cond, nn::Tape* tape) const {
  CriticOutput out;
  out.patch_scores = net_->forward_taps(input(image, cond), tape, out.features);
  return out;
}

Tensor Discriminator::backward_taps(const Tensor& dscores, const std::vector<Tensor>& dfeatures, nn::Tape& tape) {
  return slice_channels(net_->backward_taps(dscores, dfeatures, tape), 0, 3);
}

void Discriminator::save(const std::filesystem::path& path) const {
  Archive ar(kDiscriminatorTag);
  ar.meta()["blocks"] = config_.blocks;
  ar.meta()["width"] = config_.width;
  ar.meta()["cond_channels"] = cond_channels_;
  params_.save_to(ar);
  ar.save(path);
}

Discriminator Discriminator::load(const std::filesystem::path& path) {
  const Archive ar = Archive::load(path, kDiscriminatorTag);
  Discriminator d(DiscriminatorConfig{ar.meta().at("blocks").get<int>(), ar.meta().at("width").get<int>()},
                  ar.meta().at("cond_channels").get<int>(), 0);
  d.params_.load_from(ar);
  return d;
}

}  // namespace dummynet::gan

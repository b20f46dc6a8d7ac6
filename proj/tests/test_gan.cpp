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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "dummynet/core/error.hpp"
#include "dummynet/gan/discriminator.hpp"
#include "dummynet/gan/generator.hpp"
#include "dummynet/gan/losses.hpp"
#include "dummynet/gan/trainer.hpp"
#include "dummynet/nn/functional.hpp"

using namespace dummynet;
using namespace dummynet::gan;

namespace {

Tensor rand_tensor(Shape s, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Tensor t(s);
  for (double& v : t.vec()) v = rng.uniform(lo, hi);
  return t;
}

Conditioning random_conditioning(int n, int n_blocks, Rng& rng) {
  const int s = 16 << n_blocks;
  return build_conditioning(rand_tensor({n, 3, s, s}, rng), rand_tensor({n, 1, s, s}, rng),
                            rand_tensor({n, 17, s, s}, rng), n_blocks);
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1e-4, std::abs(a), std::abs(b)}); }

// Critic value = constant, independent of the image.
class ConstantCritic : public Critic {
 public:
  explicit ConstantCritic(double c) : c_(c) {}
  Tensor forward(const Tensor& image, const Tensor&, nn::Tape* tape) const override {
    if (tape) tape->push_shape(image.shape());
    return Tensor(image.n(), 1, 1, 1, c_);
  }
  Tensor backward(const Tensor&, nn::Tape& tape) override { return Tensor(tape.pop_shape()); }
  nn::ParameterSet& parameters() override { return params_; }

 private:
  double c_;
  nn::ParameterSet params_;
};

// Critic value = sum of all image values.
class SumCritic : public Critic {
 public:
  Tensor forward(const Tensor& image, const Tensor&, nn::Tape* tape) const override {
    if (tape) tape->push_shape(image.shape());
    Tensor s(image.n(), 1, 1, 1);
    const std::size_t per = image.shape().sample_size();
    for (int n = 0; n < image.n(); ++n)
      for (std::size_t i = n * per; i < (n + 1) * per; ++i) s[n] += image[i];
    return s;
  }
  Tensor backward(const Tensor& d, nn::Tape& tape) override {
    Tensor g(tape.pop_shape());
    const std::size_t per = g.shape().sample_size();
    for (int n = 0; n < g.n(); ++n)
      for (std::size_t i = n * per; i < (n + 1) * per; ++i) g[i] = d[n];
    return g;
  }
  nn::ParameterSet& parameters() override { return params_; }

 private:
  nn::ParameterSet params_;
};

}  // namespace

// ------------------------------------------------------------------ generator

TEST_CASE("generator output size follows s = 16 * 2^n") {
  Rng rng(1);
  for (int n = 1; n <= 4; ++n) {
    GeneratorConfig cfg;
    cfg.n_blocks = n;
    cfg.base_width = n == 4 ? 2 : 8;
    cfg.hidden = n == 4 ? 2 : 4;
    Generator g(cfg, 3);
    const Tensor z = rand_tensor({2, 16, 1, 1}, rng, -1, 1);
    const Tensor out = g.generate(z, random_conditioning(2, n, rng));
    CHECK(out.shape() == Shape{2, 3, 16 << n, 16 << n});
    if (n == 2) CHECK(out.h() == 64);
    if (n == 4) CHECK(out.h() == 256);
  }
}

TEST_CASE("generator output range and determinism") {
  Rng rng(2);
  GeneratorConfig cfg;
  cfg.base_width = 8;
  cfg.hidden = 4;
  Generator g(cfg, 5);
  const Tensor z = rand_tensor({3, 16, 1, 1}, rng, -30, 30);
  const Conditioning c = random_conditioning(3, 2, rng);
  const Tensor a = g.generate(z, c);
  for (double v : a.vec()) CHECK((v >= 0.0 && v <= 1.0));
  CHECK(max_abs_diff(a, g.generate(z, c)) == 0.0);
  // Each stage's output size, with and without fade-in.
  for (int stage = 0; stage <= 2; ++stage)
    for (double alpha : {0.25, 1.0}) CHECK(g.forward(z, c, stage, alpha, nullptr).h() == (16 << stage));
}

TEST_CASE("conditioning masks the background and builds a pyramid") {
  Rng rng(3);
  const Tensor bg = rand_tensor({1, 3, 64, 64}, rng);
  const Tensor hm = rand_tensor({1, 17, 64, 64}, rng);
  const Conditioning ones = build_conditioning(bg, Tensor(1, 1, 64, 64, 1.0), hm, 2);
  CHECK(max_abs(slice_channels(ones.levels[2], 0, 3)) == 0.0);
  const Conditioning zeros = build_conditioning(bg, Tensor(1, 1, 64, 64, 0.0), hm, 2);
  CHECK(max_abs_diff(slice_channels(zeros.levels[2], 0, 3), bg) == 0.0);
  CHECK(max_abs_diff(slice_channels(zeros.levels[2], 3, 17), hm) == 0.0);
  REQUIRE(zeros.levels.size() == 3u);
  for (int k = 0; k < 3; ++k) {
    CHECK(zeros.levels[k].c() == 20);
    CHECK(zeros.levels[k].h() == (16 << k));
    CHECK(nn::upsample_bilinear(zeros.levels[k], 64 / (16 << k)).c() == 20);
  }
  // Soft mask: exactly bg * (1 - m) before downsampling.
  const Tensor m = rand_tensor({1, 1, 64, 64}, rng);
  const Conditioning soft = build_conditioning(bg, m, hm, 2);
  CHECK(soft.levels[2](0, 1, 10, 20) == bg(0, 1, 10, 20) * (1.0 - m(0, 0, 10, 20)));
  CHECK_THROWS_AS(build_conditioning(bg, m, hm, 1), Error);
}

TEST_CASE("generator rejects mismatched conditioning") {
  Rng rng(4);
  GeneratorConfig cfg;
  cfg.base_width = 4;
  cfg.hidden = 2;
  Generator g(cfg, 1);
  const Tensor z = rand_tensor({1, 16, 1, 1}, rng);
  CHECK_THROWS_AS(g.generate(z, random_conditioning(1, 1, rng)), Error);
  CHECK_THROWS_AS(g.generate(z, random_conditioning(2, 2, rng)), Error);
  CHECK_THROWS_AS(g.generate(Tensor(1, 8, 1, 1), random_conditioning(1, 2, rng)), Error);
}

TEST_CASE("generator parameter count is a function of the configuration") {
  GeneratorConfig cfg;  // n = 2, N = 32, hidden 16
  Generator g(cfg, 1);
  CHECK(g.parameters().scalar_count() == 97001u);
  CHECK(generator_parameter_count(cfg) == 97001u);
  for (int n = 1; n <= 3; ++n)
    for (int w : {4, 8}) {
      GeneratorConfig c;
      c.n_blocks = n;
      c.base_width = w;
      c.hidden = 3;
      CHECK(Generator(c, 2).parameters().scalar_count() == generator_parameter_count(c));
      CHECK(Generator(c, 9).parameters().scalar_count() == generator_parameter_count(c));
    }
}

TEST_CASE("generator backward matches finite differences, with fade-in") {
  Rng rng(5);
  GeneratorConfig cfg;
  cfg.n_blocks = 1;
  cfg.base_width = 3;
  cfg.hidden = 2;
  Generator g(cfg, 7);
  const Tensor z = rand_tensor({2, 16, 1, 1}, rng, -1, 1);
  const Conditioning c = random_conditioning(2, 1, rng);
  for (double alpha : {0.4, 1.0}) {
    const Tensor r = rand_tensor({2, 3, 32, 32}, rng, -1, 1);
    nn::Tape tape;
    g.forward(z, c, 1, alpha, &tape);
    g.parameters().zero_grad();
    g.backward(r, 1, alpha, tape);
    CHECK(tape.empty());
    auto f = [&]() {
      const Tensor y = g.forward(z, c, 1, alpha, nullptr);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
      return s;
    };
    double num = 0.0, den = 0.0;
    for (auto& [name, p] : g.parameters().entries())
      for (std::size_t i = 0; i < p->value.size(); i += 7) {
        const double old = p->value[i];
        p->value[i] = old + 1e-5;
        const double fp = f();
        p->value[i] = old - 1e-5;
        const double fm = f();
        p->value[i] = old;
        const double fd = (fp - fm) / 2e-5;
        num += (p->grad[i] - fd) * (p->grad[i] - fd);
        den += fd * fd;
      }
    CHECK(std::sqrt(num / den) < 1e-5);
  }
}

TEST_CASE("every heatmap channel reaches the output") {
  Rng rng(6);
  GeneratorConfig cfg;
  cfg.base_width = 8;
  cfg.hidden = 4;
  Generator g(cfg, 8);
  const Tensor z = rand_tensor({1, 16, 1, 1}, rng);
  const Conditioning c = random_conditioning(1, 2, rng);
  const Tensor base = g.generate(z, c);
  for (int k = 0; k < 17; ++k) {
    Conditioning d = c;
    for (Tensor& level : d.levels)
      for (int y = 0; y < level.h(); ++y)
        for (int x = 0; x < level.w(); ++x) level(0, 3 + k, y, x) = 0.0;
    CHECK(mean_abs_diff(g.generate(z, d), base) > 0.0);
  }
}

TEST_CASE("generator checkpoint round trip") {
  const auto path = std::filesystem::temp_directory_path() / "dummynet_gen_test.bin";
  GeneratorConfig cfg;
  cfg.base_width = 4;
  cfg.hidden = 2;
  Generator g(cfg, 3);
  g.save(path);
  const Generator back = Generator::load(path);
  Rng rng(1);
  const Tensor z = rand_tensor({1, 16, 1, 1}, rng);
  const Conditioning c = random_conditioning(1, 2, rng);
  CHECK(max_abs_diff(g.generate(z, c), back.generate(z, c)) == 0.0);
  CHECK(Archive::peek_tag(path) == kGeneratorTag);
  std::filesystem::remove(path);
}

// -------------------------------------------------------------- critic

TEST_CASE("critic patch map and feature taps") {
  Rng rng(7);
  Discriminator d(DiscriminatorConfig{}, kCondChannels, 2);
  const Tensor img = rand_tensor({2, 3, 64, 64}, rng);
  const Tensor cond = rand_tensor({2, 20, 64, 64}, rng);
  const CriticOutput out = d.criticize(img, cond, nullptr);
  CHECK(out.patch_scores.shape() == Shape{2, 1, 4, 4});
  REQUIRE(out.features.size() == 4u);
  for (int i = 0; i < 4; ++i) CHECK(out.features[i].h() == (32 >> i));
  CHECK(max_abs_diff(out.patch_scores, d.forward(img, cond, nullptr)) == 0.0);
  for (const Tensor& f : out.features) CHECK(all_finite(f));
  // Unbounded output: the final bias shifts scores one for one.
  auto& entries = d.parameters().entries();
  nn::Parameter& final_bias = *entries.back().second;
  final_bias.value[0] += 5.0;
  CHECK(max_abs_diff(d.forward(img, cond, nullptr), [&] {
          Tensor t = out.patch_scores;
          for (double& v : t.vec()) v += 5.0;
          return t;
        }()) < 1e-12);
  CHECK_THROWS_AS(d.forward(img, rand_tensor({2, 20, 32, 32}, rng), nullptr), Error);
}

TEST_CASE("critic backward through scores and taps matches finite differences") {
  Rng rng(8);
  Discriminator d(DiscriminatorConfig{2, 3}, 2, 4);
  Tensor img = rand_tensor({1, 3, 8, 8}, rng);
  const Tensor cond = rand_tensor({1, 2, 8, 8}, rng);
  nn::Tape tape;
  const CriticOutput out = d.criticize(img, cond, &tape);
  const Tensor rs = rand_tensor(out.patch_scores.shape(), rng, -1, 1);
  std::vector<Tensor> rf;
  for (const Tensor& f : out.features) rf.push_back(rand_tensor(f.shape(), rng, -1, 1));
  d.parameters().zero_grad();
  const Tensor gx = d.backward_taps(rs, rf, tape);
  auto f = [&]() {
    const CriticOutput o = d.criticize(img, cond, nullptr);
    double s = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i) s += rs[i] * o.patch_scores[i];
    for (std::size_t l = 0; l < rf.size(); ++l)
      for (std::size_t i = 0; i < rf[l].size(); ++i) s += rf[l][i] * o.features[l][i];
    return s;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double old = img[i];
    img[i] = old + 1e-5;
    const double fp = f();
    img[i] = old - 1e-5;
    const double fm = f();
    img[i] = old;
    worst = std::max(worst, rel(gx[i], (fp - fm) / 2e-5));
  }
  CHECK(worst < 1e-5);
}

// ---------------------------------------------------------- WGAN-GP

TEST_CASE("gradient penalty closed forms") {
  Rng rng(9);
  const Tensor real = rand_tensor({3, 3, 8, 8}, rng);
  const Tensor fake = rand_tensor({3, 3, 8, 8}, rng);
  const Tensor cond(3, 1, 8, 8);
  ConstantCritic constant(0.7);
  for (double w : {1.0, 10.0, 2.5}) {
    const WganTerms t = wgan_gp_loss(constant, real, fake, cond, w, rng);
    CHECK(t.penalty == w);
    CHECK(t.generator_loss == doctest::Approx(-0.7).epsilon(1e-14));
    const WganTerms same = wgan_gp_loss(constant, real, real, cond, w, rng);
    CHECK(same.critic_loss == same.penalty);
  }
  SumCritic sum;
  const double dims = 3 * 8 * 8;
  const double expect = 10.0 * (std::sqrt(dims) - 1.0) * (std::sqrt(dims) - 1.0);
  const PenaltyResult p = gradient_penalty(sum, interpolate(real, fake, rng), cond, 10.0, false);
  CHECK(std::abs(p.penalty - expect) <= 1e-6 * expect);
  for (double g : p.grad_norms) CHECK(std::abs(g - std::sqrt(dims)) <= 1e-12);
}

TEST_CASE("critic input gradient and penalty parameter gradient match finite differences on 8x8") {
  Rng rng(10);
  Discriminator d(DiscriminatorConfig{2, 4}, 2, 11);
  Tensor x = rand_tensor({2, 3, 8, 8}, rng);
  const Tensor cond = rand_tensor({2, 2, 8, 8}, rng);

  // Input gradient of the per-sample critic value.
  nn::Tape tape(false);
  const Tensor s = d.forward(x, cond, &tape);
  Tensor ds(s.shape(), 1.0 / s.shape().sample_size());
  const Tensor gx = d.backward(ds, tape);
  auto crit = [&]() { return critic_mean(d.forward(x, cond, nullptr)) * x.n(); };
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double old = x[i];
    x[i] = old + 1e-6;
    const double fp = crit();
    x[i] = old - 1e-6;
    const double fm = crit();
    x[i] = old;
    const double fd = (fp - fm) / 2e-6;
    num += (gx[i] - fd) * (gx[i] - fd);
    den += fd * fd;
  }
  CHECK(std::sqrt(num / den) <= 1e-3);

  // Parameter gradient of the penalty.
  auto& params = d.parameters();
  params.zero_grad();
  const double gp_weight = 10.0;
  gradient_penalty(d, x, cond, gp_weight, true);
  auto pen = [&]() { return gradient_penalty(d, x, cond, gp_weight, false).penalty; };
  num = den = 0.0;
  for (auto& [name, p] : params.entries())
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double old = p->value[i];
      p->value[i] = old + 1e-6;
      const double fp = pen();
      p->value[i] = old - 1e-6;
      const double fm = pen();
      p->value[i] = old;
      const double fd = (fp - fm) / 2e-6;
      num += (p->grad[i] - fd) * (p->grad[i] - fd);
      den += fd * fd;
    }
  MESSAGE("penalty parameter gradient relative error " << std::sqrt(num / den));
  CHECK(den > 0.0);
  CHECK(std::sqrt(num / den) <= 1e-3);
}

// --------------------------------------------------- reconstruction losses

TEST_CASE("masked feature loss with the identity extractor") {
  Rng rng(11);
  IdentityFeatures id;
  const Tensor a = rand_tensor({2, 3, 16, 16}, rng);
  const Tensor b = rand_tensor({2, 3, 16, 16}, rng);
  CHECK(masked_feature_loss(id, Tensor(2, 1, 16, 16, 1.0), a, a) == 0.0);
  CHECK(masked_feature_loss(id, Tensor(2, 1, 16, 16, 1.0), a, b) == doctest::Approx(mean_abs_diff(a, b)).epsilon(1e-14));
  Tensor left(2, 1, 16, 16);
  Tensor c = a;
  for (int n = 0; n < 2; ++n)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        if (x < 8) left(n, 0, y, x) = 1.0;
        else
          for (int ch = 0; ch < 3; ++ch) c(n, ch, y, x) = b(n, ch, y, x);
      }
  CHECK(masked_feature_loss(id, left, a, c) == 0.0);
  PerceptualPyramid vgg;
  CHECK(masked_feature_loss(vgg, left, a, a) == 0.0);
  CHECK(masked_feature_loss(vgg, left, a, b) > 0.0);
}

TEST_CASE("feature and appearance loss gradients match finite differences") {
  Rng rng(12);
  const Tensor mask = rand_tensor({1, 1, 16, 16}, rng);
  const Tensor real = rand_tensor({1, 3, 16, 16}, rng);
  Tensor gen = rand_tensor({1, 3, 16, 16}, rng);
  PerceptualPyramid vgg;
  Discriminator d(DiscriminatorConfig{2, 3}, 2, 3);
  const Tensor cond = rand_tensor({1, 2, 16, 16}, rng);
  CriticFeatures cf(d, cond);
  appearance::Vae vae(appearance::VaeConfig{2}, 4);
  struct Case {
    const char* name;
    std::function<double(Tensor*)> loss;
  };
  const std::vector<Case> cases = {
      {"perceptual", [&](Tensor* g) { return masked_feature_loss(vgg, mask, real, gen, g); }},
      {"critic", [&](Tensor* g) { return masked_feature_loss(cf, mask, real, gen, g); }},
      {"appearance", [&](Tensor* g) { return appearance_loss(vae, mask, real, gen, g); }},
  };
  for (const auto& c : cases) {
    Tensor grad;
    c.loss(&grad);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gen.size(); i += 3) {
      const double old = gen[i];
      gen[i] = old + 1e-7;
      const double fp = c.loss(nullptr);
      gen[i] = old - 1e-7;
      const double fm = c.loss(nullptr);
      gen[i] = old;
      const double fd = (fp - fm) / 2e-7;
      num += (grad[i] - fd) * (grad[i] - fd);
      den += fd * fd;
    }
    INFO(c.name);
    CHECK(den > 0.0);
    CHECK(std::sqrt(num / den) <= 1e-3);
  }
}

TEST_CASE("appearance loss identities") {
  Rng rng(13);
  appearance::Vae vae(appearance::VaeConfig{4}, 5);
  const Tensor a = rand_tensor({2, 3, 64, 64}, rng);
  const Tensor b = rand_tensor({2, 3, 64, 64}, rng);
  const Tensor m = rand_tensor({2, 1, 64, 64}, rng);
  CHECK(appearance_loss(vae, m, a, a) == 0.0);
  CHECK(appearance_loss(vae, Tensor(2, 1, 64, 64), a, b) == 0.0);
  const double ab = appearance_loss(vae, m, a, b);
  CHECK(ab > 0.0);
  CHECK(ab == appearance_loss(vae, m, b, a));
}

TEST_CASE("total loss is the weighted sum") {
  LossWeights w;
  const LossComponents c{1.5, 0.25, 0.5, 2.0};
  CHECK(total_loss(LossWeights{1, 0, 0, 0, 10}, c) == 1.5);
  CHECK(total_loss(w, LossComponents{}) == 0.0);
  CHECK(total_loss(w, c) == 1.5 + 10 * 0.25 + 10 * 0.5 + 2.0);
  CHECK(total_loss(LossWeights{2, 20, 20, 2, 10}, c) == 2 * total_loss(w, c));
  CHECK_THROWS_AS(total_loss(w, LossComponents{NAN, 0, 0, 0}), Error);
  CHECK_THROWS_AS((LossWeights{0, 1, 1, 1, 10}.validate()), Error);
  CHECK_THROWS_AS((LossWeights{1, -1, 1, 1, 10}.validate()), Error);
  CHECK_NOTHROW(w.validate());
}

TEST_CASE("loss log writes the documented columns") {
  const auto path = std::filesystem::temp_directory_path() / "dummynet_losslog.csv";
  {
    LossLog log(path);
    log.append(3, 1.0, -2.0, 0.5, LossComponents{1, 2, 3, 4}, 10.0);
  }
  std::ifstream f(path);
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header == "step,critic_loss,gen_loss,gp,rec_dis,rec_vgg,app,total");
  CHECK(row == "3,1,-2,0.5,2,3,4,10");
  std::filesystem::remove(path);
}

// ------------------------------------------------------------- training

TEST_CASE("progressive schedule covers every stage with a fade-in") {
  GanTrainConfig c;
  c.stage_steps = 10;
  c.final_steps = 20;
  c.fade_steps = 4;
  CHECK(total_steps(c, 2) == 40);
  CHECK(stage_schedule(c, 2, 0).stage == 0);
  CHECK(stage_schedule(c, 2, 0).alpha == 1.0);
  CHECK(stage_schedule(c, 2, 9).stage == 0);
  const StageAlpha s = stage_schedule(c, 2, 10);
  CHECK(s.stage == 1);
  CHECK(s.alpha == doctest::Approx(0.2));
  CHECK(stage_schedule(c, 2, 13).alpha == doctest::Approx(0.8));
  CHECK(stage_schedule(c, 2, 14).alpha == 1.0);
  CHECK(stage_schedule(c, 2, 20).stage == 2);
  CHECK(stage_schedule(c, 2, 39).stage == 2);
  CHECK(stage_schedule(c, 2, 39).alpha == 1.0);
  double prev = 0.0;
  for (long k = 10; k < 14; ++k) {
    CHECK(stage_schedule(c, 2, k).alpha > prev);
    prev = stage_schedule(c, 2, k).alpha;
  }
}

TEST_CASE("short adversarial training run is deterministic and logged") {
  Rng rng(20);
  std::vector<GanSample> data;
  for (int i = 0; i < 6; ++i)
    data.push_back({rand_tensor({1, 3, 32, 32}, rng), rand_tensor({1, 1, 32, 32}, rng), rand_tensor({1, 17, 32, 32}, rng)});
  GeneratorConfig gc;
  gc.n_blocks = 1;
  gc.base_width = 4;
  gc.hidden = 2;
  GanTrainConfig tc;
  tc.stage_steps = 2;
  tc.final_steps = 3;
  tc.fade_steps = 1;
  tc.batch = 3;
  tc.seed = 4;
  const auto log = std::filesystem::temp_directory_path() / "dummynet_gan_log.csv";
  tc.log_path = log;
  auto run = [&](Generator& g) {
    Discriminator d(DiscriminatorConfig{2, 4}, kCondChannels, 2);
    appearance::Vae vae(appearance::VaeConfig{2}, 3);
    return train_gan(g, d, vae, data, tc);
  };
  Generator a(gc, 1), b(gc, 1);
  const Generator untouched(gc, 1);
  const GanTrainResult ra = run(a);
  run(b);
  CHECK(ra.steps == 5);
  CHECK(std::isfinite(ra.last_critic_loss));
  CHECK(std::isfinite(ra.last_generator_loss));
  const Tensor z = rand_tensor({1, 16, 1, 1}, rng);
  const Conditioning c = random_conditioning(1, 1, rng);
  CHECK(max_abs_diff(a.generate(z, c), b.generate(z, c)) == 0.0);
  CHECK(max_abs_diff(a.generate(z, c), untouched.generate(z, c)) > 0.0);
  std::ifstream f(log);
  std::string line;
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 6);
  std::filesystem::remove(log);

  std::vector<GanSample> wrong = data;
  wrong[0].heatmaps = Tensor(1, 17, 16, 16);
  Discriminator d(DiscriminatorConfig{2, 4}, kCondChannels, 2);
  appearance::Vae vae(appearance::VaeConfig{2}, 3);
  CHECK_THROWS_AS(train_gan(a, d, vae, wrong, tc), Error);
  CHECK_THROWS_AS(train_gan(a, d, vae, {}, tc), Error);
}

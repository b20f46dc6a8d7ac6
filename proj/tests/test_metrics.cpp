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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "dummynet/core/error.hpp"
#include "dummynet/core/rng.hpp"
#include "dummynet/eval/metrics.hpp"

using namespace dummynet;
using namespace dummynet::eval;

namespace {

std::vector<ScoredSample> random_fixture(Rng& rng, int n = 200) {
  std::vector<ScoredSample> s(n);
  for (auto& x : s) {
    x.positive = rng.bernoulli(0.4);
    // Coarse grid to force ties.
    x.score = std::round((rng.uniform() * 0.6 + (x.positive ? 0.35 : 0.0)) * 40) / 40;
  }
  s[0].positive = true;
  s[1].positive = false;
  return s;
}

// Sweep every distinct score (and -inf) as a threshold.
double oracle_mr(const std::vector<ScoredSample>& s, double fpr) {
  std::set<double> cand{-std::numeric_limits<double>::infinity()};
  double n_neg = 0, n_pos = 0;
  for (const auto& x : s) {
    cand.insert(x.score);
    (x.positive ? n_pos : n_neg) += 1;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double t : cand) {
    double fp = 0;
    for (const auto& x : s)
      if (!x.positive && x.score > t) fp += 1;
    if (fp / n_neg <= fpr + 1e-12) best = std::min(best, t);
  }
  double missed = 0;
  for (const auto& x : s)
    if (x.positive && x.score <= best) missed += 1;
  return missed / n_pos;
}

struct DetFixture {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  int n_images = 10;
};

DetFixture random_detections(Rng& rng) {
  DetFixture f;
  for (int i = 0; i < f.n_images; ++i) {
    const std::string id = "im" + std::to_string(i);
    const int n_gt = rng.uniform_int(0, 3);
    for (int g = 0; g < n_gt; ++g) {
      const place::Box b{rng.uniform(0, 80), rng.uniform(0, 40), rng.uniform(10, 20), rng.uniform(20, 40)};
      f.gts.push_back({id, b});
      if (rng.bernoulli(0.8)) {
        const double j = rng.uniform(-4, 4);
        f.dets.push_back({id, {b.x + j, b.y + j, b.w, b.h}, std::round(rng.uniform() * 20) / 20});
      }
    }
    for (int k = rng.uniform_int(0, 3); k > 0; --k)
      f.dets.push_back({id, {rng.uniform(0, 80), rng.uniform(0, 40), 15, 30}, std::round(rng.uniform() * 20) / 20});
  }
  if (f.gts.empty()) f.gts.push_back({"im0", {0, 0, 10, 20}});
  return f;
}

// Re-matches from scratch at every threshold.
double oracle_lamr(const DetFixture& f) {
  std::set<double, std::greater<>> scores;
  for (const auto& d : f.dets) scores.insert(d.score);
  std::vector<std::pair<double, double>> pts{{0.0, 1.0}};
  for (double t : scores) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < f.dets.size(); ++i)
      if (f.dets[i].score >= t) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return f.dets[a].score > f.dets[b].score; });
    std::vector<bool> used(f.gts.size(), false);
    double tp = 0, fp = 0;
    for (auto i : idx) {
      int best = -1;
      double bi = 0.5;
      for (std::size_t g = 0; g < f.gts.size(); ++g) {
        if (used[g] || f.gts[g].image_id != f.dets[i].image_id) continue;
        const double v = place::iou(f.dets[i].box, f.gts[g].box);
        if (v >= bi) {
          bi = v;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) {
        used[best] = true;
        tp += 1;
      } else {
        fp += 1;
      }
    }
    pts.emplace_back(fp / f.n_images, 1.0 - tp / f.gts.size());
  }
  double acc = 0;
  int zeros = 0;
  for (int i = 0; i < 9; ++i) {
    const double ref = std::pow(10.0, -2.0 + 2.0 * i / 8.0);
    double mr = 1.0;
    for (const auto& [fppi, m] : pts)
      if (fppi <= ref) mr = std::min(mr, m);
    zeros += mr == 0.0 ? 1 : 0;
    acc += std::log(std::max(1e-10, mr));
  }
  return zeros == 9 ? 0.0 : std::exp(acc / 9);
}

}  // namespace

TEST_CASE("miss rate on separable and tied scores") {
  const std::vector<ScoredSample> sep{{0.9, true}, {0.8, true}, {0.1, false}, {0.2, false}};
  CHECK(miss_rate_at_fpr(sep, 0.10) == 0.0);
  std::vector<ScoredSample> tied;
  for (int i = 0; i < 10; ++i) tied.push_back({0.5, i % 2 == 0});
  for (double f : {0.01, 0.1, 0.5, 0.99}) CHECK(miss_rate_at_fpr(tied, f) == 1.0);
  CHECK_THROWS_AS(miss_rate_at_fpr({{0.3, true}}, 0.1), Error);
}

TEST_CASE("miss rate matches an exhaustive threshold sweep on random fixtures") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto s = random_fixture(rng);
    double prev = 2.0;
    for (double fpr : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 0.9}) {
      const double mr = miss_rate_at_fpr(s, fpr);
      REQUIRE(mr == oracle_mr(s, fpr));
      REQUIRE(mr <= prev);  // non-increasing in fpr
      prev = mr;
    }
  }
}

TEST_CASE("roc sweep is monotone and ends at the all-positive point") {
  Rng rng(1);
  const auto s = random_fixture(rng);
  const auto roc = roc_sweep(s);
  CHECK(roc.front().fpr == 0.0);
  CHECK(roc.front().tpr == 0.0);
  CHECK(roc.back().fpr == 1.0);
  CHECK(roc.back().tpr == 1.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].fpr >= roc[i - 1].fpr);
    CHECK(roc[i].threshold < roc[i - 1].threshold);
  }
}

TEST_CASE("lamr boundary cases") {
  std::vector<GroundTruth> gts{{"a", {0, 0, 10, 20}}, {"b", {5, 5, 10, 20}}};
  std::vector<Detection> perfect{{"a", {0, 0, 10, 20}, 1.0}, {"b", {5, 5, 10, 20}, 1.0}};
  CHECK(lamr(perfect, gts, 2) == 0.0);
  CHECK(lamr({}, gts, 2) == 1.0);
  CHECK_THROWS_AS(lamr(perfect, {}, 2), Error);
}

TEST_CASE("lamr matches brute-force re-evaluation and ignores monotone rescaling") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 1000);
    DetFixture f = random_detections(rng);
    const double v = lamr(f.dets, f.gts, f.n_images);
    REQUIRE(v == oracle_lamr(f));
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    DetFixture g = f;
    for (auto& d : g.dets) d.score = 0.1 + 0.5 * d.score * d.score * d.score;
    REQUIRE(lamr(g.dets, g.gts, g.n_images) == v);
  }
}

TEST_CASE("reports and detections round-trip through files") {
  const auto dir = std::filesystem::temp_directory_path();
  MetricsReport r{0.25, 0.125, 0.5, 40, 400};
  write_report_json(dir / "dn_metrics.json", r);
  const MetricsReport b = read_report_json(dir / "dn_metrics.json");
  CHECK(b.mr_at_10fpr == 0.125);
  CHECK(b.n_neg == 400);
  std::vector<Detection> d{{"x", {1, 2, 3, 4}, 0.75}};
  write_detections_jsonl(dir / "dn_det.jsonl", d);
  const auto back = read_detections_jsonl(dir / "dn_det.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].box.w == 3);
  CHECK(back[0].score == 0.75);
}

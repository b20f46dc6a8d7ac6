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

#include "dummynet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "dummynet/core/error.hpp"

namespace dummynet::eval {

double miss_rate_at_fpr(const std::vector<ScoredSample>& samples, double fpr) {
  std::vector<double> neg;
  std::size_t n_pos = 0;
  for (const auto& s : samples) {
    if (s.positive)
      ++n_pos;
    else
      neg.push_back(s.score);
  }
  if (n_pos == 0 || neg.empty()) throw Error(ErrorCode::NoSamples, "need at least one positive and one negative");
  std::sort(neg.begin(), neg.end(), std::greater<>());
  // At most `allowed` negatives may score above t; the smallest such t is the
  // (allowed + 1)-th largest negative score.
  const auto allowed = static_cast<std::size_t>(std::floor(fpr * static_cast<double>(neg.size()) + 1e-9));
  if (allowed >= neg.size()) return 0.0;
  const double t = neg[allowed];
  std::size_t missed = 0;
  for (const auto& s : samples)
    if (s.positive && s.score <= t) ++missed;
  return static_cast<double>(missed) / static_cast<double>(n_pos);
}

std::vector<RocPoint> roc_sweep(const std::vector<ScoredSample>& samples) {
  std::vector<ScoredSample> sorted = samples;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  double n_pos = 0, n_neg = 0;
  for (const auto& s : samples) (s.positive ? n_pos : n_neg) += 1;
  std::vector<RocPoint> out;
  double tp = 0, fp = 0;
  std::size_t i = 0;
  // Above the highest score nothing is positive.
  while (i < sorted.size()) {
    const double t = sorted[i].score;
    out.push_back({t, n_neg > 0 ? fp / n_neg : 0.0, n_pos > 0 ? tp / n_pos : 0.0, n_pos > 0 ? 1.0 - tp / n_pos : 1.0});
    while (i < sorted.size() && sorted[i].score == t) {
      (sorted[i].positive ? tp : fp) += 1;
      ++i;
    }
  }
  out.push_back({-std::numeric_limits<double>::infinity(), n_neg > 0 ? fp / n_neg : 0.0, n_pos > 0 ? tp / n_pos : 0.0,
                 n_pos > 0 ? 1.0 - tp / n_pos : 1.0});
  return out;
}

std::vector<FppiPoint> fppi_curve(const std::vector<Detection>& detections, const std::vector<GroundTruth>& truths,
                                  int n_images, double iou_threshold) {
  if (truths.empty()) throw Error(ErrorCode::NoGroundTruth, "no ground-truth boxes");
  if (n_images <= 0) throw Error(ErrorCode::NoGroundTruth, "no images");
  std::map<std::string, std::vector<place::Box>> gt_by_image;
  for (const auto& g : truths) gt_by_image[g.image_id].push_back(g.box);
  std::map<std::string, std::vector<bool>> taken;
  for (const auto& [id, boxes] : gt_by_image) taken[id].assign(boxes.size(), false);

  std::vector<std::size_t> order(detections.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });

  const double n_gt = static_cast<double>(truths.size());
  std::vector<FppiPoint> curve{{std::numeric_limits<double>::infinity(), 0.0, 1.0}};
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = detections[order[i]].score;
    while (i < order.size() && detections[order[i]].score == s) {
      const Detection& d = detections[order[i]];
      int best = -1;
      double best_iou = iou_threshold;
      auto it = gt_by_image.find(d.image_id);
      if (it != gt_by_image.end()) {
        auto& used = taken[d.image_id];
        for (std::size_t g = 0; g < it->second.size(); ++g) {
          if (used[g]) continue;
          const double v = place::iou(d.box, it->second[g]);
          if (v >= best_iou) {
            best_iou = v;
            best = static_cast<int>(g);
          }
        }
        if (best >= 0) used[best] = true;
      }
      (best >= 0 ? tp : fp) += 1;
      ++i;
    }
    curve.push_back({s, fp / n_images, 1.0 - tp / n_gt});
  }
  return curve;
}

std::vector<double> lamr_references() {
  std::vector<double> refs(9);
  for (int i = 0; i < 9; ++i) refs[i] = std::pow(10.0, -2.0 + 2.0 * i / 8.0);
  return refs;
}

double miss_rate_at_fppi(const std::vector<FppiPoint>& curve, double ref) {
  double mr = 1.0;
  for (const auto& p : curve)
    if (p.fppi <= ref) mr = std::min(mr, p.miss_rate);
  return mr;
}

double lamr(const std::vector<Detection>& detections, const std::vector<GroundTruth>& truths, int n_images,
            double iou_threshold) {
  const auto curve = fppi_curve(detections, truths, n_images, iou_threshold);
  double acc = 0.0;
  bool all_zero = true;
  const auto refs = lamr_references();
  for (double r : refs) {
    const double mr = miss_rate_at_fppi(curve, r);
    all_zero = all_zero && mr == 0.0;
    acc += std::log(std::max(1e-10, mr));
  }
  // The log floor only regularizes isolated zeros; a detector with no misses scores 0.
  if (all_zero) return 0.0;
  return std::exp(acc / static_cast<double>(refs.size()));
}

MetricsReport make_report(const std::vector<ScoredSample>& samples) {
  MetricsReport r;
  for (const auto& s : samples) (s.positive ? r.n_pos : r.n_neg) += 1;
  r.mr_at_1fpr = miss_rate_at_fpr(samples, 0.01);
  r.mr_at_10fpr = miss_rate_at_fpr(samples, 0.10);
  return r;
}

void write_report_json(const std::filesystem::path& path, const MetricsReport& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  const nlohmann::json j = {{"mr_at_1fpr", r.mr_at_1fpr}, {"mr_at_10fpr", r.mr_at_10fpr}, {"lamr", r.lamr},
                            {"n_pos", r.n_pos},           {"n_neg", r.n_neg}};
  out << j.dump(2) << '\n';
}

MetricsReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "metrics report not found: " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    MetricsReport r;
    r.mr_at_1fpr = j.at("mr_at_1fpr").get<double>();
    r.mr_at_10fpr = j.at("mr_at_10fpr").get<double>();
    r.lamr = j.at("lamr").get<double>();
    r.n_pos = j.at("n_pos").get<int>();
    r.n_neg = j.at("n_neg").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

void write_roc_csv(const std::filesystem::path& path, const std::vector<RocPoint>& roc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "threshold,fpr,tpr,miss_rate\n";
  out.precision(17);
  for (const auto& p : roc) out << p.threshold << ',' << p.fpr << ',' << p.tpr << ',' << p.miss_rate << '\n';
}

std::vector<Detection> read_detections_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "detections not found: " + path.string());
  std::vector<Detection> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Detection d;
      d.image_id = j.at("image_id").is_string() ? j["image_id"].get<std::string>() : j["image_id"].dump();
      const auto b = j.at("box").get<std::vector<double>>();
      if (b.size() != 4) throw Error(ErrorCode::FormatError, "box needs 4 numbers");
      d.box = {b[0], b[1], b[2], b[3]};
      d.score = j.at("score").get<double>();
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_detections_jsonl(const std::filesystem::path& path, const std::vector<Detection>& detections) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& d : detections) {
    const nlohmann::json j = {
        {"image_id", d.image_id}, {"box", {d.box.x, d.box.y, d.box.w, d.box.h}}, {"score", d.score}};
    out << j.dump() << '\n';
  }
}

}  // namespace dummynet::eval

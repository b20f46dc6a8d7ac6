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
#include <string>
#include <vector>

#include "dummynet/place/placement.hpp"

namespace dummynet::eval {

struct ScoredSample {
  double score = 0.0;
  bool positive = false;
};

/// Threshold t is the smallest value whose false-positive rate (negatives
/// scoring strictly above t) is at most `fpr`; returns the fraction of
/// positives scoring <= t. NoSamples without both classes.
double miss_rate_at_fpr(const std::vector<ScoredSample>& samples, double fpr);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
  double miss_rate;
};

/// One point per distinct score (classified positive iff score > threshold),
/// plus the all-positive point at -inf. Thresholds descend.
std::vector<RocPoint> roc_sweep(const std::vector<ScoredSample>& samples);

struct Detection {
  std::string image_id;
  place::Box box;
  double score = 0.0;
};

struct GroundTruth {
  std::string image_id;
  place::Box box;
};

struct FppiPoint {
  double score;  // detections with score >= this are kept
  double fppi;
  double miss_rate;
};

/// Greedy score-ordered matching per image; a detection is a true positive
/// when its best still-unmatched ground truth has IoU >= iou_threshold.
/// Starts at the empty-detector point (0, 1).
std::vector<FppiPoint> fppi_curve(const std::vector<Detection>& detections, const std::vector<GroundTruth>& truths,
                                  int n_images, double iou_threshold = 0.5);

/// Geometric mean of the miss rate sampled at nine FPPI references
/// log-spaced over [1e-2, 1]; each sample is floored at 1e-10.
double lamr(const std::vector<Detection>& detections, const std::vector<GroundTruth>& truths, int n_images,
            double iou_threshold = 0.5);

/// Miss rate at the largest operating point with fppi <= ref.
double miss_rate_at_fppi(const std::vector<FppiPoint>& curve, double ref);

std::vector<double> lamr_references();

struct MetricsReport {
  double mr_at_1fpr = 1.0;
  double mr_at_10fpr = 1.0;
  double lamr = 1.0;
  int n_pos = 0;
  int n_neg = 0;
};

/// Classifier report; lamr stays at 1 unless the caller fills it.
MetricsReport make_report(const std::vector<ScoredSample>& samples);

void write_report_json(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport read_report_json(const std::filesystem::path& path);
void write_roc_csv(const std::filesystem::path& path, const std::vector<RocPoint>& roc);

std::vector<Detection> read_detections_jsonl(const std::filesystem::path& path);
void write_detections_jsonl(const std::filesystem::path& path, const std::vector<Detection>& detections);

}  // namespace dummynet::eval

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

#include <string>
#include <utility>
#include <vector>

#include "dummynet/eval/classifier.hpp"
#include "dummynet/eval/metrics.hpp"
#include "dummynet/place/placement.hpp"

namespace dummynet::eval {

struct DetectorOptions {
  int stride = 3;        // columns between windows
  int row_step = 2;      // footprint rows between windows
  double min_height = 12.0;
  double fill = 0.8;     // person height / window side, as in training crops
  double aspect = 0.41;  // reported box width / height
  double nms_iou = 0.5;
  int window = 64;
};

/// Greedy non-maximum suppression per image, highest score first.
std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold);

/// Scans footprints with heights from the height model; each window is
/// resampled to the classifier's input size and scored.
std::vector<Detection> detect_people(const Classifier& model, const Tensor& image, const place::HeightModel& heights,
                                     const std::string& image_id, const DetectorOptions& options = {});

/// Log-log MR vs FPPI chart (FPPI 1e-2..1e1, MR 1e-2..1) without text;
/// curves use a fixed palette in order: blue, red, green, orange, purple, gray.
void write_mr_fppi_plot(const std::filesystem::path& path, const std::vector<std::vector<FppiPoint>>& curves);

}  // namespace dummynet::eval

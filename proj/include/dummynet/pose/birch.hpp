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

#include <vector>

namespace dummynet::pose {

using Point = std::vector<double>;

struct BirchOptions {
  /// Maximum radius of a leaf subcluster.
  double threshold = 0.5;
  int branching_factor = 50;
  /// Global step target; 0 keeps every subcluster as its own cluster.
  int n_clusters = 0;
};

struct BirchResult {
  std::vector<int> labels;  // per input point, compact 0..n_clusters-1
  int n_clusters = 0;
  std::vector<Point> subcluster_centroids;
  std::vector<double> subcluster_sizes;
};

/// Deterministic for a fixed input order.
BirchResult birch_cluster(const std::vector<Point>& points, const BirchOptions& options);

/// Ward agglomeration of weighted centroids down to `target` groups.
/// Returns a compact label per centroid.
std::vector<int> ward_agglomerate(const std::vector<Point>& centroids, const std::vector<double>& weights,
                                  int target);

}  // namespace dummynet::pose

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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dummynet/core/rng.hpp"
#include "dummynet/pose/birch.hpp"
#include "dummynet/pose/skeleton.hpp"

namespace dummynet::pose {

inline constexpr int kNumComponents = 20;
inline constexpr const char* kPoseModelTag = "pose_model_v1";

struct ViewpointCluster {
  int id = 0;
  Visibility visibility_pattern{};  // per-keypoint majority over members
  std::vector<int> members;         // indices into the clustered sample list
};

struct PoseClusterModel {
  int viewpoint_id = 0;
  int pose_cluster_id = 0;
  Visibility visibility_pattern{};
  Eigen::VectorXd mean;    // 34
  Eigen::MatrixXd basis;   // 20 x 34, orthonormal rows
  Eigen::VectorXd variance;  // per component, population variance
  std::vector<std::pair<double, double>> bounds;
  int member_count = 0;

  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return basis * (x - mean); }
  NormalizedSkeleton reconstruct(const Eigen::VectorXd& coeffs) const;
};

struct PoseModelConfig {
  BirchOptions viewpoint{0.4, 50, 189};
  BirchOptions pose{0.5, 50, 0};  // n_clusters is derived per viewpoint cluster
  int members_per_pose_cluster = 200;
  int min_members = 20;
};

std::vector<ViewpointCluster> cluster_viewpoints(const std::vector<Skeleton>& samples, const BirchOptions& options);

/// Pose-cluster label per member (aligned with `normalized`), compact from 0.
std::vector<int> cluster_poses(const std::vector<NormalizedSkeleton>& normalized, const BirchOptions& options);

/// Members are imputed to the majority visibility pattern before the fit:
/// pattern-visible slots missing in a member take the member mean, the rest are 0.
PoseClusterModel fit_pca(const std::vector<NormalizedSkeleton>& members, int min_members = 20);

/// mean + basis^T c with c_i ~ U[min_i, max_i].
NormalizedSkeleton sample_skeleton(const PoseClusterModel& model, Rng& rng);

/// Mean pose with the cluster's visibility pattern.
NormalizedSkeleton mean_skeleton(const PoseClusterModel& model);

Eigen::VectorXd to_vector(const NormalizedSkeleton& s);

struct SampleAssignment {
  int sample = 0;  // index into the input list
  int viewpoint = -1;
  int pose_cluster = -1;
  int model = -1;  // index into PoseModel::clusters, -1 when too small
};

struct PoseModel {
  std::vector<ViewpointCluster> viewpoints;
  std::vector<PoseClusterModel> clusters;
  std::vector<SampleAssignment> assignments;  // one per accepted input sample
  int n_input = 0;
  int n_accepted = 0;

  /// Cluster index drawn proportional to member counts; throws NoSamples if empty.
  int pick_cluster(Rng& rng) const;
  void save(const std::filesystem::path& path) const;
  static PoseModel load(const std::filesystem::path& path);
};

/// Filters, normalizes, clusters in two stages and fits every large-enough cluster.
PoseModel fit_pose_model(const std::vector<Skeleton>& samples, const PoseModelConfig& config);

}  // namespace dummynet::pose

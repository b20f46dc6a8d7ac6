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

#include "dummynet/pose/pose_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dummynet/core/error.hpp"

namespace dummynet::pose {
namespace {

Visibility majority(const std::vector<const Visibility*>& vis) {
  Visibility out{};
  for (int k = 0; k < kNumKeypoints; ++k) {
    std::size_t count = 0;
    for (const Visibility* v : vis) count += (*v)[k] ? 1 : 0;
    out[k] = 2 * count > vis.size();
  }
  return out;
}

nlohmann::json visibility_json(const Visibility& v) {
  nlohmann::json j = nlohmann::json::array();
  for (bool b : v) j.push_back(b ? 1 : 0);
  return j;
}

Visibility visibility_from(const nlohmann::json& j) {
  Visibility v{};
  if (!j.is_array() || j.size() != kNumKeypoints) throw Error(ErrorCode::FormatError, "bad visibility pattern");
  for (int k = 0; k < kNumKeypoints; ++k) v[k] = j[k].get<int>() != 0;
  return v;
}

}  // namespace

Eigen::VectorXd to_vector(const NormalizedSkeleton& s) {
  return Eigen::Map<const Eigen::VectorXd>(s.coords.data(), kNormDim);
}

NormalizedSkeleton PoseClusterModel::reconstruct(const Eigen::VectorXd& coeffs) const {
  const Eigen::VectorXd x = mean + basis.transpose() * coeffs;
  NormalizedSkeleton s;
  s.visible = visibility_pattern;
  for (int k = 0; k < kNumKeypoints; ++k) {
    if (!s.visible[k]) continue;
    s.coords[k] = x[k];
    s.coords[kNumKeypoints + k] = x[kNumKeypoints + k];
  }
  return s;
}

std::vector<ViewpointCluster> cluster_viewpoints(const std::vector<Skeleton>& samples, const BirchOptions& options) {
  std::vector<Point> points;
  points.reserve(samples.size());
  for (const auto& s : samples) {
    Point p(kNumKeypoints);
    for (int k = 0; k < kNumKeypoints; ++k) p[k] = s.visible[k] ? 1.0 : 0.0;
    points.push_back(std::move(p));
  }
  const BirchResult r = birch_cluster(points, options);
  std::vector<ViewpointCluster> out(r.n_clusters);
  for (int c = 0; c < r.n_clusters; ++c) out[c].id = c;
  for (std::size_t i = 0; i < samples.size(); ++i) out[r.labels[i]].members.push_back(static_cast<int>(i));
  for (auto& vc : out) {
    std::vector<const Visibility*> vis;
    for (int m : vc.members) vis.push_back(&samples[m].visible);
    vc.visibility_pattern = majority(vis);
  }
  return out;
}

std::vector<int> cluster_poses(const std::vector<NormalizedSkeleton>& normalized, const BirchOptions& options) {
  std::vector<Point> points;
  points.reserve(normalized.size());
  for (const auto& s : normalized) points.emplace_back(s.coords.begin(), s.coords.end());
  return birch_cluster(points, options).labels;
}

PoseClusterModel fit_pca(const std::vector<NormalizedSkeleton>& members, int min_members) {
  const int n = static_cast<int>(members.size());
  if (n < min_members)
    throw Error(ErrorCode::TooFewMembers,
                std::to_string(n) + " members, need at least " + std::to_string(min_members));
  if (n == 0) throw Error(ErrorCode::TooFewMembers, "empty cluster");

  std::vector<const Visibility*> vis;
  for (const auto& m : members) vis.push_back(&m.visible);
  const Visibility pattern = majority(vis);

  // Per-slot mean over members that see it, used for imputation.
  Eigen::VectorXd seen_mean = Eigen::VectorXd::Zero(kNormDim);
  for (int k = 0; k < kNumKeypoints; ++k) {
    int count = 0;
    for (const auto& m : members) {
      if (!m.visible[k]) continue;
      seen_mean[k] += m.kx(k);
      seen_mean[kNumKeypoints + k] += m.ky(k);
      ++count;
    }
    if (count > 0) {
      seen_mean[k] /= count;
      seen_mean[kNumKeypoints + k] /= count;
    }
  }
  Eigen::MatrixXd x(n, kNormDim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      double vx = 0.0, vy = 0.0;
      if (pattern[k]) {
        vx = members[i].visible[k] ? members[i].kx(k) : seen_mean[k];
        vy = members[i].visible[k] ? members[i].ky(k) : seen_mean[kNumKeypoints + k];
      }
      x(i, k) = vx;
      x(i, kNumKeypoints + k) = vy;
    }
  }

  PoseClusterModel model;
  model.visibility_pattern = pattern;
  model.member_count = n;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::DegenerateFit, "eigendecomposition failed");

  // Eigen sorts ascending; keep the top components, largest first.
  model.basis.resize(kNumComponents, kNormDim);
  model.variance.resize(kNumComponents);
  for (int c = 0; c < kNumComponents; ++c) {
    const int src = kNormDim - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    model.basis.row(c) = v.transpose();
    model.variance[c] = std::max(0.0, eig.eigenvalues()[src]);
  }
  const Eigen::MatrixXd proj = centered * model.basis.transpose();  // n x 20
  model.bounds.resize(kNumComponents);
  for (int c = 0; c < kNumComponents; ++c) model.bounds[c] = {proj.col(c).minCoeff(), proj.col(c).maxCoeff()};
  return model;
}

NormalizedSkeleton sample_skeleton(const PoseClusterModel& model, Rng& rng) {
  Eigen::VectorXd c(kNumComponents);
  for (int i = 0; i < kNumComponents; ++i) {
    const auto [lo, hi] = model.bounds[i];
    c[i] = hi > lo ? rng.uniform(lo, hi) : lo;
  }
  return model.reconstruct(c);
}

NormalizedSkeleton mean_skeleton(const PoseClusterModel& model) {
  return model.reconstruct(Eigen::VectorXd::Zero(kNumComponents));
}

int PoseModel::pick_cluster(Rng& rng) const {
  if (clusters.empty()) throw Error(ErrorCode::NoSamples, "pose model has no fitted clusters");
  long total = 0;
  for (const auto& c : clusters) total += c.member_count;
  long r = static_cast<long>(rng.uniform(0.0, static_cast<double>(total)));
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    r -= clusters[i].member_count;
    if (r < 0) return static_cast<int>(i);
  }
  return static_cast<int>(clusters.size()) - 1;
}

PoseModel fit_pose_model(const std::vector<Skeleton>& samples, const PoseModelConfig& config) {
  PoseModel model;
  model.n_input = static_cast<int>(samples.size());
  std::vector<Skeleton> kept;
  std::vector<NormalizedSkeleton> normalized;
  std::vector<int> source;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!filter_sample(samples[i])) continue;
    try {
      normalized.push_back(normalize_skeleton(samples[i]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegeneratePose) throw;
      continue;
    }
    kept.push_back(samples[i]);
    source.push_back(static_cast<int>(i));
  }
  model.n_accepted = static_cast<int>(kept.size());
  if (kept.empty()) throw Error(ErrorCode::EmptyDataset, "no skeleton passed the visibility filter");

  model.viewpoints = cluster_viewpoints(kept, config.viewpoint);
  model.assignments.resize(kept.size());
  for (const auto& vc : model.viewpoints) {
    std::vector<NormalizedSkeleton> members;
    for (int m : vc.members) members.push_back(normalized[m]);
    BirchOptions opts = config.pose;
    opts.n_clusters = std::max(
        1, static_cast<int>((members.size() + config.members_per_pose_cluster - 1) / config.members_per_pose_cluster));
    const std::vector<int> labels = cluster_poses(members, opts);
    const int n_pose = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    for (int p = 0; p < n_pose; ++p) {
      std::vector<NormalizedSkeleton> group;
      std::vector<int> idx;
      for (std::size_t j = 0; j < members.size(); ++j)
        if (labels[j] == p) {
          group.push_back(members[j]);
          idx.push_back(vc.members[j]);
        }
      int model_index = -1;
      if (static_cast<int>(group.size()) >= config.min_members) {
        PoseClusterModel pcm = fit_pca(group, config.min_members);
        pcm.viewpoint_id = vc.id;
        pcm.pose_cluster_id = p;
        model_index = static_cast<int>(model.clusters.size());
        model.clusters.push_back(std::move(pcm));
      }
      for (int k : idx) model.assignments[k] = SampleAssignment{source[k], vc.id, p, model_index};
    }
  }
  return model;
}

void PoseModel::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format"] = kPoseModelTag;
  j["n_input"] = n_input;
  j["n_accepted"] = n_accepted;
  j["viewpoints"] = nlohmann::json::array();
  for (const auto& vc : viewpoints)
    j["viewpoints"].push_back({{"id", vc.id},
                               {"visibility", visibility_json(vc.visibility_pattern)},
                               {"members", vc.members}});
  j["clusters"] = nlohmann::json::array();
  for (const auto& c : clusters) {
    std::vector<double> mean(c.mean.data(), c.mean.data() + c.mean.size());
    std::vector<std::vector<double>> basis;
    for (int r = 0; r < c.basis.rows(); ++r) {
      const Eigen::VectorXd row = c.basis.row(r).transpose();
      basis.emplace_back(row.data(), row.data() + row.size());
    }
    std::vector<double> var(c.variance.data(), c.variance.data() + c.variance.size());
    j["clusters"].push_back({{"viewpoint_id", c.viewpoint_id},
                             {"pose_cluster_id", c.pose_cluster_id},
                             {"visibility", visibility_json(c.visibility_pattern)},
                             {"member_count", c.member_count},
                             {"mean", mean},
                             {"basis", basis},
                             {"variance", var},
                             {"bounds", c.bounds}});
  }
  j["assignments"] = nlohmann::json::array();
  for (const auto& a : assignments) j["assignments"].push_back({a.sample, a.viewpoint, a.pose_cluster, a.model});
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  // nlohmann writes doubles in shortest round-trip form.
  out << j.dump(1) << '\n';
}

PoseModel PoseModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "pose model not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kPoseModelTag)
    throw Error(ErrorCode::FormatError, path.string() + ": expected format " + kPoseModelTag);
  try {
    PoseModel m;
    m.n_input = j.at("n_input").get<int>();
    m.n_accepted = j.at("n_accepted").get<int>();
    for (const auto& v : j.at("viewpoints")) {
      ViewpointCluster vc;
      vc.id = v.at("id").get<int>();
      vc.visibility_pattern = visibility_from(v.at("visibility"));
      vc.members = v.at("members").get<std::vector<int>>();
      m.viewpoints.push_back(std::move(vc));
    }
    for (const auto& c : j.at("clusters")) {
      PoseClusterModel pcm;
      pcm.viewpoint_id = c.at("viewpoint_id").get<int>();
      pcm.pose_cluster_id = c.at("pose_cluster_id").get<int>();
      pcm.visibility_pattern = visibility_from(c.at("visibility"));
      pcm.member_count = c.at("member_count").get<int>();
      const auto mean = c.at("mean").get<std::vector<double>>();
      const auto basis = c.at("basis").get<std::vector<std::vector<double>>>();
      const auto var = c.at("variance").get<std::vector<double>>();
      if (mean.size() != kNormDim || basis.size() != kNumComponents || var.size() != kNumComponents)
        throw Error(ErrorCode::FormatError, "pose cluster has wrong dimensions");
      pcm.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), kNormDim);
      pcm.basis.resize(kNumComponents, kNormDim);
      for (int r = 0; r < kNumComponents; ++r) {
        if (basis[r].size() != kNormDim) throw Error(ErrorCode::FormatError, "basis row has wrong length");
        for (int k = 0; k < kNormDim; ++k) pcm.basis(r, k) = basis[r][k];
      }
      pcm.variance = Eigen::Map<const Eigen::VectorXd>(var.data(), kNumComponents);
      pcm.bounds = c.at("bounds").get<std::vector<std::pair<double, double>>>();
      m.clusters.push_back(std::move(pcm));
    }
    for (const auto& a : j.at("assignments"))
      m.assignments.push_back({a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>(), a.at(3).get<int>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

}  // namespace dummynet::pose

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

#include "dummynet/pose/birch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace dummynet::pose {
namespace {

double sqdist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Clustering feature: count, linear sum, squared sum.
struct Cf {
  double n = 0.0;
  Point ls;
  double ss = 0.0;

  static Cf of(const Point& p) {
    Cf cf;
    cf.n = 1.0;
    cf.ls = p;
    for (double v : p) cf.ss += v * v;
    return cf;
  }
  void add(const Cf& o) {
    if (ls.empty()) ls.assign(o.ls.size(), 0.0);
    n += o.n;
    for (std::size_t i = 0; i < ls.size(); ++i) ls[i] += o.ls[i];
    ss += o.ss;
  }
  Point centroid() const {
    Point c(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) c[i] = ls[i] / n;
    return c;
  }
  double merged_radius(const Cf& o) const {
    const double m = n + o.n;
    double c2 = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double c = (ls[i] + o.ls[i]) / m;
      c2 += c * c;
    }
    return std::sqrt(std::max(0.0, (ss + o.ss) / m - c2));
  }
};

struct Node;

struct Entry {
  Cf cf;
  Point centroid;
  std::unique_ptr<Node> child;

  void refresh() { centroid = cf.centroid(); }
};

struct Node {
  bool leaf = true;
  std::vector<Entry> entries;
};

class CfTree {
 public:
  CfTree(double threshold, int branching) : threshold_(threshold), branching_(std::max(branching, 2)) {
    root_ = std::make_unique<Node>();
  }

  void insert(const Point& p) {
    const Cf cf = Cf::of(p);
    if (auto split = insert(*root_, cf, p)) {
      auto root = std::make_unique<Node>();
      root->leaf = false;
      root->entries.push_back(make_parent(std::move(split->first)));
      root->entries.push_back(make_parent(std::move(split->second)));
      root_ = std::move(root);
    }
  }

  void leaves(std::vector<const Entry*>& out) const { collect(*root_, out); }

 private:
  using Split = std::pair<std::unique_ptr<Node>, std::unique_ptr<Node>>;

  static std::size_t closest(const Node& node, const Point& p) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.entries.size(); ++i) {
      const double d = sqdist(node.entries[i].centroid, p);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }

  static Entry make_parent(std::unique_ptr<Node> child) {
    Entry e;
    for (const auto& c : child->entries) e.cf.add(c.cf);
    e.refresh();
    e.child = std::move(child);
    return e;
  }

  std::optional<Split> insert(Node& node, const Cf& cf, const Point& p) {
    if (node.leaf) {
      if (!node.entries.empty()) {
        Entry& e = node.entries[closest(node, p)];
        if (e.cf.merged_radius(cf) <= threshold_) {
          e.cf.add(cf);
          e.refresh();
          return std::nullopt;
        }
      }
      Entry e;
      e.cf = cf;
      e.refresh();
      node.entries.push_back(std::move(e));
    } else {
      const std::size_t i = closest(node, p);
      if (auto split = insert(*node.entries[i].child, cf, p)) {
        node.entries[i] = make_parent(std::move(split->first));
        node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                            make_parent(std::move(split->second)));
      } else {
        node.entries[i].cf.add(cf);
        node.entries[i].refresh();
      }
    }
    if (static_cast<int>(node.entries.size()) <= branching_) return std::nullopt;
    return split(node);
  }

  // Seeds are the farthest pair; every entry joins the closer seed.
  static Split split(Node& node) {
    const std::size_t m = node.entries.size();
    std::size_t sa = 0, sb = 1;
    double far = -1.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        const double d = sqdist(node.entries[i].centroid, node.entries[j].centroid);
        if (d > far) {
          far = d;
          sa = i;
          sb = j;
        }
      }
    auto a = std::make_unique<Node>();
    auto b = std::make_unique<Node>();
    a->leaf = b->leaf = node.leaf;
    const Point ca = node.entries[sa].centroid;
    const Point cb = node.entries[sb].centroid;
    for (std::size_t i = 0; i < m; ++i) {
      const bool to_a = i == sa || (i != sb && sqdist(node.entries[i].centroid, ca) <=
                                                   sqdist(node.entries[i].centroid, cb));
      (to_a ? a : b)->entries.push_back(std::move(node.entries[i]));
    }
    node.entries.clear();
    return {std::move(a), std::move(b)};
  }

  static void collect(const Node& node, std::vector<const Entry*>& out) {
    for (const auto& e : node.entries) {
      if (node.leaf)
        out.push_back(&e);
      else
        collect(*e.child, out);
    }
  }

  double threshold_;
  int branching_;
  std::unique_ptr<Node> root_;
};

}  // namespace

std::vector<int> ward_agglomerate(const std::vector<Point>& centroids, const std::vector<double>& weights,
                                  int target) {
  const int m = static_cast<int>(centroids.size());
  std::vector<int> owner(m);
  for (int i = 0; i < m; ++i) owner[i] = i;
  std::vector<Point> c = centroids;
  std::vector<double> w = weights;
  std::vector<bool> active(m, true);
  int n_active = m;
  target = std::max(target, 1);

  auto ward = [&](int a, int b) { return w[a] * w[b] / (w[a] + w[b]) * sqdist(c[a], c[b]); };

  // Nearest-neighbour chain; valid because the Ward criterion is reducible.
  std::vector<int> chain;
  while (n_active > target) {
    if (chain.empty()) {
      for (int i = 0; i < m; ++i)
        if (active[i]) {
          chain.push_back(i);
          break;
        }
    }
    const int a = chain.back();
    const int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
    int b = prev;
    double bd = prev >= 0 ? ward(a, prev) : std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (!active[i] || i == a) continue;
      const double d = ward(a, i);
      if (d < bd) {
        bd = d;
        b = i;
      }
    }
    if (b == prev) {
      chain.pop_back();
      chain.pop_back();
      const int keep = std::min(a, b);
      const int gone = std::max(a, b);
      const double tw = w[a] + w[b];
      for (std::size_t k = 0; k < c[keep].size(); ++k) c[keep][k] = (w[a] * c[a][k] + w[b] * c[b][k]) / tw;
      w[keep] = tw;
      active[gone] = false;
      for (int& o : owner)
        if (o == gone) o = keep;
      --n_active;
    } else {
      chain.push_back(b);
    }
  }

  std::vector<int> remap(m, -1);
  std::vector<int> labels(m);
  int next = 0;
  for (int i = 0; i < m; ++i) {
    if (remap[owner[i]] < 0) remap[owner[i]] = next++;
    labels[i] = remap[owner[i]];
  }
  return labels;
}

BirchResult birch_cluster(const std::vector<Point>& points, const BirchOptions& options) {
  BirchResult result;
  if (points.empty()) return result;
  CfTree tree(options.threshold, options.branching_factor);
  for (const auto& p : points) tree.insert(p);

  std::vector<const Entry*> leaves;
  tree.leaves(leaves);
  for (const Entry* e : leaves) {
    result.subcluster_centroids.push_back(e->centroid);
    result.subcluster_sizes.push_back(e->cf.n);
  }
  const int m = static_cast<int>(leaves.size());
  std::vector<int> sub_label(m);
  if (options.n_clusters > 0 && options.n_clusters < m) {
    sub_label = ward_agglomerate(result.subcluster_centroids, result.subcluster_sizes, options.n_clusters);
  } else {
    for (int i = 0; i < m; ++i) sub_label[i] = i;
  }

  // Points take the label of their nearest subcluster; unused labels are dropped.
  std::vector<int> raw(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int s = 0; s < m; ++s) {
      const double d = sqdist(points[i], result.subcluster_centroids[s]);
      if (d < bd) {
        bd = d;
        best = s;
      }
    }
    raw[i] = sub_label[best];
  }
  std::vector<int> remap(m, -1);
  result.labels.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (remap[raw[i]] < 0) remap[raw[i]] = result.n_clusters++;
    result.labels[i] = remap[raw[i]];
  }
  return result;
}

}  // namespace dummynet::pose

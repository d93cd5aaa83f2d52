/*
 * Copyright 2026 The ertalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Regression trees over shape-indexed features: node fitting by exhaustive
// search over random candidate splits and recursive tree growth with masked
// leaf means.

#ifndef ERTALIGN_TREE_H_
#define ERTALIGN_TREE_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ertalign/features.h"

namespace ertalign {

// Row-major n x dims block of residuals. Rows are indexed by sample id.
struct ResidualView {
  const double* data = nullptr;
  int dims = 0;

  const double* row(int sample) const { return data + static_cast<std::size_t>(sample) * dims; }
};

// A sample goes right when its feature value is strictly above tau.
struct NodeFit {
  int candidate = 0;
  double cost = 0.0;         // sum over both children of ||r - mu_b||^2
  double parent_cost = 0.0;  // same quantity without splitting
  std::vector<int> left;
  std::vector<int> right;
};

// Picks the candidate minimising the two-child squared deviation from the
// child means; lowest index wins ties. `features` is samples.size() x
// candidates.size(), row-major, aligned with `samples`.
NodeFit fit_node(const ResidualView& residuals, std::span<const int> samples,
                 std::span<const SplitParams> candidates, std::span<const double> features,
                 int workers = 1);

// Direct evaluation of the node objective for a given partition.
double split_cost(const ResidualView& residuals, std::span<const int> left,
                  std::span<const int> right);

struct TreeNode {
  SplitParams split;
  int left = -1;
  int right = -1;
  int leaf = -1;  // index into leaves when this is a leaf

  bool is_leaf() const { return leaf >= 0; }
};

struct TreeLeaf {
  std::vector<double> residual;    // 2 per part landmark, (x, y) interleaved
  std::vector<double> visibility;  // 1 per part landmark, in [0,1]
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  std::vector<TreeLeaf> leaves;

  template <typename FeatureFn>
  const TreeLeaf& evaluate(FeatureFn&& feature) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = feature(n.split) > n.split.tau ? n.right : n.left;
    }
    return leaves[nodes[i].leaf];
  }
  int depth() const;
};

// Per-face training targets restricted to one part.
struct PartTargets {
  int part_size = 0;
  std::vector<double> residuals;    // n x 2*part_size, masked by `weights`
  std::vector<double> weights;      // n x part_size annotated mask
  std::vector<double> target_vis;   // n x part_size ground-truth visibility
  std::vector<double> current_vis;  // n x part_size running estimate

  ResidualView view() const { return {residuals.data(), 2 * part_size}; }
};

struct TreeParams {
  int depth = 4;
  int candidates = 200;
  std::pair<double, double> tau_range{-0.3, 0.3};
  int workers = 1;
};

// Grows one tree on `samples`. Leaves store the per-landmark mean residual
// over annotated entries (0 where nothing is annotated) and the mean
// ground-truth visibility over annotated entries (falling back to the mean
// running estimate).
RegressionTree fit_tree(std::span<const FeatureRow> features, const PartTargets& targets,
                        std::span<const int> part_landmarks, std::span<const int> samples,
                        const TreeParams& params, uint64_t seed);

}  // namespace ertalign

#endif  // ERTALIGN_TREE_H_

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

#include "ertalign/tree.h"

#include <algorithm>
#include <stdexcept>

#include "ertalign/parallel.h"
#include "ertalign/random.h"

namespace ertalign {

namespace {

double side_cost(const ResidualView& r, std::span<const int> side) {
  if (side.empty()) return 0.0;
  std::vector<double> mean(r.dims, 0.0);
  for (int s : side) {
    const double* row = r.row(s);
    for (int d = 0; d < r.dims; ++d) mean[d] += row[d];
  }
  for (double& m : mean) m /= static_cast<double>(side.size());
  double cost = 0.0;
  for (int s : side) {
    const double* row = r.row(s);
    for (int d = 0; d < r.dims; ++d) {
      const double e = row[d] - mean[d];
      cost += e * e;
    }
  }
  return cost;
}

double squared_norm(const std::vector<double>& v, std::size_t offset, int dims) {
  double out = 0.0;
  for (int d = 0; d < dims; ++d) out += v[offset + d] * v[offset + d];
  return out;
}

}  // namespace

double split_cost(const ResidualView& residuals, std::span<const int> left,
                  std::span<const int> right) {
  return side_cost(residuals, left) + side_cost(residuals, right);
}

NodeFit fit_node(const ResidualView& residuals, std::span<const int> samples,
                 std::span<const SplitParams> candidates, std::span<const double> features,
                 int workers) {
  const std::size_t n = samples.size();
  const std::size_t c_count = candidates.size();
  if (c_count == 0) throw std::invalid_argument("fit_node needs at least one candidate");
  if (features.size() != n * c_count) throw std::invalid_argument("feature matrix has wrong size");
  const int dims = residuals.dims;

  // Minimising sum_b sum_s ||r_s - mu_b||^2 is maximising
  // sum_b ||S_b||^2 / n_b where S_b is the residual sum of child b.
  std::vector<double> score(c_count);
  const int chunks = std::max(1, std::min<int>(workers, static_cast<int>(c_count)));
  const std::size_t per_chunk = (c_count + chunks - 1) / chunks;
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t chunk) {
    const std::size_t begin = chunk * per_chunk;
    const std::size_t end = std::min(c_count, begin + per_chunk);
    if (begin >= end) return;
    const std::size_t width = end - begin;
    std::vector<double> sums(width * 2 * dims, 0.0);
    std::vector<std::size_t> counts(width * 2, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = residuals.row(samples[i]);
      const double* f = features.data() + i * c_count;
      for (std::size_t c = begin; c < end; ++c) {
        const std::size_t side = f[c] > candidates[c].tau ? 1 : 0;
        const std::size_t slot = (c - begin) * 2 + side;
        ++counts[slot];
        double* acc = sums.data() + slot * dims;
        for (int d = 0; d < dims; ++d) acc[d] += row[d];
      }
    }
    for (std::size_t c = begin; c < end; ++c) {
      double s = 0.0;
      for (std::size_t side = 0; side < 2; ++side) {
        const std::size_t slot = (c - begin) * 2 + side;
        if (counts[slot] > 0) {
          s += squared_norm(sums, slot * dims, dims) / static_cast<double>(counts[slot]);
        }
      }
      score[c] = s;
    }
  });

  NodeFit fit;
  for (std::size_t c = 1; c < c_count; ++c) {
    if (score[c] > score[fit.candidate]) fit.candidate = static_cast<int>(c);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double f = features[i * c_count + fit.candidate];
    (f > candidates[fit.candidate].tau ? fit.right : fit.left).push_back(samples[i]);
  }
  fit.cost = split_cost(residuals, fit.left, fit.right);
  fit.parent_cost = split_cost(residuals, samples, {});
  return fit;
}

int RegressionTree::depth() const {
  // Nodes are stored parent-before-child; walk with an explicit stack.
  if (nodes.empty()) return 0;
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    if (nodes[i].is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureRow> features, const PartTargets& targets,
              std::span<const int> part_landmarks, const TreeParams& params, uint64_t seed)
      : features_(features),
        targets_(targets),
        part_landmarks_(part_landmarks),
        params_(params),
        seed_(seed) {}

  RegressionTree build(std::span<const int> samples) {
    const auto view = targets_.view();
    total_energy_ = 0.0;
    for (int s : samples) {
      const double* row = view.row(s);
      for (int d = 0; d < view.dims; ++d) total_energy_ += row[d] * row[d];
    }
    grow(std::vector<int>(samples.begin(), samples.end()), params_.depth, 1);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<int> samples, int depth_left, uint64_t heap_id) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    if (depth_left > 0 && samples.size() >= 2) {
      const int pattern_size = features_.empty() ? 0 : features_[samples.front()].pattern_size;
      const auto candidates =
          gen_candidates(params_.candidates, part_landmarks_, pattern_size, params_.tau_range,
                         mix_seed(seed_, {heap_id}));
      std::vector<double> matrix(samples.size() * candidates.size());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const FeatureRow& row = features_[samples[i]];
        double* out = matrix.data() + i * candidates.size();
        for (std::size_t c = 0; c < candidates.size(); ++c) out[c] = row.feature(candidates[c]);
      }
      NodeFit fit = fit_node(targets_.view(), samples, candidates, matrix, params_.workers);
      if (fit.parent_cost - fit.cost > 1e-10 * total_energy_) {
        tree_.nodes[index].split = candidates[fit.candidate];
        const int left = grow(std::move(fit.left), depth_left - 1, 2 * heap_id);
        const int right = grow(std::move(fit.right), depth_left - 1, 2 * heap_id + 1);
        tree_.nodes[index].left = left;
        tree_.nodes[index].right = right;
        return index;
      }
    }
    tree_.nodes[index].leaf = static_cast<int>(tree_.leaves.size());
    tree_.leaves.push_back(make_leaf(samples));
    return index;
  }

  TreeLeaf make_leaf(const std::vector<int>& samples) const {
    const int k = targets_.part_size;
    TreeLeaf leaf;
    leaf.residual.assign(2 * k, 0.0);
    leaf.visibility.assign(k, 0.0);
    std::vector<double> weight(k, 0.0), vis_fallback(k, 0.0);
    for (int s : samples) {
      const std::size_t base = static_cast<std::size_t>(s) * k;
      for (int j = 0; j < k; ++j) {
        const double w = targets_.weights[base + j];
        leaf.residual[2 * j] += targets_.residuals[2 * base + 2 * j];
        leaf.residual[2 * j + 1] += targets_.residuals[2 * base + 2 * j + 1];
        weight[j] += w;
        leaf.visibility[j] += w * targets_.target_vis[base + j];
        vis_fallback[j] += targets_.current_vis[base + j];
      }
    }
    for (int j = 0; j < k; ++j) {
      if (weight[j] > 0.0) {
        leaf.residual[2 * j] /= weight[j];
        leaf.residual[2 * j + 1] /= weight[j];
        leaf.visibility[j] /= weight[j];
      } else {
        leaf.residual[2 * j] = 0.0;
        leaf.residual[2 * j + 1] = 0.0;
        leaf.visibility[j] = samples.empty() ? 1.0 : vis_fallback[j] / samples.size();
      }
      leaf.visibility[j] = std::clamp(leaf.visibility[j], 0.0, 1.0);
    }
    return leaf;
  }

  std::span<const FeatureRow> features_;
  const PartTargets& targets_;
  std::span<const int> part_landmarks_;
  TreeParams params_;
  uint64_t seed_;
  double total_energy_ = 0.0;
  RegressionTree tree_;
};

}  // namespace

RegressionTree fit_tree(std::span<const FeatureRow> features, const PartTargets& targets,
                        std::span<const int> part_landmarks, std::span<const int> samples,
                        const TreeParams& params, uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("fit_tree needs at least one sample");
  return TreeBuilder(features, targets, part_landmarks, params, seed).build(samples);
}

}  // namespace ertalign

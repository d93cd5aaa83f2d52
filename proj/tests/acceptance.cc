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

// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number (e.g. `acceptance 4 8`).

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ertalign/corpus.h"
#include "ertalign/error.h"
#include "ertalign/experiments.h"
#include "ertalign/metrics.h"
#include "ertalign/model_io.h"
#include "ertalign/pipeline.h"
#include "ertalign/random.h"
#include "ertalign/synth.h"
#include "ertalign/tree.h"
#include "test_util.h"

namespace ertalign {
namespace {

using testing::data_file;
using testing::face24_model;
using testing::face24_schema;

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. Split oracle

Outcome split_oracle() {
  const auto start = std::chrono::steady_clock::now();
  int mismatches = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(mix_seed(seed, {0xacc1}));
    const int n = 2 + static_cast<int>(rng() % 31);
    const int landmarks = 1 + static_cast<int>(rng() % 10);
    const int dims = 2 * landmarks;
    const int c = 1 + static_cast<int>(rng() % 16);
    std::vector<double> residuals(static_cast<std::size_t>(n) * dims);
    for (double& r : residuals) r = uniform(rng, -5, 5);
    std::vector<int> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = i;
    std::vector<SplitParams> candidates;
    for (int k = 0; k < c; ++k) candidates.push_back({uniform(rng, -0.2, 0.2), 0, 1, 0});
    std::vector<double> features(static_cast<std::size_t>(n) * c);
    for (double& f : features) f = std::round(uniform(rng, -0.3, 0.3) * 10) / 10;

    // Exhaustive minimum; the lowest index wins exact ties.
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c; ++k) {
      std::vector<int> side[2];
      for (int i = 0; i < n; ++i) side[features[i * c + k] > candidates[k].tau].push_back(i);
      double cost = 0;
      for (const auto& s : side) {
        if (s.empty()) continue;
        for (int d = 0; d < dims; ++d) {
          double mean = 0;
          for (int i : s) mean += residuals[i * dims + d];
          mean /= static_cast<double>(s.size());
          for (int i : s) cost += std::pow(residuals[i * dims + d] - mean, 2);
        }
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = k;
      }
    }
    const NodeFit fit = fit_node({residuals.data(), dims}, samples, candidates, features);
    if (fit.candidate != best || std::abs(fit.cost - best_cost) > 1e-9 * (1 + best_cost)) {
      ++mismatches;
    }
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 10, fmt("%d/100 mismatches, %.2f s", mismatches, t)};
}

// ---------------------------------------------------------------------------
// 2. Pose recovery

Outcome pose_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const Model3D& model = face24_model();
  const Camera camera = Camera::for_crop(160, 160);
  Rng rng(2024);
  int good = 0;
  double worst_rot = 0, worst_depth = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    RigidPose truth;
    truth.camera = camera;
    truth.rotation = rotation_from_euler(uniform(rng, -60, 60) * kDeg,
                                         uniform(rng, -45, 45) * kDeg,
                                         uniform(rng, -45, 45) * kDeg);
    truth.translation = {uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, 600, 1000)};
    const Projection proj = project_points(model, truth);
    std::vector<Correspondence> pairs;
    for (int l : model.distinct_ids) pairs.push_back({proj.coords[l], model.points[l]});
    const RigidPose est = fit_pose(pairs, camera);
    const double rot = rotation_angle_between(est.rotation, truth.rotation) / kDeg;
    const double depth =
        std::abs(est.translation.z() - truth.translation.z()) / truth.translation.z();
    worst_rot = std::max(worst_rot, rot);
    worst_depth = std::max(worst_depth, depth);
    if (rot < 1.0 && depth < 0.01) ++good;
  }
  const double t = seconds_since(start);
  return {good >= 990 && t < 30,
          fmt("%d/1000 within 1 deg and 1%% depth (worst %.2g deg, %.2g), %.2f s", good,
              worst_rot, worst_depth, t)};
}

// ---------------------------------------------------------------------------
// 3. Robust initialisation under outliers

Outcome ransac_robustness() {
  const auto start = std::chrono::steady_clock::now();
  const Model3D& model = face24_model();
  const Camera camera = Camera::for_crop(160, 160);
  SynthConfig maps_cfg;
  maps_cfg.coordinate_noise_sigma = 0.0;
  const int outliers = model.size() / 4;
  int good = 0;
  bool monotone = true;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(mix_seed(3, {static_cast<uint64_t>(trial)}));
    RigidPose truth;
    truth.camera = camera;
    truth.rotation = rotation_from_euler(uniform(rng, -30, 30) * kDeg,
                                         uniform(rng, -15, 15) * kDeg,
                                         uniform(rng, -15, 15) * kDeg);
    truth.translation = {uniform(rng, -3, 3), uniform(rng, -3, 3), 800};
    const Projection proj = project_points(model, truth);
    Shape gt(model.size());
    gt.coords = proj.coords;
    gt.visibility = proj.visibility;
    // Exactly a quarter of the peaks move to uniform positions.
    Shape peaks = gt;
    std::vector<int> ids(model.size());
    for (int l = 0; l < model.size(); ++l) ids[l] = l;
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int k = 0; k < outliers; ++k) {
      peaks.coords[ids[k]] = {uniform(rng, 0, 160), uniform(rng, 0, 160)};
    }
    const BlobMaps maps = synthesize_blobs(peaks, 160, 160, maps_cfg, rng());
    const uint64_t seed = rng();
    const InitResult r = robust_init(maps, model, camera, {25, 6}, seed);

    double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9, err = 0;
    for (int l = 0; l < gt.size(); ++l) {
      min_x = std::min(min_x, gt.coords[l].x);
      max_x = std::max(max_x, gt.coords[l].x);
      min_y = std::min(min_y, gt.coords[l].y);
      max_y = std::max(max_y, gt.coords[l].y);
      err += distance(r.shape.coords[l], gt.coords[l]);
    }
    err /= gt.size();
    const double face = std::sqrt((max_x - min_x) * (max_y - min_y));
    if (err < 0.05 * face) ++good;

    if (trial < 40) {
      double previous = -std::numeric_limits<double>::infinity();
      for (int z = 1; z <= 30; ++z) {
        const double score = robust_init(maps, model, camera, {z, 6}, seed).score;
        if (score < previous) monotone = false;
        previous = score;
      }
    }
  }
  const double t = seconds_since(start);
  return {good >= 190 && monotone && t < 60,
          fmt("%d/200 below 5%% of face size, score monotone in Z: %s, %.2f s", good,
              monotone ? "yes" : "no", t)};
}

// ---------------------------------------------------------------------------
// Shared end-to-end run for criteria 4 and 5.

struct EndToEnd {
  double init_nme = 0;
  double final_nme = 0;
  TrainLog log;
  double seconds = 0;
};

std::vector<Shape> to_image(const std::vector<Prediction>& preds, const Dataset& data,
                            bool initial) {
  std::vector<Shape> out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const CropFrame frame{data.samples[i].bbox, 160, 160};
    Shape s = initial ? preds[i].initial : preds[i].shape;
    if (initial) {
      for (auto& p : s.coords) p = frame.to_image(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

const EndToEnd& end_to_end() {
  static const EndToEnd result = [] {
    const auto start = std::chrono::steady_clock::now();
    SynthCorpusConfig synth;
    synth.count = 2500;
    synth.seed = 404;
    synth.maps.coordinate_noise_sigma = 1.5;
    synth.maps.outlier_rate = 0.10;
    const Dataset all = make_corpus(face24_model(), face24_schema(), synth);
    const MapProviders providers = synthetic_providers(synth.maps, synth.seed, synth.crop);
    Dataset trainval, test;
    trainval.schema = test.schema = all.schema;
    trainval.samples.assign(all.samples.begin(), all.samples.begin() + 2000);
    test.samples.assign(all.samples.begin() + 2000, all.samples.end());
    auto [train, val] = split_train_val(trainval, 0.1, 5);

    PipelineConfig config;
    config.train.max_stages = 20;
    config.train.coarse_trees = 50;
    config.train.fine_trees = 50;
    config.train.candidates = 200;
    config.augmented_count = 10000;
    config.train.seed = 17;
    PipelineResult r = train_model(train, val, providers, providers, standard_freak_pattern(),
                                   face24_model(), config);
    const auto preds = predict_all(r.model, test, providers, 1);
    EndToEnd out;
    out.init_nme = evaluate(to_image(preds, test, true), test, Normalization::kHeight, 8).nme;
    out.final_nme = evaluate(to_image(preds, test, false), test, Normalization::kHeight, 8).nme;
    out.log = std::move(r.log);
    out.seconds = seconds_since(start);
    return out;
  }();
  return result;
}

Outcome nme_reduction() {
  const EndToEnd& e = end_to_end();
  return {e.final_nme <= 0.5 * e.init_nme && e.seconds < 600,
          fmt("test NME %.3f -> %.3f (%.1f%% of init), %zu stages, fine from %d, %.1f s",
              e.init_nme, e.final_nme, 100 * e.final_nme / e.init_nme, e.log.stages.size(),
              e.log.fine_from.value_or(0), e.seconds)};
}

Outcome monotone_training() {
  const EndToEnd& e = end_to_end();
  double previous = e.log.initial_train_nme;
  int violations = 0;
  std::ostringstream curve;
  curve << fmt("%.3f", previous);
  for (const auto& s : e.log.stages) {
    if (s.train_nme > previous + 1e-9) ++violations;
    previous = s.train_nme;
    curve << fmt(" %.3f", s.train_nme);
  }
  return {violations == 0, fmt("%d increases; train NME %s", violations, curve.str().c_str())};
}

// ---------------------------------------------------------------------------
// 6. Early stopping

struct SmallSetup {
  Dataset train, val, test;
  MapProviders providers;
};

SmallSetup small_setup(int count, uint64_t seed, const SynthCorpusConfig& base = {}) {
  SynthCorpusConfig synth = base;
  synth.count = count;
  synth.seed = seed;
  const Dataset all = make_corpus(face24_model(), face24_schema(), synth);
  SmallSetup s;
  s.providers = synthetic_providers(synth.maps, synth.seed, synth.crop);
  auto [trainval, test] = split_train_val(all, 0.2, seed);
  auto [train, val] = split_train_val(trainval, 0.15, seed + 1);
  s.train = std::move(train);
  s.val = std::move(val);
  s.test = std::move(test);
  return s;
}

PipelineConfig tiny_budget() {
  PipelineConfig c;
  c.train.max_stages = 20;
  c.train.coarse_trees = 3;
  c.train.fine_trees = 2;
  c.train.candidates = 20;
  c.train.depth = 3;
  return c;
}

Outcome early_stopping() {
  const SmallSetup s = small_setup(120, 6);
  // Plateau after the fourth stage: 10%, 8%, 5%, 2%, then 0.4% per stage.
  const std::vector<double> improvements{0.10, 0.08, 0.05, 0.02, 0.004, 0.004, 0.004};
  TrainHooks plateau;
  plateau.validation_nme = [&](int stage, double) {
    double v = 10.0;
    for (int k = 0; k < stage; ++k) v *= 1.0 - improvements[std::min<std::size_t>(k, 6)];
    return v;
  };
  const PipelineConfig config = tiny_budget();
  const PipelineResult a = train_model(s.train, s.val, s.providers, s.providers,
                                       standard_freak_pattern(), face24_model(), config, plateau);
  // A steadily improving sequence never stops early and must respect T.
  TrainHooks steady;
  steady.validation_nme = [](int stage, double) { return 10.0 * std::pow(0.9, stage); };
  const PipelineResult b = train_model(s.train, s.val, s.providers, s.providers,
                                       standard_freak_pattern(), face24_model(), config, steady);
  const bool ok = a.model.stages.size() == 5 && b.model.stages.size() == 20 &&
                  b.log.stages.size() == 20;
  return {ok, fmt("plateau stops after %zu stages (expected 5); steady run %zu/20 stages",
                  a.model.stages.size(), b.model.stages.size())};
}

// ---------------------------------------------------------------------------
// 7. Missing annotations

Outcome missing_annotations() {
  SynthCorpusConfig synth;
  synth.missing_rate = 0.3;
  synth.never_annotated = {"chin", "left_ear_lobe", "right_ear_lobe"};
  const SmallSetup s = small_setup(300, 7, synth);
  PipelineConfig config = tiny_budget();
  config.train.max_stages = 6;
  config.train.coarse_trees = 10;
  config.train.fine_trees = 5;
  config.augmented_count = 600;
  config.train.early_stopping = false;
  // Switch to per-part stages after the first one so that the chin's own
  // part, which has no annotation at all, is trained as well.
  TrainHooks hooks;
  hooks.validation_nme = [](int stage, double) { return 1e6 / (stage + 1); };
  const PipelineResult r = train_model(s.train, s.val, s.providers, s.providers,
                                       standard_freak_pattern(), face24_model(), config, hooks);
  std::vector<int> never;
  for (const auto& n : synth.never_annotated) never.push_back(*face24_schema().index_of(n));
  int moved = 0, checked = 0;
  for (const auto& p : predict_all(r.model, s.test, s.providers, 1)) {
    for (int l : never) {
      ++checked;
      if (std::bit_cast<uint64_t>(p.crop_shape.coords[l].x) !=
              std::bit_cast<uint64_t>(p.initial.coords[l].x) ||
          std::bit_cast<uint64_t>(p.crop_shape.coords[l].y) !=
              std::bit_cast<uint64_t>(p.initial.coords[l].y)) {
        ++moved;
      }
    }
  }
  return {moved == 0 && checked > 0,
          fmt("%zu stages trained (fine from %d); %d of %d never-annotated coordinates moved",
              r.model.stages.size(), r.log.fine_from.value_or(0), moved, checked)};
}

// ---------------------------------------------------------------------------
// 8. Coarse-to-fine on unseen part combinations

struct CoarseToFineRun {
  double cf = 0, mono = 0;
};

CoarseToFineRun coarse_to_fine_replication(int replication) {
  const uint64_t seed = mix_seed(88, {static_cast<uint64_t>(replication)});
  SynthCorpusConfig synth;
  synth.seed = seed;
  synth.deformation = 6.0;
  synth.maps.coordinate_noise_sigma = 1.0;
  synth.maps.outlier_rate = 0.05;
  synth.coupling = Coupling::kCorrelated;
  synth.count = 500;
  const Dataset train_all = make_corpus(face24_model(), face24_schema(), synth);
  auto [train, val] = split_train_val(train_all, 0.1, seed);
  synth.coupling = Coupling::kAnticorrelated;
  synth.count = 150;
  synth.seed = seed + 1;
  const Dataset test = make_corpus(face24_model(), face24_schema(), synth);
  // Both corpora share map settings; the seed only decides per-face noise.
  const MapProviders train_maps = synthetic_providers(synth.maps, seed, synth.crop);
  const MapProviders test_maps = synthetic_providers(synth.maps, seed + 1, synth.crop);

  PipelineConfig config;
  config.train.max_stages = 8;
  config.train.coarse_trees = 15;
  config.train.fine_trees = 15;
  config.train.candidates = 50;
  config.train.early_stopping = false;
  config.train.seed = seed;
  CoarseToFineRun out;
  const int parts = face24_schema().part_count();
  for (bool cf : {true, false}) {
    config.train.coarse_to_fine = cf;
    // The monolithic model gets as many trees per stage as a fine stage
    // (K2 per part times the part count), so it never has fewer trees.
    config.train.coarse_trees = cf ? 15 : 15 * parts;
    const PipelineResult r = train_model(train, val, train_maps, train_maps,
                                         standard_freak_pattern(), face24_model(), config);
    const auto preds = predict_all(r.model, test, test_maps, 1);
    const double nme = evaluate(to_image(preds, test, false), test, Normalization::kHeight, 8).nme;
    (cf ? out.cf : out.mono) = nme;
  }
  return out;
}

Outcome coarse_to_fine() {
  const auto start = std::chrono::steady_clock::now();
  int wins = 0;
  std::ostringstream detail;
  for (int rep = 0; rep < 10; ++rep) {
    const CoarseToFineRun r = coarse_to_fine_replication(rep);
    if (r.cf < r.mono) ++wins;
    detail << fmt(" %.2f/%.2f", r.cf, r.mono);
  }
  return {wins >= 8, fmt("coarse-to-fine better in %d/10 (cf/mono:%s), %.1f s", wins,
                         detail.str().c_str(), seconds_since(start))};
}

// ---------------------------------------------------------------------------
// 9. Metric examples

Outcome metric_examples() {
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };
  {
    Shape a(3);
    a.coords = {{1, 2}, {3, 4}, {5, 6}};
    check(nme(a, a, 10) == 0.0, "nme identical");
    Shape gt(1), pred(1);
    pred.coords[0] = {3, 4};
    check(nme(pred, gt, 100) == 5.0, "nme offset 5");
    Shape gt2(2), pred2(2);
    gt2.annotated[1] = 0;
    pred2.coords[0] = {4, 0};
    pred2.coords[1] = {1000, 0};
    check(nme(pred2, gt2, 100) == 4.0, "nme mask");
    Shape none(2);
    none.annotated = {0, 0};
    bool threw = false;
    try {
      nme(pred2, none, 100);
    } catch (const DataError&) {
      threw = true;
    }
    check(threw, "nme all unannotated");
  }
  {
    const LandmarkSchema& schema = face24_schema();
    Shape gt(24);
    gt.coords[*schema.index_of("left_eye_outer")] = {0, 0};
    gt.coords[*schema.index_of("right_eye_outer")] = {30, 40};
    check(normalizer(gt, {}, Normalization::kCorners, schema) == 50.0, "corners 3-4-5");
    check(normalizer(gt, {5, 5, 90, 90}, Normalization::kHeight, schema) == 90.0, "height");
    Rng rng(9);
    bool pupils = true;
    for (int trial = 0; trial < 20; ++trial) {
      Shape s(24);
      for (auto& p : s.coords) p = {uniform(rng, 0, 100), uniform(rng, 0, 100)};
      Point2 c[2];
      for (int side = 0; side < 2; ++side) {
        const int part = *schema.part_index(side == 0 ? "left_eye" : "right_eye");
        int count = 0;
        for (int l = 0; l < 24; ++l) {
          if (schema[l].part != part) continue;
          c[side].x += s.coords[l].x;
          c[side].y += s.coords[l].y;
          ++count;
        }
        c[side].x /= count;
        c[side].y /= count;
      }
      const double expect = std::hypot(c[0].x - c[1].x, c[0].y - c[1].y);
      pupils = pupils &&
               std::abs(normalizer(s, {}, Normalization::kPupils, schema) - expect) < 1e-12;
    }
    check(pupils, "pupils oracle");
  }
  {
    const std::vector<double> zeros(5, 0.0), big{9, 10, 11}, half{0, 16};
    check(auc_fr(zeros, 8).auc == 1.0 && auc_fr(zeros, 8).fr == 0.0, "auc all zero");
    check(auc_fr(big, 8).auc == 0.0 && auc_fr(big, 8).fr == 100.0, "auc all failures");
    check(auc_fr(half, 8).auc == 0.5 && auc_fr(half, 8).fr == 50.0, "auc half mass");
  }
  {
    const std::vector<double> gt{1, 0, 1, 0, 1, 1, 1, 1};
    const OcclusionPR perfect = occlusion_pr(gt, gt);
    check(perfect.precision == 100.0 && perfect.recall == 100.0, "occlusion perfect");
    const std::vector<double> all_occluded(8, 0.0);
    const OcclusionPR all = occlusion_pr(all_occluded, gt);
    check(all.precision == 25.0 && all.recall == 100.0, "occlusion all predicted");
    const std::vector<double> none_occluded(8, 1.0);
    const OcclusionPR none = occlusion_pr(none_occluded, gt);
    check(!none.precision.has_value() && none.recall == 0.0, "occlusion none predicted");
  }
  std::string detail = failed.empty() ? "all examples reproduced" : "failed:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------------------
// 10. Cross-dataset bias

Outcome cross_dataset() {
  const auto start = std::chrono::steady_clock::now();
  const auto& modes = deformation_modes();
  auto corpus = [&](const std::string& name, double sign, uint64_t seed) {
    SynthCorpusConfig synth;
    synth.count = 700;
    synth.seed = seed;
    synth.deformation = 4.0;
    synth.maps.coordinate_noise_sigma = 1.0;
    synth.maps.outlier_rate = 0.05;
    synth.mode_means.assign(modes.size(), 0.0);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      if (modes[m].name == "jaw_open" || modes[m].name == "smile") synth.mode_means[m] = 1.5 * sign;
      if (modes[m].name == "brow_raise") synth.mode_means[m] = -1.5 * sign;
    }
    return NamedCorpus{name, make_corpus(face24_model(), face24_schema(), synth),
                       synthetic_providers(synth.maps, seed, synth.crop)};
  };
  const std::vector<NamedCorpus> corpora{corpus("A", 1.0, 1001), corpus("B", -1.0, 1002)};
  CrossOptions options;
  options.seed = 10;
  options.pipeline.train.max_stages = 8;
  options.pipeline.train.coarse_trees = 20;
  options.pipeline.train.fine_trees = 10;
  options.pipeline.train.candidates = 50;
  options.pipeline.train.seed = 10;
  options.pipeline.augment.rotation_deg = 15;
  options.pipeline.augmented_count = 0;
  const CrossResult r =
      cross_experiment(corpora, standard_freak_pattern(), face24_model(), options);
  const auto& m = r.matrix.nme;  // rows A, B, All; columns A, B, All
  const bool bias = m[0][0] <= m[0][1] && m[1][1] <= m[1][0];
  const bool pooled = m[2][1] < m[0][1] && m[2][0] < m[1][0];
  return {bias && pooled,
          fmt("A->A %.3f A->B %.3f B->B %.3f B->A %.3f All->A %.3f All->B %.3f, %.1f s",
              m[0][0], m[0][1], m[1][1], m[1][0], m[2][0], m[2][1], seconds_since(start))};
}

// ---------------------------------------------------------------------------
// 11. Determinism and serialisation

Outcome determinism() {
  const SmallSetup s = small_setup(120, 11);
  PipelineConfig config = tiny_budget();
  config.train.max_stages = 4;
  config.augmented_count = 300;
  config.train.workers = 2;
  const auto train = [&] {
    return train_model(s.train, s.val, s.providers, s.providers, standard_freak_pattern(),
                       face24_model(), config)
        .model;
  };
  const CascadeModel a = train(), b = train();
  const std::string bytes = encode_model(a);
  const bool same_bytes = bytes == encode_model(b);
  const testing::TempDir dir("acceptance");
  save_model(a, dir / "m.ertm");
  const CascadeModel loaded = load_model(dir / "m.ertm");
  const auto before = predict_all(a, s.test, s.providers, 1);
  const auto after = predict_all(loaded, s.test, s.providers, 1);
  bool same_predictions = before.size() == after.size();
  for (std::size_t i = 0; same_predictions && i < before.size(); ++i) {
    same_predictions = before[i].shape == after[i].shape;
  }
  return {same_bytes && same_predictions,
          fmt("model bytes identical: %s; reloaded predictions bit-identical: %s",
              same_bytes ? "yes" : "no", same_predictions ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 12. Inference budget

Outcome inference_budget() {
  const LandmarkSchema schema = load_schema(data_file("face68.schema"));
  const Model3D model = load_model3d(data_file("face68.model3d"));
  SynthCorpusConfig synth;
  synth.count = 80;
  synth.seed = 12;
  const Dataset all = make_corpus(model, schema, synth);
  const MapProviders providers = synthetic_providers(synth.maps, synth.seed, synth.crop);
  auto [train, val] = split_train_val(all, 0.25, 1);

  PipelineConfig config;
  config.train.max_stages = 20;
  config.train.coarse_trees = 50;
  config.train.fine_trees = 50;
  config.train.candidates = 10;
  config.train.early_stopping = false;
  // Force the fine phase from stage 2 on: the most expensive 20-stage shape.
  TrainHooks hooks;
  hooks.validation_nme = [](int stage, double) { return 1e6 / (stage + 1); };
  const CascadeModel m = train_model(train, val, providers, providers, standard_freak_pattern(),
                                     model, config, hooks)
                             .model;
  int fine = 0;
  for (const auto& s : m.stages) fine += s.fine ? 1 : 0;

  // Dense maps rendered up front so that only inference is timed.
  std::vector<ProbabilityMaps> maps;
  for (const auto& s : val.samples) maps.push_back(render(*providers.maps(s)));
  const auto start = std::chrono::steady_clock::now();
  double checksum = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    checksum += predict(m, maps[i], val.samples[i].bbox).shape.coords[0].x;
  }
  const double ms = 1000.0 * seconds_since(start) / static_cast<double>(maps.size());
  return {ms <= 20.0 && m.stages.size() == 20 && std::isfinite(checksum),
          fmt("%.2f ms/face over %zu faces (68 landmarks, %zu stages, %d fine, 50 trees/part)",
              ms, maps.size(), m.stages.size(), fine)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace ertalign

int main(int argc, char** argv) {
  using namespace ertalign;
  const std::vector<Criterion> criteria{
      {1, "split-oracle equivalence", split_oracle},
      {2, "pose recovery", pose_recovery},
      {3, "robust init under outliers", ransac_robustness},
      {4, "end-to-end NME reduction", nme_reduction},
      {5, "monotone training curve", monotone_training},
      {6, "early stopping", early_stopping},
      {7, "missing-annotation safety", missing_annotations},
      {8, "coarse-to-fine on unseen combinations", coarse_to_fine},
      {9, "metric examples", metric_examples},
      {10, "cross-dataset bias", cross_dataset},
      {11, "determinism and serialisation", determinism},
      {12, "inference budget", inference_budget},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
              << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

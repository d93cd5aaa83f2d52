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

// Landmark evaluation: normalised mean error, cumulative error distribution,
// AUC / failure rate at a threshold, occlusion precision/recall and the
// cross-dataset error matrix.

#ifndef ERTALIGN_METRICS_H_
#define ERTALIGN_METRICS_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ertalign/shape_data.h"

namespace ertalign {

enum class Normalization { kPupils, kCorners, kHeight };

Normalization parse_normalization(const std::string& name);
std::string to_string(Normalization n);

// 100 * mean over annotated landmarks of |pred - gt| / d. Throws DataError
// when no landmark is annotated and std::invalid_argument unless d > 0.
double nme(const Shape& pred, const Shape& gt, double d);

// pupils: distance between eye centres, each the mean of the annotated
// landmarks of the parts named left_eye / right_eye.
// corners: distance between left_eye_outer and right_eye_outer.
// height: sqrt(bbox.width * bbox.height).
double normalizer(const Shape& gt, const Rect& bbox, Normalization mode,
                  const LandmarkSchema& schema);

struct AucFr {
  double auc = 0.0;  // in [0,1]
  double fr = 0.0;   // percent
};

// Exact integral of the empirical CED step function over [0, epsilon].
AucFr auc_fr(std::span<const double> errors, double epsilon);

// (e, CED(e)) at every distinct error value, ascending.
std::vector<std::pair<double, double>> ced_curve(std::span<const double> errors);

struct OcclusionPR {
  std::optional<double> precision;  // percent; empty when nothing is predicted occluded
  std::optional<double> recall;     // percent; empty when nothing is occluded
};

// A landmark is predicted occluded when pred_vis < threshold and is occluded
// when gt_vis < 0.5. Counts run over every entry of the flattened inputs.
OcclusionPR occlusion_pr(std::span<const double> pred_vis, std::span<const double> gt_vis,
                         double threshold = 0.5);

struct EvalReport {
  std::vector<double> per_image_nme;
  double nme = 0.0;
  double auc = 0.0;
  double fr = 0.0;
  std::vector<double> per_landmark_nme;  // mean over images where the landmark is annotated
  std::optional<double> occlusion_precision;
  std::optional<double> occlusion_recall;
  Normalization normalization = Normalization::kHeight;
  double epsilon = 8.0;
};

// Predictions are in image coordinates and aligned with `truth.samples`.
// Occlusion statistics use annotated landmarks only.
EvalReport evaluate(std::span<const Shape> predictions, const Dataset& truth,
                    Normalization normalization, double epsilon,
                    double occlusion_threshold = 0.5);

// Plain-text report with one "key value" line per scalar, then the
// per-landmark breakdown.
std::string format_report(const EvalReport& report, const LandmarkSchema& schema);
std::string format_ced(std::span<const double> errors);

// Cross-dataset evaluation over the distinct landmarks shared (by name) by
// every model and test schema.
struct CrossModel {
  std::string name;
  LandmarkSchema schema;
  // Image-frame prediction for sample `index` of test set `test`.
  std::function<Shape(std::size_t test, std::size_t index)> predict;
};

struct CrossTest {
  std::string name;
  const Dataset* data = nullptr;
};

struct CrossMatrix {
  std::vector<std::string> rows;     // models
  std::vector<std::string> columns;  // test sets
  std::vector<std::string> landmarks;
  std::vector<std::vector<double>> nme;
};

// Distinct landmark names present in every schema, in the order of the first.
std::vector<std::string> shared_distinct_landmarks(std::span<const LandmarkSchema> schemas);

// Throws SchemaError when fewer than `min_shared` distinct landmarks are
// shared.
CrossMatrix cross_matrix(std::span<const CrossModel> models, std::span<const CrossTest> tests,
                         int min_shared = 24);

std::string format_cross_matrix(const CrossMatrix& matrix);

}  // namespace ertalign

#endif  // ERTALIGN_METRICS_H_

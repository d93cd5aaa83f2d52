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

#include "ertalign/metrics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ertalign/error.h"

namespace ertalign {

Normalization parse_normalization(const std::string& name) {
  if (name == "pupils") return Normalization::kPupils;
  if (name == "corners") return Normalization::kCorners;
  if (name == "height") return Normalization::kHeight;
  throw UsageError("unknown normalization '" + name + "' (pupils|corners|height)");
}

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::kPupils: return "pupils";
    case Normalization::kCorners: return "corners";
    case Normalization::kHeight: return "height";
  }
  return "height";
}

double nme(const Shape& pred, const Shape& gt, double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("normalizer must be positive");
  if (pred.size() != gt.size()) throw SchemaError("prediction and truth disagree on L");
  double sum = 0.0;
  int count = 0;
  for (int l = 0; l < gt.size(); ++l) {
    if (!gt.annotated[l]) continue;
    sum += distance(pred.coords[l], gt.coords[l]);
    ++count;
  }
  if (count == 0) throw DataError("nme is undefined without annotated landmarks");
  return 100.0 * sum / count / d;
}

namespace {

Point2 part_center(const Shape& gt, const LandmarkSchema& schema, const std::string& part) {
  const auto p = schema.part_index(part);
  if (!p) throw SchemaError("schema has no part named " + part);
  Point2 sum;
  int count = 0;
  const auto parts = schema.parts();
  for (int l : parts[*p]) {
    if (!gt.annotated[l]) continue;
    sum = sum + gt.coords[l];
    ++count;
  }
  if (count == 0) throw DataError("no annotated landmark in part " + part);
  return (1.0 / count) * sum;
}

Point2 named_point(const Shape& gt, const LandmarkSchema& schema, const std::string& name) {
  const auto l = schema.index_of(name);
  if (!l) throw SchemaError("schema has no landmark named " + name);
  if (!gt.annotated[*l]) throw DataError("landmark " + name + " is not annotated");
  return gt.coords[*l];
}

}  // namespace

double normalizer(const Shape& gt, const Rect& bbox, Normalization mode,
                  const LandmarkSchema& schema) {
  switch (mode) {
    case Normalization::kPupils:
      return distance(part_center(gt, schema, "left_eye"), part_center(gt, schema, "right_eye"));
    case Normalization::kCorners:
      return distance(named_point(gt, schema, "left_eye_outer"),
                      named_point(gt, schema, "right_eye_outer"));
    case Normalization::kHeight:
      if (!(bbox.width > 0.0 && bbox.height > 0.0)) throw DataError("degenerate bounding box");
      return std::sqrt(bbox.width * bbox.height);
  }
  return 0.0;
}

AucFr auc_fr(std::span<const double> errors, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (errors.empty()) throw std::invalid_argument("no errors to summarise");
  // The CED step of image i covers [e_i, epsilon]; its area is the clipped
  // length of that interval.
  double area = 0.0;
  int failures = 0;
  for (double e : errors) {
    area += std::max(0.0, epsilon - e);
    if (e > epsilon) ++failures;
  }
  const double n = static_cast<double>(errors.size());
  return {area / (n * epsilon), 100.0 * failures / n};
}

std::vector<std::pair<double, double>> ced_curve(std::span<const double> errors) {
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.emplace_back(sorted[i], (i + 1) / n);
  }
  return out;
}

OcclusionPR occlusion_pr(std::span<const double> pred_vis, std::span<const double> gt_vis,
                         double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("occlusion threshold must lie in (0,1)");
  }
  if (pred_vis.size() != gt_vis.size()) throw std::invalid_argument("visibility size mismatch");
  long tp = 0, predicted = 0, actual = 0;
  for (std::size_t i = 0; i < pred_vis.size(); ++i) {
    const bool p = pred_vis[i] < threshold;
    const bool a = gt_vis[i] < 0.5;
    predicted += p;
    actual += a;
    tp += p && a;
  }
  OcclusionPR out;
  if (predicted > 0) out.precision = 100.0 * tp / predicted;
  if (actual > 0) out.recall = 100.0 * tp / actual;
  return out;
}

EvalReport evaluate(std::span<const Shape> predictions, const Dataset& truth,
                    Normalization normalization, double epsilon, double occlusion_threshold) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("one prediction per test sample is required");
  }
  if (truth.empty()) throw DataError("empty test set");
  const int landmarks = truth.schema.size();
  EvalReport r;
  r.normalization = normalization;
  r.epsilon = epsilon;
  std::vector<double> lm_sum(landmarks, 0.0);
  std::vector<int> lm_count(landmarks, 0);
  std::vector<double> pred_vis, gt_vis;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Sample& s = truth.samples[i];
    const Shape& pred = predictions[i];
    const double d = normalizer(s.ground_truth, s.bbox, normalization, truth.schema);
    r.per_image_nme.push_back(nme(pred, s.ground_truth, d));
    for (int l = 0; l < landmarks; ++l) {
      if (!s.ground_truth.annotated[l]) continue;
      lm_sum[l] += 100.0 * distance(pred.coords[l], s.ground_truth.coords[l]) / d;
      ++lm_count[l];
      pred_vis.push_back(pred.visibility[l]);
      gt_vis.push_back(s.ground_truth.visibility[l]);
    }
  }
  r.nme = std::accumulate(r.per_image_nme.begin(), r.per_image_nme.end(), 0.0) /
          static_cast<double>(r.per_image_nme.size());
  const AucFr af = auc_fr(r.per_image_nme, epsilon);
  r.auc = af.auc;
  r.fr = af.fr;
  r.per_landmark_nme.resize(landmarks);
  for (int l = 0; l < landmarks; ++l) {
    r.per_landmark_nme[l] = lm_count[l] > 0 ? lm_sum[l] / lm_count[l] : std::nan("");
  }
  const OcclusionPR pr = occlusion_pr(pred_vis, gt_vis, occlusion_threshold);
  r.occlusion_precision = pr.precision;
  r.occlusion_recall = pr.recall;
  return r;
}

namespace {

std::string optional_value(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream out;
  out << std::setprecision(10) << *v;
  return out.str();
}

}  // namespace

std::string format_report(const EvalReport& report, const LandmarkSchema& schema) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "normalization " << to_string(report.normalization) << '\n';
  out << "epsilon " << report.epsilon << '\n';
  out << "images " << report.per_image_nme.size() << '\n';
  out << "nme " << report.nme << '\n';
  out << "auc " << report.auc << '\n';
  out << "fr " << report.fr << '\n';
  out << "occlusion_precision " << optional_value(report.occlusion_precision) << '\n';
  out << "occlusion_recall " << optional_value(report.occlusion_recall) << '\n';
  out << "# landmark nme\n";
  for (int l = 0; l < schema.size(); ++l) {
    out << "landmark " << schema[l].name << ' ' << report.per_landmark_nme[l] << '\n';
  }
  return out.str();
}

std::string format_ced(std::span<const double> errors) {
  std::ostringstream out;
  out << std::setprecision(10) << "# nme ced\n";
  for (const auto& [e, c] : ced_curve(errors)) out << e << ' ' << c << '\n';
  return out.str();
}

std::vector<std::string> shared_distinct_landmarks(std::span<const LandmarkSchema> schemas) {
  std::vector<std::string> out;
  if (schemas.empty()) return out;
  for (int l : schemas.front().distinct_ids()) {
    const std::string& name = schemas.front()[l].name;
    const bool everywhere = std::all_of(schemas.begin() + 1, schemas.end(), [&](const auto& s) {
      const auto i = s.index_of(name);
      return i && s[*i].distinct;
    });
    if (everywhere) out.push_back(name);
  }
  return out;
}

CrossMatrix cross_matrix(std::span<const CrossModel> models, std::span<const CrossTest> tests,
                         int min_shared) {
  std::vector<LandmarkSchema> schemas;
  for (const auto& m : models) schemas.push_back(m.schema);
  for (const auto& t : tests) schemas.push_back(t.data->schema);
  CrossMatrix out;
  out.landmarks = shared_distinct_landmarks(schemas);
  if (static_cast<int>(out.landmarks.size()) < min_shared) {
    throw SchemaError("only " + std::to_string(out.landmarks.size()) +
                      " distinct landmarks are shared; need " + std::to_string(min_shared));
  }
  for (const auto& m : models) out.rows.push_back(m.name);
  for (const auto& t : tests) out.columns.push_back(t.name);
  const int k = static_cast<int>(out.landmarks.size());
  out.nme.assign(models.size(), std::vector<double>(tests.size(), 0.0));
  for (std::size_t ti = 0; ti < tests.size(); ++ti) {
    const Dataset& test = *tests[ti].data;
    std::vector<int> test_ids(k);
    for (int j = 0; j < k; ++j) test_ids[j] = *test.schema.index_of(out.landmarks[j]);
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      std::vector<int> model_ids(k);
      for (int j = 0; j < k; ++j) model_ids[j] = *models[mi].schema.index_of(out.landmarks[j]);
      double sum = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        const Sample& s = test.samples[i];
        const Shape full = models[mi].predict(ti, i);
        Shape pred(k), gt(k);
        for (int j = 0; j < k; ++j) {
          pred.coords[j] = full.coords[model_ids[j]];
          gt.coords[j] = s.ground_truth.coords[test_ids[j]];
          gt.annotated[j] = s.ground_truth.annotated[test_ids[j]];
        }
        sum += nme(pred, gt, normalizer(gt, s.bbox, Normalization::kHeight, test.schema));
      }
      out.nme[mi][ti] = sum / static_cast<double>(test.size());
    }
  }
  return out;
}

std::string format_cross_matrix(const CrossMatrix& matrix) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "# rows: training set, columns: test set, nme (height) over " << matrix.landmarks.size()
      << " distinct landmarks\n";
  out << "train\\test";
  for (const auto& c : matrix.columns) out << ' ' << c;
  out << '\n';
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    out << matrix.rows[r];
    for (double v : matrix.nme[r]) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace ertalign

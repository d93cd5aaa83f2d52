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

#include "ertalign/experiments.h"

#include <iomanip>
#include <map>
#include <sstream>

#include "ertalign/error.h"
#include "ertalign/random.h"

namespace ertalign {

namespace {

// Image refs are prefixed with "<corpus>:" so that pooled sets can find the
// provider of every sample.
class Dispatcher {
 public:
  explicit Dispatcher(std::span<const NamedCorpus> corpora) {
    for (const auto& c : corpora) {
      if (c.name.find(':') != std::string::npos) {
        throw UsageError("corpus names must not contain ':'");
      }
      if (!by_name_.emplace(c.name, &c.providers).second) {
        throw UsageError("duplicate corpus name " + c.name);
      }
    }
  }

  MapProviders providers() const {
    MapProviders p;
    p.maps = [this](const Sample& s) { return route(s, false); };
    p.gray = [this](const Sample& s) { return route(s, true); };
    return p;
  }

 private:
  std::shared_ptr<const MapSource> route(const Sample& s, bool gray) const {
    const auto colon = s.image_ref.find(':');
    const auto it = by_name_.find(s.image_ref.substr(0, colon));
    if (colon == std::string::npos || it == by_name_.end()) {
      throw DataError("sample " + s.image_ref + " belongs to no corpus");
    }
    Sample inner = s;
    inner.image_ref = s.image_ref.substr(colon + 1);
    const SampleSourceFn& fn = gray ? it->second->gray : it->second->maps;
    if (!fn) throw DataError("corpus has no intensity source");
    return fn(inner);
  }

  std::map<std::string, const MapProviders*> by_name_;
};

Dataset prefixed(const Dataset& d, const std::string& name) {
  Dataset out = d;
  for (auto& s : out.samples) s.image_ref = name + ":" + s.image_ref;
  return out;
}

Dataset concat(const std::vector<const Dataset*>& parts) {
  Dataset out;
  out.schema = parts.front()->schema;
  for (const Dataset* d : parts) {
    out.samples.insert(out.samples.end(), d->samples.begin(), d->samples.end());
  }
  return out;
}

}  // namespace

CrossResult cross_experiment(std::span<const NamedCorpus> corpora, const FreakPattern& pattern,
                             const std::optional<Model3D>& model3d, const CrossOptions& options) {
  if (corpora.empty()) throw UsageError("cross evaluation needs at least one corpus");
  const Dispatcher dispatch(corpora);
  const MapProviders providers = dispatch.providers();

  struct Split {
    Dataset train, val, test;
  };
  std::vector<Split> splits;
  bool same_schema = true;
  for (std::size_t c = 0; c < corpora.size(); ++c) {
    const Dataset data = prefixed(corpora[c].data, corpora[c].name);
    auto [trainval, test] = split_train_val(data, options.test_fraction, options.seed);
    auto [train, val] = split_train_val(trainval, options.val_fraction,
                                        mix_seed(options.seed, {0x7a1}));
    splits.push_back({std::move(train), std::move(val), std::move(test)});
    same_schema = same_schema && corpora[c].data.schema == corpora.front().data.schema;
  }
  const bool pooled = options.pooled && same_schema && corpora.size() > 1;

  std::vector<CascadeModel> models;
  std::vector<std::string> names;
  CrossResult result;
  for (std::size_t c = 0; c < corpora.size(); ++c) {
    PipelineResult r = train_model(splits[c].train, splits[c].val, providers, providers, pattern,
                                   model3d, options.pipeline);
    models.push_back(std::move(r.model));
    result.logs.push_back(std::move(r.log));
    names.push_back(corpora[c].name);
  }
  std::vector<Dataset> tests;
  for (const auto& s : splits) tests.push_back(s.test);
  if (pooled) {
    std::vector<const Dataset*> trains, vals, all_tests;
    for (const auto& s : splits) {
      trains.push_back(&s.train);
      vals.push_back(&s.val);
      all_tests.push_back(&s.test);
    }
    PipelineResult r = train_model(concat(trains), concat(vals), providers, providers, pattern,
                                   model3d, options.pipeline);
    models.push_back(std::move(r.model));
    result.logs.push_back(std::move(r.log));
    names.push_back("All");
    tests.push_back(concat(all_tests));
  }

  std::vector<CrossModel> rows;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const CascadeModel* model = &models[m];
    rows.push_back({names[m], model->schema,
                    [model, &tests, &providers](std::size_t t, std::size_t i) {
                      const Sample& s = tests[t].samples[i];
                      const auto maps = providers.maps(s);
                      std::shared_ptr<const MapSource> gray;
                      if (model->feature_mode == FeatureMode::kGrayscale) gray = providers.gray(s);
                      return predict(*model, *maps, s.bbox, gray.get()).shape;
                    }});
  }
  std::vector<CrossTest> columns;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    columns.push_back({t < corpora.size() ? corpora[t].name : "All", &tests[t]});
  }
  result.matrix = cross_matrix(rows, columns);
  return result;
}

std::vector<AblationVariant> default_ablation() {
  return {
      {"3D+DE+CF", InitMode::k3D, FeatureMode::kHeatmap, true},
      {"3D+DE", InitMode::k3D, FeatureMode::kHeatmap, false},
      {"3D+SE+CF", InitMode::k3D, FeatureMode::kGrayscale, true},
      {"MS+DE+CF", InitMode::kMeanShape, FeatureMode::kHeatmap, true},
  };
}

std::vector<AblationRow> run_ablation(const Dataset& train, const Dataset& val,
                                      const Dataset& test, const MapProviders& providers,
                                      const FreakPattern& pattern,
                                      const std::optional<Model3D>& model3d,
                                      const PipelineConfig& base,
                                      std::span<const AblationVariant> variants,
                                      Normalization normalization, double epsilon) {
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    PipelineConfig config = base;
    config.init_mode = v.init;
    config.train.feature_mode = v.features;
    config.train.coarse_to_fine = v.coarse_to_fine;
    config.train.tau_range.reset();
    PipelineResult r = train_model(train, val, providers, providers, pattern, model3d, config);
    const auto predictions = predict_all(r.model, test, providers, config.train.workers);
    std::vector<Shape> shapes;
    for (const auto& p : predictions) shapes.push_back(p.shape);
    rows.push_back({v, evaluate(shapes, test, normalization, epsilon),
                    static_cast<int>(r.model.stages.size())});
  }
  return rows;
}

std::string format_ablation(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "# variant nme auc fr stages\n";
  for (const auto& r : rows) {
    out << r.variant.name << ' ' << r.report.nme << ' ' << r.report.auc << ' ' << r.report.fr
        << ' ' << r.stages << '\n';
  }
  return out.str();
}

}  // namespace ertalign

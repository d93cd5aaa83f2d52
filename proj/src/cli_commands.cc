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

#include "ertalign/cli_commands.h"

#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "ertalign/binary_io.h"
#include "ertalign/corpus.h"
#include "ertalign/error.h"
#include "ertalign/experiments.h"
#include "ertalign/model_io.h"
#include "ertalign/random.h"

namespace ertalign {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

FreakPattern pattern_for(const RunConfig& config) {
  if (const auto path = resolved_pattern(config)) return load_pattern(*path);
  return standard_freak_pattern();
}

// The explicit --model3d, or the shipped model whose landmark names match the
// schema.
std::optional<Model3D> model3d_for(const RunConfig& config, const LandmarkSchema& schema) {
  auto matches = [&schema](const Model3D& m) {
    if (m.size() != schema.size()) return false;
    for (int l = 0; l < m.size(); ++l) {
      if (m.names[l] != schema[l].name) return false;
    }
    return true;
  };
  if (!config.model3d.empty()) {
    Model3D m = load_model3d(config.model3d);
    if (!matches(m)) throw SchemaError("3D model landmarks do not match the corpus schema");
    return m;
  }
  for (const char* name : {"face24.model3d", "face68.model3d"}) {
    const fs::path path = data_dir() / name;
    if (!fs::exists(path)) continue;
    Model3D m = load_model3d(path);
    if (matches(m)) return m;
  }
  return std::nullopt;
}

std::optional<Model3D> required_model3d(const RunConfig& config, const LandmarkSchema& schema,
                                        InitMode mode) {
  auto m = model3d_for(config, schema);
  if (!m && mode == InitMode::k3D) {
    throw UsageError("no 3D model matches the corpus schema; pass --model3d or --init mean");
  }
  return m;
}

PipelineConfig pipeline_for(const RunConfig& config, const Corpus& corpus) {
  PipelineConfig p = pipeline_config(config);
  p.crop = corpus.manifest.crop;
  return p;
}

const std::string& test_corpus_path(const RunConfig& config) {
  return config.test_corpus.empty() ? config.corpus : config.test_corpus;
}

fs::path output_dir(const RunConfig& config) {
  const fs::path dir = config.output;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::string on_off(bool v) { return v ? "on" : "off"; }

}  // namespace

std::string format_train_log(const CascadeModel& model, const PipelineConfig& config,
                             const TrainLog& log) {
  const TrainConfig& t = model.config;
  std::ostringstream out;
  out << std::setprecision(8);
  out << "# T=" << t.max_stages;
  if (t.coarse_trees == t.fine_trees) {
    out << " K=" << t.coarse_trees;
  } else {
    out << " K1=" << t.coarse_trees << " K2=" << t.fine_trees;
  }
  out << " depth=" << t.depth << " nu=" << t.shrinkage << " eta=" << t.subsample
      << " Z=" << model.robust.iterations << '\n';
  out << "# init=" << to_string(model.init_mode) << " features=" << to_string(model.feature_mode)
      << " coarse_to_fine=" << on_off(t.coarse_to_fine) << " candidates=" << t.candidates
      << " N_A=" << config.augmented_count << " seed=" << t.seed << '\n';
  out << "# config " << describe_config(model) << '\n';
  out << "stage fine parts trees scale train_nme val_nme improvement\n";
  out << "0 - - - - " << log.initial_train_nme << ' ' << log.initial_val_nme << " -\n";
  for (const auto& s : log.stages) {
    out << s.stage << ' ' << (s.fine ? 1 : 0) << ' ' << s.parts << ' ' << s.trees << ' '
        << s.scale << ' ' << s.train_nme << ' ' << s.val_nme << ' ' << s.improvement << '\n';
  }
  out << "stop T*=" << log.stages.size() << " T=" << t.max_stages << ": " << log.stop_reason
      << '\n';
  return out.str();
}

void cmd_synth(const RunConfig& config, std::ostream& out) {
  const LandmarkSchema schema = load_schema(resolved_schema(config));
  const Model3D model = load_model3d(resolved_model3d(config));
  const SynthCorpusConfig synth = synth_config(config);
  const Dataset data = make_corpus(model, schema, synth);

  CorpusManifest manifest;
  manifest.synthetic = true;
  manifest.crop = synth.crop;
  manifest.seed = synth.seed;
  manifest.maps = synth.maps;
  json generator{{"count", synth.count},
                 {"focal", synth.focal},
                 {"depth", synth.depth},
                 {"yaw_deg", synth.yaw_deg},
                 {"pitch_deg", synth.pitch_deg},
                 {"roll_deg", synth.roll_deg},
                 {"shift_px", synth.shift_px},
                 {"deformation", synth.deformation},
                 {"coupling", to_string(synth.coupling)},
                 {"mode_means", synth.mode_means},
                 {"missing_rate", synth.missing_rate},
                 {"never_annotated", synth.never_annotated}};
  manifest.extra = generator.dump();
  write_corpus(config.output, data, manifest, config.write_maps);
  out << "wrote " << data.size() << " faces to " << config.output << '\n';
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const Corpus corpus = load_corpus(config.corpus);
  const PipelineConfig pipeline = pipeline_for(config, corpus);
  const auto model3d = required_model3d(config, corpus.data.schema, pipeline.init_mode);
  const auto [train, val] =
      split_train_val(corpus.data, config.val_fraction, mix_seed(config.seed, {0x5b1}));
  const MapProviders providers = corpus.providers();
  const PipelineResult result =
      train_model(train, val, providers, providers, pattern_for(config), model3d, pipeline);

  const fs::path dir = output_dir(config);
  save_model(result.model, dir / "model.ertm");
  const std::string log = format_train_log(result.model, pipeline, result.log);
  write_file(dir / "train_log.txt", log);
  out << log;
}

namespace {

struct Evaluated {
  CascadeModel model;
  Corpus corpus;
  std::vector<Prediction> predictions;
};

Evaluated predict_corpus(const RunConfig& config) {
  Evaluated e{load_model(config.model), load_corpus(test_corpus_path(config)), {}};
  e.predictions = predict_all(e.model, e.corpus.data, e.corpus.providers(), config.workers);
  return e;
}

}  // namespace

void cmd_predict(const RunConfig& config, std::ostream& out) {
  const Evaluated e = predict_corpus(config);
  Dataset result;
  result.schema = e.corpus.data.schema;
  int fell_back = 0;
  for (std::size_t i = 0; i < e.predictions.size(); ++i) {
    const Sample& s = e.corpus.data.samples[i];
    const Prediction& p = e.predictions[i];
    const CropFrame frame = e.model.frame(s.bbox);
    Sample r;
    r.image_ref = s.image_ref;
    r.bbox = s.bbox;
    r.ground_truth = p.shape;
    Shape initial = p.initial;
    for (auto& c : initial.coords) c = frame.to_image(c);
    r.initial = std::move(initial);
    result.samples.push_back(std::move(r));
    fell_back += p.init_fell_back ? 1 : 0;
  }
  save_dataset(result, output_dir(config) / "predictions.jsonl");
  out << "predicted " << result.size() << " faces (" << fell_back
      << " initialised from the mean shape)\n";
}

void cmd_eval(const RunConfig& config, std::ostream& out) {
  const Evaluated e = predict_corpus(config);
  std::vector<Shape> shapes;
  shapes.reserve(e.predictions.size());
  for (const auto& p : e.predictions) shapes.push_back(p.shape);
  const EvalReport report = evaluate(shapes, e.corpus.data,
                                     parse_normalization(config.normalization), config.epsilon);
  const fs::path dir = output_dir(config);
  const std::string text = format_report(report, e.corpus.data.schema);
  write_file(dir / "eval_report.txt", text);
  write_file(dir / "ced.txt", format_ced(report.per_image_nme));
  out << text;
}

void cmd_cross(const RunConfig& config, std::ostream& out) {
  std::vector<NamedCorpus> corpora;
  std::optional<Corpus> first;
  for (const auto& entry : config.corpora) {
    const auto eq = entry.find('=');
    const fs::path dir = eq == std::string::npos ? entry : entry.substr(eq + 1);
    std::string name = eq == std::string::npos ? dir.filename().string() : entry.substr(0, eq);
    if (name.empty()) name = dir.parent_path().filename().string();
    Corpus c = load_corpus(dir);
    if (first && c.manifest.crop != first->manifest.crop) {
      throw DataError("corpora disagree on the crop size");
    }
    corpora.push_back({name, c.data, c.providers()});
    if (!first) first = std::move(c);
  }
  CrossOptions options;
  options.pipeline = pipeline_for(config, *first);
  options.test_fraction = config.test_fraction;
  options.val_fraction = config.val_fraction;
  options.pooled = config.pooled;
  options.seed = config.seed;
  const auto model3d =
      required_model3d(config, corpora.front().data.schema, options.pipeline.init_mode);
  const CrossResult result = cross_experiment(corpora, pattern_for(config), model3d, options);
  const std::string text = format_cross_matrix(result.matrix);
  write_file(output_dir(config) / "cross_matrix.txt", text);
  out << text;
}

void cmd_ablate(const RunConfig& config, std::ostream& out) {
  const Corpus corpus = load_corpus(config.corpus);
  const PipelineConfig pipeline = pipeline_for(config, corpus);
  const auto model3d = required_model3d(config, corpus.data.schema, InitMode::k3D);
  const auto [trainval, test] =
      split_train_val(corpus.data, config.test_fraction, mix_seed(config.seed, {0x7e57}));
  const auto [train, val] =
      split_train_val(trainval, config.val_fraction, mix_seed(config.seed, {0x5b1}));
  const auto variants = default_ablation();
  const auto rows = run_ablation(train, val, test, corpus.providers(), pattern_for(config),
                                 model3d, pipeline, variants,
                                 parse_normalization(config.normalization), config.epsilon);
  const std::string text = format_ablation(rows);
  write_file(output_dir(config) / "ablation.txt", text);
  out << text;
}

namespace {

void add_options(CLI::App& app, RunConfig& c) {
  const auto on_off_check = CLI::IsMember({"on", "off"});
  app.set_config("--config", "", "flat key = value file; flags override it");

  app.add_option("--corpus", c.corpus, "corpus directory");
  app.add_option("--test-corpus", c.test_corpus, "evaluation corpus (defaults to --corpus)");
  app.add_option("--corpora", c.corpora, "cross: name=dir entries")->delimiter(',');
  app.add_option("--out", c.output, "output directory");
  app.add_option("--model", c.model, "model file");
  app.add_option("--schema", c.schema, "landmark schema (synth)");
  app.add_option("--model3d", c.model3d, "3D face model");
  app.add_option("--pattern", c.pattern, "sampling pattern file");

  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--workers", c.workers, "worker threads");
  app.add_option("--init", c.init, "initialisation")->check(CLI::IsMember({"mean", "3d"}));
  app.add_option("--features", c.features, "feature source")
      ->check(CLI::IsMember({"gray", "heatmap"}));
  app.add_option("--coarse-to-fine", c.coarse_to_fine, "per-part fine stages")
      ->check(on_off_check);
  app.add_option("--epsilon", c.epsilon, "AUC / failure threshold (percent)");
  app.add_option("--normalization", c.normalization, "pupils | corners | height")
      ->check(CLI::IsMember({"pupils", "corners", "height"}));

  TrainConfig& t = c.train;
  app.add_option("--stages", t.max_stages, "stage budget T");
  app.add_option("--coarse-trees", t.coarse_trees, "trees per coarse stage K1");
  app.add_option("--fine-trees", t.fine_trees, "trees per part in fine stages K2");
  app.add_option("--depth", t.depth, "tree depth");
  app.add_option("--candidates", t.candidates, "split candidates per node");
  app.add_option("--shrinkage", t.shrinkage, "learning rate nu");
  app.add_option("--subsample", t.subsample, "per-tree sample fraction eta");
  app.add_option("--early-stop", t.early_stopping, "validation early stopping")
      ->check(on_off_check);
  app.add_option("--early-stop-delta", t.early_stop_delta, "relative improvement threshold");
  app.add_option("--scale-floor", t.scale_floor, "pattern scale at the last stage");

  AugmentConfig& a = c.augment;
  app.add_option("--augmented-count", c.augmented_count, "augmented training size N_A");
  app.add_option("--rotation", a.rotation_deg, "in-plane rotation bound (deg)");
  app.add_option("--scale-jitter", a.scale, "relative scale bound");
  app.add_option("--translation", a.translation, "shift bound (fraction of crop)");
  app.add_option("--mirror", a.mirror, "random mirroring")->check(on_off_check);
  app.add_option("--occlusion-rate", a.occlusion_rate, "occlusion probability");
  app.add_option("--occlusion-max", a.occlusion_max, "largest occluder side (fraction)");
  app.add_option("--yaw-noise", a.yaw_noise_deg, "initial pose yaw noise (deg)");
  app.add_option("--pitch-noise", a.pitch_noise_deg, "initial pose pitch noise (deg)");
  app.add_option("--roll-noise", a.roll_noise_deg, "initial pose roll noise (deg)");

  app.add_option("--ransac-iterations", c.robust.iterations, "pose hypotheses Z");
  app.add_option("--subset-size", c.robust.subset_size, "landmarks per hypothesis");
  app.add_option("--smoothing-sigma", c.smoothing_sigma, "map smoothing before init (0 = off)");
  app.add_option("--crop", c.crop, "map side in pixels");
  app.add_option("--focal", c.focal, "camera focal length");
  app.add_option("--val-fraction", c.val_fraction, "validation share of the training data");
  app.add_option("--test-fraction", c.test_fraction, "held-out share (cross, ablate)");
  app.add_option("--pooled", c.pooled, "cross: add the pooled All model")->check(on_off_check);

  SynthCorpusConfig& s = c.synth;
  app.add_option("--count", s.count, "synth: faces");
  app.add_option("--depth-mm", s.depth, "synth: face distance");
  app.add_option("--yaw", s.yaw_deg, "synth: yaw bound (deg)");
  app.add_option("--pitch", s.pitch_deg, "synth: pitch bound (deg)");
  app.add_option("--roll", s.roll_deg, "synth: roll bound (deg)");
  app.add_option("--shift", s.shift_px, "synth: centre jitter (px)");
  app.add_option("--deformation", s.deformation, "synth: deformation coefficient sd");
  app.add_option("--coupling", s.coupling, "synth: brow/mouth coupling")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Coupling>{{"independent", Coupling::kIndependent},
                                          {"correlated", Coupling::kCorrelated},
                                          {"anticorrelated", Coupling::kAnticorrelated}}));
  app.add_option("--mode-means", s.mode_means, "synth: per-mode mean coefficients")
      ->delimiter(',');
  app.add_option("--missing-rate", s.missing_rate, "synth: annotation drop rate");
  app.add_option("--never-annotated", s.never_annotated, "synth: landmarks never annotated")
      ->delimiter(',');
  app.add_option("--peak-sigma", s.maps.peak_sigma, "synth maps: blob sigma");
  app.add_option("--map-noise", s.maps.coordinate_noise_sigma, "synth maps: peak jitter (px)");
  app.add_option("--outlier-rate", s.maps.outlier_rate, "synth maps: misplaced peak rate");
  app.add_option("--occluded-dropout", s.maps.occluded_dropout,
                 "synth maps: flat maps for occluded landmarks");
  app.add_option("--map-floor", s.maps.floor, "synth maps: background level");
  app.add_flag("--write-maps", c.write_maps, "synth: also write dense map files");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"3D-initialised regression-tree landmark alignment"};
  app.name("ertalign");
  add_options(app, config);
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"synth", "generate a synthetic corpus"},
      {"train", "train a cascade model"},
      {"predict", "predict landmarks for a corpus"},
      {"eval", "evaluate a model on a corpus"},
      {"cross", "cross-dataset error matrix"},
      {"ablate", "train and evaluate the ablation variants"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    validate(config, command);
    if (command == "synth") cmd_synth(config, out);
    if (command == "train") cmd_train(config, out);
    if (command == "predict") cmd_predict(config, out);
    if (command == "eval") cmd_eval(config, out);
    if (command == "cross") cmd_cross(config, out);
    if (command == "ablate") cmd_ablate(config, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace ertalign

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

// Subcommands of the ertalign tool. Each writes its artifacts under
// RunConfig::output and a short summary to `out`.

#ifndef ERTALIGN_CLI_COMMANDS_H_
#define ERTALIGN_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>

#include "ertalign/run_config.h"

namespace ertalign {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// <out>/annotations.jsonl, schema.txt, manifest.json (+ maps/, gray/).
void cmd_synth(const RunConfig& config, std::ostream& out);
// <out>/model.ertm and <out>/train_log.txt.
void cmd_train(const RunConfig& config, std::ostream& out);
// <out>/predictions.jsonl in the annotation format (image coordinates).
void cmd_predict(const RunConfig& config, std::ostream& out);
// <out>/eval_report.txt and <out>/ced.txt.
void cmd_eval(const RunConfig& config, std::ostream& out);
// <out>/cross_matrix.txt.
void cmd_cross(const RunConfig& config, std::ostream& out);
// <out>/ablation.txt.
void cmd_ablate(const RunConfig& config, std::ostream& out);

// Training log text: header with the configuration echo, one line per stage,
// and a final "stop" line.
std::string format_train_log(const CascadeModel& model, const PipelineConfig& config,
                             const TrainLog& log);

// Parses arguments, dispatches and maps exceptions onto exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ertalign

#endif  // ERTALIGN_CLI_COMMANDS_H_

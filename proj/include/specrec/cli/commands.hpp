// Copyright 2026 The specrec Authors
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

#pragma once

#include <string>

#include "specrec/cli/config.hpp"

namespace specrec::cli {

// Each command writes its primary outputs plus config.ini (resolved
// settings) and run_info.json (wall-clock data, excluded from byte-identical
// reruns). Errors are thrown.

// load -> dedupe -> k-core -> split -> <split dir>.
void cmd_prepare(const ExperimentConfig& config);
// report.json, report.csv, model.bin.
void cmd_fit_eval(const ExperimentConfig& config);
// leaderboard.csv (descending validation NDCG@20) and best.json.
void cmd_grid_search(const ExperimentConfig& config);
// sweep_beta.csv: beta_tilde, NDCG, average popularity from one fit.
void cmd_sweep_beta(const ExperimentConfig& config);
// filter_curve.csv: k, lambda, response.
void cmd_filter_curve(const ExperimentConfig& config);

}  // namespace specrec::cli

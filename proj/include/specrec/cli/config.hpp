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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "specrec/eval.hpp"
#include "specrec/ingest.hpp"
#include "specrec/spectral.hpp"

namespace specrec::cli {

// Resolved experiment settings. See README.md for the file format; every key
// has a default so an empty file is valid.
struct ExperimentConfig {
  // [data]
  std::filesystem::path data_path;
  CsvSpec csv;
  std::size_t k_core = 10;
  // [split]
  std::filesystem::path split_dir;  // empty: <output.dir>/split
  SplitRatios ratios;
  std::uint64_t split_seed = 42;
  // [model]
  std::string model = "psge";  // psge | sgmc | puresvd | ease
  double alpha = 0.5;
  double beta = 0.5;
  std::optional<double> beta_tilde;  // default: beta
  std::size_t f = 64;
  double lambda_reg = 500.0;
  // [solver]
  SolverConfig solver;
  // [eval]
  Phase phase = Phase::kValidation;
  std::vector<std::size_t> cutoffs = {5, 20};
  // [grid]
  std::vector<double> grid_alpha;
  std::vector<double> grid_beta;
  std::vector<std::size_t> grid_f;
  std::vector<double> grid_lambda;
  // [sweep]
  std::vector<double> sweep_beta_tilde;
  std::size_t sweep_cutoff = 20;
  // [filter]
  std::vector<std::size_t> filter_k = {1, 2, 3, 4, 8};
  double filter_lambda_min = -1.0;
  double filter_lambda_max = 1.0;
  std::size_t filter_points = 201;
  // [output]
  std::filesystem::path out_dir = "out";
  int threads = 0;

  std::filesystem::path resolved_split_dir() const {
    return split_dir.empty() ? out_dir / "split" : split_dir;
  }
  double effective_beta_tilde() const { return beta_tilde.value_or(beta); }
};

// Raw section.key -> string tree read from an INI file.
boost::property_tree::ptree read_config_tree(const std::filesystem::path& path);

// "section.key=value"; the key must be known.
void apply_override(boost::property_tree::ptree& tree, const std::string& assignment);

// Validates every key and value. Unknown keys are errors.
ExperimentConfig resolve_config(const boost::property_tree::ptree& tree);

// Resolved config in INI form, all keys, fixed order.
std::string render_config(const ExperimentConfig& config);

// "0,0.5,1" or "start:stop:step" (inclusive).
std::vector<double> parse_real_list(const std::string& text);
std::vector<std::size_t> parse_count_list(const std::string& text);

}  // namespace specrec::cli

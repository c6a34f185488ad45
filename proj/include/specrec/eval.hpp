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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specrec/ingest.hpp"
#include "specrec/models.hpp"
#include "specrec/sparse.hpp"

namespace specrec {

struct RankedList {
  std::vector<Index> items;
  // Fewer than n unmasked items were available.
  bool truncated = false;
};

// Top-n items by descending score, ties by ascending id, masked ids skipped.
// Scores may be +-inf; NaN is rejected.
RankedList rank_top_n(std::span<const double> scores, std::span<const Index> mask,
                      std::size_t n);

// Binary-gain NDCG over the first n recommendations; IDCG uses
// min(n, |relevant|) hits. 0 when relevant is empty.
double ndcg_at(std::span<const Index> recommended, std::span<const Index> relevant,
               std::size_t n);
// Hits among the first n recommendations over |relevant|.
double recall_at(std::span<const Index> recommended, std::span<const Index> relevant,
                 std::size_t n);

// Mean of item_degrees[i] / n_users_total over every recommended slot.
double avg_recommendation_popularity(const std::vector<std::vector<Index>>& recommendations,
                                     const DegreeVectors& degrees, std::size_t n_users_total);

enum class Phase { kValidation, kTest };

std::string_view phase_name(Phase phase);
Phase parse_phase(std::string_view name);

// Matrix a model must be fitted on for the phase: train, or train + validation.
InteractionMatrix phase_training(const SplitDataset& ds, Phase phase);

struct EvalOptions {
  std::vector<std::size_t> cutoffs = {5, 20};
  // Refuse models whose training stamp does not match the phase matrix.
  bool check_stamp = true;
};

struct EvalReport {
  std::map<std::size_t, double> ndcg;
  std::map<std::size_t, double> recall;
  std::map<std::size_t, double> avg_popularity;
  std::size_t n_users_evaluated = 0;
  std::size_t n_users_cold = 0;          // had targets but no training data
  std::size_t n_users_no_targets = 0;
  Phase phase = Phase::kValidation;
  std::string model_tag;
  Hyperparameters hyperparameters;
  std::uint64_t seed = 0;

  // Metrics are rounded to 1e-10 so reruns compare byte for byte.
  std::string to_json() const;
  static std::string csv_header();
  // model, NDCG@20, Recall@5, Recall@20.
  std::string csv_row() const;
};

// Macro average over users with at least one target in the phase set.
// Masks train (validation phase) or train + validation (test phase).
EvalReport evaluate(const Recommender& model, const SplitDataset& ds, Phase phase,
                    const EvalOptions& options = {});

// Per-user top-n lists with the phase mask, cold users left empty.
std::vector<std::vector<Index>> recommend_all(const Recommender& model,
                                              const InteractionMatrix& mask, std::size_t n);

// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

}  // namespace specrec

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
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "specrec/sparse.hpp"

namespace specrec {

struct Interaction {
  std::string user;
  std::string item;
  double weight = 1.0;
  std::optional<std::int64_t> timestamp;
};

struct RawInteractions {
  std::vector<Interaction> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

// Column layout of a delimited interaction log. Columns are 0-based.
struct CsvSpec {
  std::string delimiter = ",";
  std::size_t user_col = 0;
  std::size_t item_col = 1;
  std::optional<std::size_t> weight_col;
  std::optional<std::size_t> timestamp_col;
  bool has_header = false;
  // Rows with a weight below this are dropped (requires weight_col).
  std::optional<double> min_rating;
};

// Parses and deduplicates. Timestamps may be integers or ISO-8601 UTC
// ("2010-10-19T23:55:27Z"). Throws ParseError with the 1-based line number.
RawInteractions parse_triplets(std::istream& in, const CsvSpec& spec);
RawInteractions load_triplets(const std::filesystem::path& path,
                              const CsvSpec& spec);

// Collapses repeated (user, item) pairs, keeping the record with the latest
// timestamp, or the first occurrence when timestamps are absent or tied.
// Pairs stay in order of first appearance.
RawInteractions deduplicate(const RawInteractions& raw);

// Maximal sub-log in which every user and every item has at least k distinct
// partners. The result may be empty (a warning is logged).
RawInteractions k_core_filter(const RawInteractions& raw, std::size_t k);

// Bidirectional token <-> dense id map.
class IndexMap {
 public:
  IndexMap() = default;
  explicit IndexMap(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(Index id) const { return tokens_.at(id); }
  std::optional<Index> find(const std::string& token) const;
  Index id(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const IndexMap& a, const IndexMap& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Index> ids_;
};

// Orders all-digit tokens numerically, everything else lexicographically.
bool token_less(const std::string& a, const std::string& b);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct SplitDataset {
  InteractionMatrix train;
  InteractionMatrix validation;
  InteractionMatrix test;
  IndexMap users;
  IndexMap items;
  std::uint64_t seed = 0;
  std::size_t k_core = 0;

  std::size_t n_users() const { return users.size(); }
  std::size_t n_items() const { return items.size(); }
  std::size_t n_interactions() const {
    return train.nnz() + validation.nnz() + test.nnz();
  }
};

// Per-user random split. Each user's items are shuffled by a generator keyed
// on (seed, user token); the first floor(test * n) go to test, the next
// floor(validation * n) to validation, the rest to train.
SplitDataset split_per_user(const RawInteractions& raw,
                            const SplitRatios& ratios = {},
                            std::uint64_t seed = 0);

InteractionMatrix merge_train_val(const SplitDataset& ds);

// load -> deduplicate -> k-core -> split.
SplitDataset prepare_dataset(const std::filesystem::path& path,
                             const CsvSpec& spec, std::size_t k_core,
                             const SplitRatios& ratios, std::uint64_t seed);

// Writes train.tsv, validation.tsv, test.tsv (user_id<TAB>item_id),
// users.tsv and items.tsv (id<TAB>token) and meta.json into dir.
void save_split(const SplitDataset& ds, const std::filesystem::path& dir);
SplitDataset load_split(const std::filesystem::path& dir);

std::uint64_t fingerprint(const SplitDataset& ds);

}  // namespace specrec

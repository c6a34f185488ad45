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

#include "specrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "specrec/error.hpp"

namespace specrec {
namespace {

std::vector<Index> sorted_copy(std::span<const Index> ids) {
  std::vector<Index> v(ids.begin(), ids.end());
  if (!std::is_sorted(v.begin(), v.end())) std::sort(v.begin(), v.end());
  return v;
}

double round10(double x) { return std::round(x * 1e10) / 1e10; }

struct UserResult {
  enum Kind { kSkippedNoTargets, kSkippedCold, kEvaluated } kind = kSkippedNoTargets;
  std::vector<double> ndcg, recall, popularity;
  std::vector<std::size_t> slots;
};

}  // namespace

RankedList rank_top_n(std::span<const double> scores, std::span<const Index> mask,
                      std::size_t n) {
  if (n == 0) throw std::invalid_argument("rank_top_n: n must be >= 1");
  std::vector<char> masked(scores.size(), 0);
  for (Index i : mask) {
    if (i >= scores.size()) throw std::out_of_range("rank_top_n: mask id out of range");
    masked[i] = 1;
  }
  std::vector<Index> cand;
  cand.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw std::invalid_argument("rank_top_n: NaN score");
    if (!masked[i]) cand.push_back(static_cast<Index>(i));
  }
  auto before = [&scores](Index a, Index b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  RankedList out;
  out.truncated = cand.size() < n;
  const std::size_t take = std::min(n, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                    before);
  cand.resize(take);
  out.items = std::move(cand);
  return out;
}

double ndcg_at(std::span<const Index> recommended, std::span<const Index> relevant,
               std::size_t n) {
  if (n == 0) throw std::invalid_argument("ndcg_at: n must be >= 1");
  if (relevant.empty()) return 0.0;
  const std::vector<Index> rel = sorted_copy(relevant);
  const std::size_t depth = std::min(n, recommended.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < depth; ++r)
    if (std::binary_search(rel.begin(), rel.end(), recommended[r]))
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min(n, rel.size());
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

double recall_at(std::span<const Index> recommended, std::span<const Index> relevant,
                 std::size_t n) {
  if (n == 0) throw std::invalid_argument("recall_at: n must be >= 1");
  if (relevant.empty()) return 0.0;
  const std::vector<Index> rel = sorted_copy(relevant);
  const std::size_t depth = std::min(n, recommended.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r)
    hits += std::binary_search(rel.begin(), rel.end(), recommended[r]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

double avg_recommendation_popularity(const std::vector<std::vector<Index>>& recommendations,
                                     const DegreeVectors& degrees,
                                     std::size_t n_users_total) {
  if (n_users_total == 0) throw std::invalid_argument("n_users_total must be positive");
  double sum = 0.0;
  std::size_t slots = 0;
  for (const auto& list : recommendations) {
    for (Index i : list) sum += degrees.item_degrees.at(i);
    slots += list.size();
  }
  if (slots == 0) return 0.0;
  return sum / static_cast<double>(slots) / static_cast<double>(n_users_total);
}

std::string_view phase_name(Phase phase) {
  return phase == Phase::kValidation ? "validation" : "test";
}

Phase parse_phase(std::string_view name) {
  if (name == "validation") return Phase::kValidation;
  if (name == "test") return Phase::kTest;
  throw std::invalid_argument("unknown phase '" + std::string(name) + "'");
}

InteractionMatrix phase_training(const SplitDataset& ds, Phase phase) {
  return phase == Phase::kValidation ? ds.train : merge_train_val(ds);
}

std::vector<std::vector<Index>> recommend_all(const Recommender& model,
                                              const InteractionMatrix& mask, std::size_t n) {
  if (mask.n_users() != model.n_users() || mask.n_items() != model.n_items())
    throw DimensionError("recommend_all: mask shape differs from model");
  const auto n_users = static_cast<std::int64_t>(model.n_users());
  std::vector<std::vector<Index>> out(model.n_users());
  std::exception_ptr error;
#pragma omp parallel
  {
    std::vector<double> scores(model.n_items());
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t u = 0; u < n_users; ++u) {
      const auto user = static_cast<Index>(u);
      if (model.is_cold(user)) continue;
      try {
        model.score_user(user, scores);
        out[user] = rank_top_n(scores, mask.row_items(user), n).items;
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

EvalReport evaluate(const Recommender& model, const SplitDataset& ds, Phase phase,
                    const EvalOptions& options) {
  if (options.cutoffs.empty()) throw std::invalid_argument("evaluate: no cutoffs");
  for (std::size_t c : options.cutoffs)
    if (c == 0) throw std::invalid_argument("evaluate: cutoffs must be >= 1");
  if (model.n_users() != ds.n_users() || model.n_items() != ds.n_items())
    throw DimensionError("evaluate: model shape differs from the dataset");

  const InteractionMatrix training = phase_training(ds, phase);
  if (options.check_stamp && !model.stamp().matches(training))
    throw Error(std::string("evaluate: model was not fitted on the ") +
                std::string(phase_name(phase)) + "-phase training matrix");
  const InteractionMatrix& targets = phase == Phase::kValidation ? ds.validation : ds.test;
  const DegreeVectors deg = degrees(training);
  const std::size_t depth = *std::max_element(options.cutoffs.begin(), options.cutoffs.end());
  const std::size_t n_cut = options.cutoffs.size();
  const double n_users_total = static_cast<double>(ds.n_users());

  std::vector<UserResult> per_user(ds.n_users());
  std::exception_ptr error;
  const auto n_users = static_cast<std::int64_t>(ds.n_users());
#pragma omp parallel
  {
    std::vector<double> scores(ds.n_items());
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t u = 0; u < n_users; ++u) {
      const auto user = static_cast<Index>(u);
      UserResult& res = per_user[user];
      const auto relevant = targets.row_items(user);
      if (relevant.empty()) continue;
      if (model.is_cold(user)) {
        res.kind = UserResult::kSkippedCold;
        continue;
      }
      try {
        model.score_user(user, scores);
        const RankedList ranked = rank_top_n(scores, training.row_items(user), depth);
        res.kind = UserResult::kEvaluated;
        for (std::size_t c : options.cutoffs) {
          res.ndcg.push_back(ndcg_at(ranked.items, relevant, c));
          res.recall.push_back(recall_at(ranked.items, relevant, c));
          const std::size_t slots = std::min(c, ranked.items.size());
          double pop = 0.0;
          for (std::size_t r = 0; r < slots; ++r) pop += deg.item_degrees[ranked.items[r]];
          res.popularity.push_back(pop / n_users_total);
          res.slots.push_back(slots);
        }
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);

  EvalReport report;
  report.phase = phase;
  report.model_tag = model.tag();
  report.hyperparameters = model.hyperparameters();
  report.seed = ds.seed;
  std::vector<double> ndcg(n_cut, 0.0), recall(n_cut, 0.0), pop(n_cut, 0.0), slots(n_cut, 0.0);
  for (const UserResult& res : per_user) {
    switch (res.kind) {
      case UserResult::kSkippedNoTargets:
        ++report.n_users_no_targets;
        break;
      case UserResult::kSkippedCold:
        ++report.n_users_cold;
        break;
      case UserResult::kEvaluated:
        ++report.n_users_evaluated;
        for (std::size_t c = 0; c < n_cut; ++c) {
          ndcg[c] += res.ndcg[c];
          recall[c] += res.recall[c];
          pop[c] += res.popularity[c];
          slots[c] += static_cast<double>(res.slots[c]);
        }
        break;
    }
  }
  const double n_eval = static_cast<double>(report.n_users_evaluated);
  for (std::size_t c = 0; c < n_cut; ++c) {
    const std::size_t cutoff = options.cutoffs[c];
    report.ndcg[cutoff] = n_eval > 0 ? ndcg[c] / n_eval : 0.0;
    report.recall[cutoff] = n_eval > 0 ? recall[c] / n_eval : 0.0;
    report.avg_popularity[cutoff] = slots[c] > 0 ? pop[c] / slots[c] : 0.0;
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model_tag;
  j["phase"] = phase_name(phase);
  j["seed"] = seed;
  nlohmann::ordered_json hp = nlohmann::ordered_json::object();
  for (const auto& [k, v] : hyperparameters) hp[k] = round10(v);
  j["hyperparameters"] = hp;
  auto metric = [](const std::map<std::size_t, double>& m) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [c, v] : m) o[std::to_string(c)] = round10(v);
    return o;
  };
  j["ndcg"] = metric(ndcg);
  j["recall"] = metric(recall);
  j["avg_popularity"] = metric(avg_popularity);
  j["n_users_evaluated"] = n_users_evaluated;
  j["n_users_cold"] = n_users_cold;
  j["n_users_no_targets"] = n_users_no_targets;
  return j.dump(2) + "\n";
}

std::string EvalReport::csv_header() { return "model,ndcg@20,recall@5,recall@20\n"; }

std::string EvalReport::csv_row() const {
  auto get = [](const std::map<std::size_t, double>& m, std::size_t c) -> std::string {
    auto it = m.find(c);
    if (it == m.end()) return "";
    std::ostringstream os;
    os.precision(10);
    os << std::fixed << round10(it->second);
    return os.str();
  };
  return csv_field(model_tag) + "," + get(ndcg, 20) + "," + get(recall, 5) + "," +
         get(recall, 20) + "\n";
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace specrec

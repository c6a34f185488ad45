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

#include "specrec/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "specrec/conv_lab.hpp"
#include "specrec/error.hpp"
#include "specrec/models.hpp"

namespace specrec::cli {
namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json report_json(const ConvergenceReport& r, double seconds) {
  json j;
  j["converged"] = r.converged;
  j["operator_applications"] = r.iterations;
  j["restarts"] = r.restarts;
  j["max_residual"] = r.max_residual;
  j["numerical_rank"] = r.numerical_rank;
  j["gram_on_items"] = r.gram_on_items;
  j["seconds"] = seconds;
  return j;
}

// Starts run bookkeeping and writes config.ini into dir.
class Run {
 public:
  Run(std::string command, const ExperimentConfig& config, const std::filesystem::path& dir)
      : dir_(dir), started_(utc_now()), t0_(Clock::now()) {
    std::filesystem::create_directories(dir_);
    write_text(dir_ / "config.ini", render_config(config));
    info_["command"] = std::move(command);
  }

  json& info() { return info_; }

  void finish() {
    info_["started_utc"] = started_;
    info_["elapsed_seconds"] = std::chrono::duration<double>(Clock::now() - t0_).count();
    write_text(dir_ / "run_info.json", info_.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::string started_;
  Clock::time_point t0_;
  json info_;
};

SplitDataset load_prepared(const ExperimentConfig& config) {
  const auto dir = config.resolved_split_dir();
  if (!std::filesystem::exists(dir / "meta.json"))
    throw Error("no prepared split in " + dir.string() + "; run 'prepare' first");
  return load_split(dir);
}

std::unique_ptr<Recommender> fit_configured(const ExperimentConfig& c,
                                            const InteractionMatrix& training, FitInfo& info) {
  if (c.model == "psge" || c.model == "sgmc") {
    auto m = std::make_unique<PsgeModel>(fit_psge(training, c.alpha, c.beta, c.f, c.solver, &info));
    m->set_beta_tilde(c.effective_beta_tilde());
    return m;
  }
  if (c.model == "puresvd")
    return std::make_unique<PureSvdModel>(fit_pure_svd(training, c.f, c.solver, &info));
  if (c.model == "ease") {
    const auto t0 = Clock::now();
    auto m = std::make_unique<EaseModel>(fit_ease(training, c.lambda_reg));
    info.report.converged = true;
    info.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return m;
  }
  throw Error("unknown model '" + c.model + "'");
}

std::vector<std::size_t> with_table_cutoffs(std::vector<std::size_t> cutoffs,
                                            std::initializer_list<std::size_t> extra) {
  cutoffs.insert(cutoffs.end(), extra);
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  return cutoffs;
}

std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", std::round(v * 1e10) / 1e10);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct GridPoint {
  std::string model;
  std::optional<double> alpha, beta, beta_tilde, lambda;
  std::optional<std::size_t> f;
  EvalReport report;
  ConvergenceReport solver;
  double fit_seconds = 0.0;
};

json point_json(const GridPoint& p) {
  json j;
  j["model"] = p.model;
  if (p.alpha) j["alpha"] = *p.alpha;
  if (p.beta) j["beta"] = *p.beta;
  if (p.beta_tilde) j["beta_tilde"] = *p.beta_tilde;
  if (p.f) j["f"] = *p.f;
  if (p.lambda) j["lambda"] = *p.lambda;
  return j;
}

}  // namespace

void cmd_prepare(const ExperimentConfig& config) {
  if (config.data_path.empty()) throw Error("prepare needs data.path");
  const auto dir = config.resolved_split_dir();
  Run run("prepare", config, dir);
  const SplitDataset ds =
      prepare_dataset(config.data_path, config.csv, config.k_core, config.ratios, config.split_seed);
  if (ds.n_interactions() == 0) throw Error("no interactions survive the k-core filter");
  save_split(ds, dir);
  spdlog::info("split: {} users, {} items, {} interactions (train {}, validation {}, test {})",
               ds.n_users(), ds.n_items(), ds.n_interactions(), ds.train.nnz(),
               ds.validation.nnz(), ds.test.nnz());
  run.info()["n_users"] = ds.n_users();
  run.info()["n_items"] = ds.n_items();
  run.info()["n_interactions"] = ds.n_interactions();
  run.finish();
}

void cmd_fit_eval(const ExperimentConfig& config) {
  Run run("fit-eval", config, config.out_dir);
  const SplitDataset ds = load_prepared(config);
  const InteractionMatrix training = phase_training(ds, config.phase);
  FitInfo info;
  const auto model = fit_configured(config, training, info);
  spdlog::info("fitted {} in {:.2f}s", config.model, info.seconds);
  EvalOptions opts;
  opts.cutoffs = config.cutoffs;
  const EvalReport report = evaluate(*model, ds, config.phase, opts);
  write_text(config.out_dir / "report.json", report.to_json());
  write_text(config.out_dir / "report.csv", EvalReport::csv_header() + report.csv_row());
  save_model(*model, config.out_dir / "model.bin");
  spdlog::info("{} NDCG@20={} Recall@20={}", phase_name(config.phase),
               report.ndcg.count(20) ? fixed10(report.ndcg.at(20)) : "n/a",
               report.recall.count(20) ? fixed10(report.recall.at(20)) : "n/a");
  run.info()["fit"] = report_json(info.report, info.seconds);
  run.finish();
}

void cmd_grid_search(const ExperimentConfig& config) {
  Run run("grid-search", config, config.out_dir);
  if (config.phase != Phase::kValidation)
    spdlog::warn("grid-search always selects on the validation phase");
  const SplitDataset ds = load_prepared(config);
  const InteractionMatrix training = phase_training(ds, Phase::kValidation);
  EvalOptions opts;
  opts.cutoffs = with_table_cutoffs(config.cutoffs, {5, 20});

  std::vector<GridPoint> points;
  std::vector<double> fit_seconds;
  std::vector<ConvergenceReport> fit_reports;
  const bool spectral = config.model != "ease";

  if (spectral) {
    // One factorization per (alpha, beta) at the largest f; smaller f reuse
    // its leading columns.
    std::vector<std::pair<double, double>> pairs;
    if (config.model == "psge") {
      for (double a : config.grid_alpha)
        for (double b : config.grid_beta) pairs.emplace_back(a, b);
    } else {
      pairs.emplace_back(config.alpha, config.beta);
    }
    std::vector<std::size_t> fs = config.grid_f;
    std::sort(fs.begin(), fs.end());
    fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
    const std::size_t f_max = fs.back();

    std::vector<std::vector<GridPoint>> per_pair(pairs.size());
    std::exception_ptr error;
    const auto n_pairs = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t p = 0; p < n_pairs; ++p) {
      try {
        const auto [a, b] = pairs[static_cast<std::size_t>(p)];
        FitInfo info;
        if (config.model == "puresvd") {
          const PureSvdModel full = fit_pure_svd(training, f_max, config.solver, &info);
          for (std::size_t f : fs) {
            GridPoint gp{"puresvd", {}, {}, {}, {}, f, {}, info.report, info.seconds};
            gp.report = evaluate(full.truncated(f), ds, Phase::kValidation, opts);
            per_pair[p].push_back(std::move(gp));
          }
        } else {
          const PsgeModel full = fit_psge(training, a, b, f_max, config.solver, &info);
          const double bt = config.model == "sgmc" ? 0.5 : b;
          for (std::size_t f : fs) {
            PsgeModel m = full.truncated(f);
            m.set_beta_tilde(bt);
            GridPoint gp{config.model, a, b, bt, {}, f, {}, info.report, info.seconds};
            gp.report = evaluate(m, ds, Phase::kValidation, opts);
            per_pair[p].push_back(std::move(gp));
          }
        }
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    for (auto& v : per_pair)
      for (auto& gp : v) points.push_back(std::move(gp));
  } else {
    for (double lambda : config.grid_lambda) {
      const auto t0 = Clock::now();
      const EaseModel m = fit_ease(training, lambda);
      GridPoint gp{"ease", {}, {}, {}, lambda, {}, {}, {}, 0.0};
      gp.solver.converged = true;
      gp.fit_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      gp.report = evaluate(m, ds, Phase::kValidation, opts);
      points.push_back(std::move(gp));
    }
  }

  std::stable_sort(points.begin(), points.end(), [](const GridPoint& x, const GridPoint& y) {
    return x.report.ndcg.at(20) > y.report.ndcg.at(20);
  });

  std::ostringstream csv;
  csv << "rank,model,alpha,beta,beta_tilde,f,lambda,ndcg@20,recall@5,recall@20,"
         "avg_popularity@20\n";
  auto opt = [](const auto& v) -> std::string {
    if (!v) return "";
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::size_t>) {
      return std::to_string(*v);
    } else {
      return shortest(*v);
    }
  };
  for (std::size_t k = 0; k < points.size(); ++k) {
    const GridPoint& p = points[k];
    csv << k + 1 << "," << csv_field(p.model) << "," << opt(p.alpha) << "," << opt(p.beta) << ","
        << opt(p.beta_tilde) << "," << opt(p.f) << "," << opt(p.lambda) << ","
        << fixed10(p.report.ndcg.at(20)) << "," << fixed10(p.report.recall.at(5)) << ","
        << fixed10(p.report.recall.at(20)) << "," << fixed10(p.report.avg_popularity.at(20))
        << "\n";
  }
  write_text(config.out_dir / "leaderboard.csv", csv.str());

  const GridPoint& best = points.front();
  json bj;
  bj["selection"] = "validation ndcg@20";
  bj["n_points"] = points.size();
  bj["best"] = point_json(best);
  bj["report"] = json::parse(best.report.to_json());
  write_text(config.out_dir / "best.json", bj.dump(2) + "\n");
  spdlog::info("best of {} points: {} NDCG@20={}", points.size(), point_json(best).dump(),
               fixed10(best.report.ndcg.at(20)));

  json fits = json::array();
  for (const GridPoint& p : points) {
    json j = point_json(p);
    j["fit"] = report_json(p.solver, p.fit_seconds);
    fits.push_back(std::move(j));
  }
  run.info()["fits"] = std::move(fits);
  run.finish();
}

void cmd_sweep_beta(const ExperimentConfig& config) {
  if (config.model != "psge" && config.model != "sgmc")
    throw Error("sweep-beta needs a psge or sgmc model, not '" + config.model + "'");
  Run run("sweep-beta", config, config.out_dir);
  const SplitDataset ds = load_prepared(config);
  const InteractionMatrix training = phase_training(ds, config.phase);
  FitInfo info;
  PsgeModel model = fit_psge(training, config.alpha, config.beta, config.f, config.solver, &info);
  EvalOptions opts;
  opts.cutoffs = with_table_cutoffs(config.cutoffs, {20, config.sweep_cutoff});

  std::ostringstream csv;
  csv << "beta_tilde,ndcg@20,avg_popularity@" << config.sweep_cutoff << "\n";
  for (double bt : config.sweep_beta_tilde) {
    model.set_beta_tilde(bt);
    const EvalReport r = evaluate(model, ds, config.phase, opts);
    csv << shortest(bt) << "," << fixed10(r.ndcg.at(20)) << ","
        << fixed10(r.avg_popularity.at(config.sweep_cutoff)) << "\n";
  }
  write_text(config.out_dir / "sweep_beta.csv", csv.str());
  run.info()["fit"] = report_json(info.report, info.seconds);
  run.finish();
}

void cmd_filter_curve(const ExperimentConfig& config) {
  Run run("filter-curve", config, config.out_dir);
  std::ostringstream csv;
  csv << "k,lambda,response\n";
  const double lo = config.filter_lambda_min;
  const double hi = config.filter_lambda_max;
  const auto steps = static_cast<double>(config.filter_points - 1);
  for (std::size_t k : config.filter_k) {
    for (std::size_t j = 0; j < config.filter_points; ++j) {
      double lambda = lo + (hi - lo) * static_cast<double>(j) / steps;
      lambda = std::clamp(std::round(lambda * 1e12) / 1e12, -1.0, 1.0);
      if (j + 1 == config.filter_points) lambda = hi;
      csv << k << "," << shortest(lambda) << "," << shortest(filter_response(lambda, k)) << "\n";
    }
  }
  write_text(config.out_dir / "filter_curve.csv", csv.str());
  run.finish();
}

}  // namespace specrec::cli

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

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "specrec/cli/commands.hpp"
#include "specrec/cli/config.hpp"
#include "specrec/sparse.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string out;
  std::string threads;
  std::string log_level = "info";
};

specrec::cli::ExperimentConfig build_config(const Options& opt) {
  boost::property_tree::ptree tree;
  if (!opt.config_path.empty()) tree = specrec::cli::read_config_tree(opt.config_path);
  for (const auto& o : opt.overrides) specrec::cli::apply_override(tree, o);
  // --seed fixes both the split and the solver start vector.
  if (!opt.seed.empty()) {
    specrec::cli::apply_override(tree, "split.seed=" + opt.seed);
    specrec::cli::apply_override(tree, "solver.seed=" + opt.seed);
  }
  if (!opt.out.empty()) specrec::cli::apply_override(tree, "output.dir=" + opt.out);
  if (!opt.threads.empty()) specrec::cli::apply_override(tree, "output.threads=" + opt.threads);
  return specrec::cli::resolve_config(tree);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral top-N recommendation experiments"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--set", opt.overrides, "Override a config key: section.key=value");
  app.add_option("--seed", opt.seed, "Seed for the split and the solver");
  app.add_option("--out", opt.out, "Output directory");
  app.add_option("--threads", opt.threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--log-level", opt.log_level, "trace, debug, info, warn, error, off");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const specrec::cli::ExperimentConfig&);
  };
  const Command commands[] = {
      {"prepare", "Load, deduplicate, k-core filter and split a dataset",
       specrec::cli::cmd_prepare},
      {"fit-eval", "Fit the configured model and evaluate it", specrec::cli::cmd_fit_eval},
      {"grid-search", "Search hyperparameters on the validation split",
       specrec::cli::cmd_grid_search},
      {"sweep-beta", "Re-score one fit across prediction-time item exponents",
       specrec::cli::cmd_sweep_beta},
      {"filter-curve", "Tabulate the uniform propagation filter", specrec::cli::cmd_filter_curve},
  };
  for (const Command& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto logger = spdlog::stderr_color_mt("specrec");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(opt.log_level));

  try {
    const auto config = build_config(opt);
    specrec::set_num_threads(config.threads);
    for (const Command& c : commands) {
      if (app.got_subcommand(c.name)) {
        c.run(config);
        return EXIT_SUCCESS;
      }
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return EXIT_FAILURE;
}

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

#include "specrec/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "specrec/error.hpp"

namespace specrec::cli {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "data.path", "data.delimiter", "data.user_col", "data.item_col", "data.weight_col",
      "data.timestamp_col", "data.has_header", "data.min_rating", "data.k_core",
      "split.dir", "split.train", "split.validation", "split.test", "split.seed",
      "model.name", "model.alpha", "model.beta", "model.beta_tilde", "model.f",
      "model.lambda", "solver.tol", "solver.max_iter", "solver.seed", "eval.phase",
      "eval.cutoffs", "grid.alpha", "grid.beta", "grid.f", "grid.lambda",
      "sweep.beta_tilde", "sweep.cutoff", "filter.k", "filter.lambda_min",
      "filter.lambda_max", "filter.points", "output.dir", "output.threads"};
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value,
                      const std::string& why) {
  throw Error("config " + key + " = '" + value + "': " + why);
}

double to_real(const std::string& key, const std::string& v) {
  double out;
  const std::string t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(out))
    bad(key, v, "expected a real number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out;
  const std::string t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    bad(key, v, "expected a nonnegative integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  bad(key, v, "expected true or false");
}

std::string unescape_delimiter(const std::string& v) {
  if (v == "\\t" || v == "tab") return "\t";
  if (v == "space") return " ";
  return v;
}

std::string escape_delimiter(const std::string& v) {
  if (v == "\t") return "\\t";
  if (v == " ") return "space";
  return v;
}

std::string fmt_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_real(v[k]);
    } else {
      out += std::to_string(v[k]);
    }
  }
  return out;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return {};
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) bad("list", text, "range must be start:stop:step");
    const double start = to_real("list", parts[0]);
    const double stop = to_real("list", parts[1]);
    const double step = to_real("list", parts[2]);
    if (!(step > 0) || stop < start) bad("list", text, "need step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (n > 100000) bad("list", text, "range too long");
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) {
      // Snap to 12 decimals so 0:1:0.1 yields 0.3, not 0.30000000000000004.
      out.push_back(std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12);
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(t);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(to_real("list", item));
  return out;
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_real_list(text)) {
    if (v < 0 || v != std::floor(v)) bad("list", text, "expected nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

pt::ptree read_config_tree(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(std::string("cannot read config: ") + e.what());
  }
  return tree;
}

void apply_override(pt::ptree& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("override '" + assignment + "' lacks '='");
  const std::string key = trim(assignment.substr(0, eq));
  if (!known_keys().count(key)) throw Error("unknown config key '" + key + "'");
  tree.put(pt::ptree::path_type(key, '.'), trim(assignment.substr(eq + 1)));
}

ExperimentConfig resolve_config(const pt::ptree& tree) {
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error("config key '" + section + "' is outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!known_keys().count(full)) throw Error("unknown config key '" + full + "'");
    }
  }
  auto get = [&tree](const std::string& key) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    std::string t = trim(*v);
    // Allow quoted values, e.g. delimiter = " ".
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
    return t;
  };
  auto set_u64 = [&](const std::string& key, auto& dst) {
    if (auto v = get(key)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_u64(key, *v));
  };
  auto set_real = [&](const std::string& key, double& dst) {
    if (auto v = get(key)) dst = to_real(key, *v);
  };
  auto set_opt_col = [&](const std::string& key, std::optional<std::size_t>& dst) {
    if (auto v = get(key); v && !v->empty()) dst = to_u64(key, *v);
  };

  if (auto v = get("data.path")) c.data_path = *v;
  if (auto v = get("data.delimiter")) {
    c.csv.delimiter = unescape_delimiter(*v);
    if (c.csv.delimiter.empty()) bad("data.delimiter", *v, "must not be empty");
  }
  set_u64("data.user_col", c.csv.user_col);
  set_u64("data.item_col", c.csv.item_col);
  set_opt_col("data.weight_col", c.csv.weight_col);
  set_opt_col("data.timestamp_col", c.csv.timestamp_col);
  if (auto v = get("data.has_header")) c.csv.has_header = to_bool("data.has_header", *v);
  if (auto v = get("data.min_rating"); v && !v->empty()) {
    c.csv.min_rating = to_real("data.min_rating", *v);
    if (!c.csv.weight_col) bad("data.min_rating", *v, "requires data.weight_col");
  }
  set_u64("data.k_core", c.k_core);
  if (c.k_core == 0) bad("data.k_core", "0", "must be >= 1");

  if (auto v = get("split.dir")) c.split_dir = *v;
  set_real("split.train", c.ratios.train);
  set_real("split.validation", c.ratios.validation);
  set_real("split.test", c.ratios.test);
  if (!(c.ratios.train > 0 && c.ratios.validation > 0 && c.ratios.test > 0) ||
      std::abs(c.ratios.train + c.ratios.validation + c.ratios.test - 1.0) > 1e-9)
    throw Error("config split ratios must be positive and sum to 1");
  set_u64("split.seed", c.split_seed);

  if (auto v = get("model.name")) {
    c.model = *v;
    if (c.model != "psge" && c.model != "sgmc" && c.model != "puresvd" && c.model != "ease")
      bad("model.name", *v, "expected psge, sgmc, puresvd or ease");
  }
  set_real("model.alpha", c.alpha);
  set_real("model.beta", c.beta);
  if (auto v = get("model.beta_tilde"); v && !v->empty())
    c.beta_tilde = to_real("model.beta_tilde", *v);
  set_u64("model.f", c.f);
  if (c.f == 0) bad("model.f", "0", "must be >= 1");
  set_real("model.lambda", c.lambda_reg);
  if (!(c.lambda_reg > 0)) bad("model.lambda", fmt_real(c.lambda_reg), "must be positive");
  if (c.model == "sgmc") {
    c.alpha = c.beta = 0.5;
    c.beta_tilde = 0.5;
  }

  set_real("solver.tol", c.solver.tol);
  if (!(c.solver.tol > 0)) bad("solver.tol", fmt_real(c.solver.tol), "must be positive");
  set_u64("solver.max_iter", c.solver.max_iter);
  set_u64("solver.seed", c.solver.seed);

  if (auto v = get("eval.phase")) {
    try {
      c.phase = parse_phase(*v);
    } catch (const std::invalid_argument&) {
      bad("eval.phase", *v, "expected validation or test");
    }
  }
  if (auto v = get("eval.cutoffs")) c.cutoffs = parse_count_list(*v);
  if (c.cutoffs.empty() || std::count(c.cutoffs.begin(), c.cutoffs.end(), 0u))
    throw Error("config eval.cutoffs must be a nonempty list of positive counts");
  std::sort(c.cutoffs.begin(), c.cutoffs.end());
  c.cutoffs.erase(std::unique(c.cutoffs.begin(), c.cutoffs.end()), c.cutoffs.end());

  c.grid_alpha = parse_real_list(get("grid.alpha").value_or("0:1:0.1"));
  c.grid_beta = parse_real_list(get("grid.beta").value_or("0:1:0.1"));
  c.grid_f = parse_count_list(get("grid.f").value_or(std::to_string(c.f)));
  c.grid_lambda = parse_real_list(get("grid.lambda").value_or(fmt_real(c.lambda_reg)));
  if (c.grid_alpha.empty() || c.grid_beta.empty() || c.grid_f.empty() || c.grid_lambda.empty())
    throw Error("config grid lists must not be empty");
  if (std::count(c.grid_f.begin(), c.grid_f.end(), 0u)) throw Error("config grid.f has a zero");
  for (double l : c.grid_lambda)
    if (!(l > 0)) throw Error("config grid.lambda values must be positive");

  c.sweep_beta_tilde = parse_real_list(get("sweep.beta_tilde").value_or("0:1:0.1"));
  if (c.sweep_beta_tilde.empty()) throw Error("config sweep.beta_tilde must not be empty");
  set_u64("sweep.cutoff", c.sweep_cutoff);
  if (c.sweep_cutoff == 0) bad("sweep.cutoff", "0", "must be >= 1");

  if (auto v = get("filter.k")) c.filter_k = parse_count_list(*v);
  if (c.filter_k.empty()) throw Error("config filter.k must not be empty");
  set_real("filter.lambda_min", c.filter_lambda_min);
  set_real("filter.lambda_max", c.filter_lambda_max);
  set_u64("filter.points", c.filter_points);
  if (!(c.filter_lambda_min >= -1.0 && c.filter_lambda_max <= 1.0 &&
        c.filter_lambda_min <= c.filter_lambda_max))
    throw Error("config filter range must satisfy -1 <= lambda_min <= lambda_max <= 1");
  if (c.filter_points < 2) throw Error("config filter.points must be >= 2");

  if (auto v = get("output.dir")) c.out_dir = *v;
  if (auto v = get("output.threads")) c.threads = static_cast<int>(to_u64("output.threads", *v));
  return c;
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto opt_col = [](const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  os << "[data]\n"
     << "path = " << c.data_path.string() << "\n"
     << "delimiter = " << escape_delimiter(c.csv.delimiter) << "\n"
     << "user_col = " << c.csv.user_col << "\n"
     << "item_col = " << c.csv.item_col << "\n"
     << "weight_col = " << opt_col(c.csv.weight_col) << "\n"
     << "timestamp_col = " << opt_col(c.csv.timestamp_col) << "\n"
     << "has_header = " << (c.csv.has_header ? "true" : "false") << "\n"
     << "min_rating = " << (c.csv.min_rating ? fmt_real(*c.csv.min_rating) : "") << "\n"
     << "k_core = " << c.k_core << "\n\n"
     << "[split]\n"
     << "dir = " << c.resolved_split_dir().string() << "\n"
     << "train = " << fmt_real(c.ratios.train) << "\n"
     << "validation = " << fmt_real(c.ratios.validation) << "\n"
     << "test = " << fmt_real(c.ratios.test) << "\n"
     << "seed = " << c.split_seed << "\n\n"
     << "[model]\n"
     << "name = " << c.model << "\n"
     << "alpha = " << fmt_real(c.alpha) << "\n"
     << "beta = " << fmt_real(c.beta) << "\n"
     << "beta_tilde = " << fmt_real(c.effective_beta_tilde()) << "\n"
     << "f = " << c.f << "\n"
     << "lambda = " << fmt_real(c.lambda_reg) << "\n\n"
     << "[solver]\n"
     << "tol = " << fmt_real(c.solver.tol) << "\n"
     << "max_iter = " << c.solver.max_iter << "\n"
     << "seed = " << c.solver.seed << "\n\n"
     << "[eval]\n"
     << "phase = " << phase_name(c.phase) << "\n"
     << "cutoffs = " << fmt_list(c.cutoffs) << "\n\n"
     << "[grid]\n"
     << "alpha = " << fmt_list(c.grid_alpha) << "\n"
     << "beta = " << fmt_list(c.grid_beta) << "\n"
     << "f = " << fmt_list(c.grid_f) << "\n"
     << "lambda = " << fmt_list(c.grid_lambda) << "\n\n"
     << "[sweep]\n"
     << "beta_tilde = " << fmt_list(c.sweep_beta_tilde) << "\n"
     << "cutoff = " << c.sweep_cutoff << "\n\n"
     << "[filter]\n"
     << "k = " << fmt_list(c.filter_k) << "\n"
     << "lambda_min = " << fmt_real(c.filter_lambda_min) << "\n"
     << "lambda_max = " << fmt_real(c.filter_lambda_max) << "\n"
     << "points = " << c.filter_points << "\n\n"
     << "[output]\n"
     << "dir = " << c.out_dir.string() << "\n"
     << "threads = " << c.threads << "\n";
  return os.str();
}

}  // namespace specrec::cli

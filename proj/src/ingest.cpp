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

#include "specrec/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "specrec/error.hpp"

namespace specrec {
namespace {

std::vector<std::string_view> split_fields(std::string_view line,
                                           std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() &&
         std::isfinite(out);
}

bool digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t k = pos; k < pos + n; ++k) {
    if (s[k] < '0' || s[k] > '9') return false;
    out = out * 10 + (s[k] - '0');
  }
  return true;
}

// YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|(+|-)HH[:]MM] -> seconds since epoch.
bool parse_iso8601(std::string_view s, std::int64_t& out) {
  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' ||
      !digits(s, 5, 2, mo) || s[7] != '-' || !digits(s, 8, 2, d))
    return false;
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (!digits(s, pos + 1, 2, h) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !digits(s, pos + 4, 2, mi))
      return false;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!digits(s, pos + 1, 2, sec)) return false;
      pos += 3;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      }
    }
  }
  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      int oh, om;
      if (!digits(s, pos + 1, 2, oh)) return false;
      pos += 3;
      if (pos < s.size() && s[pos] == ':') ++pos;
      if (!digits(s, pos, 2, om)) return false;
      pos += 2;
      offset = sign * (oh * 3600 + om * 60);
    }
  }
  if (pos != s.size()) return false;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return false;
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  out = days * 86400 + h * 3600 + mi * 60 + sec - offset;
  return true;
}

std::uint64_t fnv1a(std::string_view s,
                    std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection; std distributions are not
// reproducible across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

bool all_digits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string> sorted_tokens(std::unordered_set<std::string> set) {
  std::vector<std::string> v(set.begin(), set.end());
  std::sort(v.begin(), v.end(), token_less);
  return v;
}

InteractionMatrix from_pairs(std::size_t n_users, std::size_t n_items,
                             std::vector<std::pair<Index, Index>>& pairs) {
  std::vector<Triplet> t;
  t.reserve(pairs.size());
  for (auto [u, i] : pairs) t.push_back({u, i, 1.0});
  return InteractionMatrix::from_triplets(n_users, n_items, std::move(t));
}

void check_token(const std::string& t) {
  if (t.empty() || t.find_first_of("\t\n\r") != std::string::npos)
    throw Error("token cannot be persisted: '" + t + "'");
}

std::string hex64(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

void write_matrix_tsv(const InteractionMatrix& m, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  for (Index u = 0; u < m.n_users(); ++u)
    for (Index i : m.row_items(u)) out << u << '\t' << i << '\n';
  if (!out) throw Error("write failed: " + p.string());
}

void write_index_tsv(const IndexMap& map, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  for (Index id = 0; id < map.size(); ++id) out << id << '\t' << map.token(id) << '\n';
  if (!out) throw Error("write failed: " + p.string());
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return in;
}

IndexMap read_index_tsv(const std::filesystem::path& p) {
  std::ifstream in = open_in(p);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::int64_t id;
    if (tab == std::string::npos || !parse_int(std::string_view(line).substr(0, tab), id) ||
        id != static_cast<std::int64_t>(tokens.size()))
      throw ParseError("bad index row in " + p.filename().string(), n);
    tokens.push_back(line.substr(tab + 1));
  }
  return IndexMap(std::move(tokens));
}

InteractionMatrix read_matrix_tsv(const std::filesystem::path& p,
                                  std::size_t n_users, std::size_t n_items) {
  std::ifstream in = open_in(p);
  std::vector<Triplet> t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line, "\t");
    std::int64_t u, i;
    if (f.size() != 2 || !parse_int(f[0], u) || !parse_int(f[1], i) || u < 0 ||
        i < 0 || static_cast<std::size_t>(u) >= n_users ||
        static_cast<std::size_t>(i) >= n_items)
      throw ParseError("bad interaction row in " + p.filename().string(), n);
    t.push_back({static_cast<Index>(u), static_cast<Index>(i), 1.0});
  }
  return InteractionMatrix::from_triplets(n_users, n_items, std::move(t));
}

}  // namespace

RawInteractions parse_triplets(std::istream& in, const CsvSpec& spec) {
  if (spec.delimiter.empty()) throw std::invalid_argument("empty delimiter");
  if (spec.min_rating && !spec.weight_col)
    throw std::invalid_argument("min_rating requires a weight column");
  std::size_t needed = std::max(spec.user_col, spec.item_col);
  if (spec.weight_col) needed = std::max(needed, *spec.weight_col);
  if (spec.timestamp_col) needed = std::max(needed, *spec.timestamp_col);

  RawInteractions raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && spec.has_header) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, spec.delimiter);
    if (fields.size() <= needed)
      throw ParseError("expected at least " + std::to_string(needed + 1) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    Interaction rec;
    rec.user = std::string(trim(fields[spec.user_col]));
    rec.item = std::string(trim(fields[spec.item_col]));
    if (rec.user.empty() || rec.item.empty())
      throw ParseError("empty user or item token", line_no);
    if (spec.weight_col) {
      if (!parse_double(trim(fields[*spec.weight_col]), rec.weight) || rec.weight < 0)
        throw ParseError("bad weight '" + std::string(fields[*spec.weight_col]) + "'",
                         line_no);
      if (spec.min_rating && rec.weight < *spec.min_rating) continue;
    }
    if (spec.timestamp_col) {
      const auto ts = trim(fields[*spec.timestamp_col]);
      std::int64_t v;
      if (parse_int(ts, v) || parse_iso8601(ts, v)) {
        rec.timestamp = v;
      } else {
        throw ParseError("bad timestamp '" + std::string(ts) + "'", line_no);
      }
    }
    raw.records.push_back(std::move(rec));
  }
  if (in.bad()) throw Error("read error");
  return deduplicate(raw);
}

RawInteractions load_triplets(const std::filesystem::path& path,
                              const CsvSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_triplets(in, spec);
}

RawInteractions deduplicate(const RawInteractions& raw) {
  struct PairHash {
    std::size_t operator()(const std::pair<std::string, std::string>& p) const {
      return fnv1a(p.second, fnv1a(p.first) ^ 0xff);
    }
  };
  std::unordered_map<std::pair<std::string, std::string>, std::size_t, PairHash> slot;
  RawInteractions out;
  for (const Interaction& rec : raw.records) {
    auto [it, inserted] = slot.try_emplace({rec.user, rec.item}, out.records.size());
    if (inserted) {
      out.records.push_back(rec);
      continue;
    }
    Interaction& kept = out.records[it->second];
    if (rec.timestamp && (!kept.timestamp || *rec.timestamp > *kept.timestamp)) kept = rec;
  }
  return out;
}

RawInteractions k_core_filter(const RawInteractions& raw, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k_core must be >= 1");
  std::unordered_map<std::string, std::size_t> user_id, item_id;
  std::vector<std::pair<std::size_t, std::size_t>> edge_of(raw.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto u = user_id.try_emplace(raw.records[r].user, user_id.size()).first->second;
    const auto i = item_id.try_emplace(raw.records[r].item, item_id.size()).first->second;
    edge_of[r] = {u, i};
  }
  const std::size_t n_u = user_id.size();
  // Nodes 0..n_u-1 are users, the rest items. Adjacency over distinct pairs.
  std::vector<std::vector<std::size_t>> adj(n_u + item_id.size());
  {
    auto pairs = edge_of;
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (auto [u, i] : pairs) {
      adj[u].push_back(n_u + i);
      adj[n_u + i].push_back(u);
    }
  }
  std::vector<std::size_t> deg(adj.size());
  std::vector<char> alive(adj.size(), 1);
  std::queue<std::size_t> pending;
  for (std::size_t v = 0; v < adj.size(); ++v) {
    deg[v] = adj[v].size();
    if (deg[v] < k) pending.push(v);
  }
  while (!pending.empty()) {
    const std::size_t v = pending.front();
    pending.pop();
    if (!alive[v]) continue;
    alive[v] = 0;
    for (std::size_t w : adj[v]) {
      if (alive[w] && deg[w]-- == k) pending.push(w);
    }
  }
  RawInteractions out;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    if (alive[edge_of[r].first] && alive[n_u + edge_of[r].second])
      out.records.push_back(raw.records[r]);
  }
  if (out.empty() && !raw.empty())
    spdlog::warn("k-core filter with k={} removed every interaction", k);
  return out;
}

IndexMap::IndexMap(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.try_emplace(tokens_[i], static_cast<Index>(i)).second)
      throw Error("duplicate token '" + tokens_[i] + "'");
  }
}

std::optional<Index> IndexMap::find(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Index IndexMap::id(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) throw Error("unknown token '" + token + "'");
  return it->second;
}

bool token_less(const std::string& a, const std::string& b) {
  if (all_digits(a) && all_digits(b)) {
    const auto sa = a.find_first_not_of('0');
    const auto sb = b.find_first_not_of('0');
    const std::string_view va = sa == std::string::npos ? "" : std::string_view(a).substr(sa);
    const std::string_view vb = sb == std::string::npos ? "" : std::string_view(b).substr(sb);
    if (va.size() != vb.size()) return va.size() < vb.size();
    if (va != vb) return va < vb;
  }
  return a < b;
}

SplitDataset split_per_user(const RawInteractions& raw, const SplitRatios& ratios,
                            std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must be positive and sum to 1");

  std::unordered_set<std::string> user_set, item_set;
  for (const auto& rec : raw.records) {
    user_set.insert(rec.user);
    item_set.insert(rec.item);
  }
  SplitDataset ds;
  ds.users = IndexMap(sorted_tokens(std::move(user_set)));
  ds.items = IndexMap(sorted_tokens(std::move(item_set)));
  ds.seed = seed;

  std::vector<std::vector<Index>> profile(ds.n_users());
  for (const auto& rec : raw.records)
    profile[ds.users.id(rec.user)].push_back(ds.items.id(rec.item));

  std::vector<std::pair<Index, Index>> train, val, test;
  for (Index u = 0; u < ds.n_users(); ++u) {
    auto& items = profile[u];
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    const std::size_t n = items.size();
    const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * n + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.validation * n + 1e-9));

    std::mt19937_64 rng(splitmix64(seed ^ fnv1a(ds.users.token(u))));
    for (std::size_t j = n; j > 1; --j)
      std::swap(items[j - 1], items[bounded(rng, j)]);

    for (std::size_t j = 0; j < n; ++j) {
      auto& dst = j < n_test ? test : (j < n_test + n_val ? val : train);
      dst.emplace_back(u, items[j]);
    }
  }
  ds.train = from_pairs(ds.n_users(), ds.n_items(), train);
  ds.validation = from_pairs(ds.n_users(), ds.n_items(), val);
  ds.test = from_pairs(ds.n_users(), ds.n_items(), test);
  return ds;
}

InteractionMatrix merge_train_val(const SplitDataset& ds) {
  const InteractionMatrix& a = ds.train;
  const InteractionMatrix& b = ds.validation;
  if (a.n_users() != b.n_users() || a.n_items() != b.n_items())
    throw DimensionError("train and validation shapes differ");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (const InteractionMatrix* m : {&a, &b})
    for (Index u = 0; u < m->n_users(); ++u) {
      auto items = m->row_items(u);
      auto vals = m->row_values(u);
      for (std::size_t k = 0; k < items.size(); ++k) t.push_back({u, items[k], vals[k]});
    }
  return InteractionMatrix::from_triplets(a.n_users(), a.n_items(), std::move(t));
}

SplitDataset prepare_dataset(const std::filesystem::path& path, const CsvSpec& spec,
                             std::size_t k_core, const SplitRatios& ratios,
                             std::uint64_t seed) {
  RawInteractions raw = load_triplets(path, spec);
  spdlog::info("loaded {} interactions from {}", raw.size(), path.string());
  raw = k_core_filter(raw, k_core);
  spdlog::info("{} interactions after {}-core", raw.size(), k_core);
  SplitDataset ds = split_per_user(raw, ratios, seed);
  ds.k_core = k_core;
  return ds;
}

void save_split(const SplitDataset& ds, const std::filesystem::path& dir) {
  for (const auto& t : ds.users.tokens()) check_token(t);
  for (const auto& t : ds.items.tokens()) check_token(t);
  std::filesystem::create_directories(dir);
  write_matrix_tsv(ds.train, dir / "train.tsv");
  write_matrix_tsv(ds.validation, dir / "validation.tsv");
  write_matrix_tsv(ds.test, dir / "test.tsv");
  write_index_tsv(ds.users, dir / "users.tsv");
  write_index_tsv(ds.items, dir / "items.tsv");

  nlohmann::ordered_json meta;
  meta["format_version"] = 1;
  meta["seed"] = ds.seed;
  meta["k_core"] = ds.k_core;
  meta["n_users"] = ds.n_users();
  meta["n_items"] = ds.n_items();
  meta["n_interactions"] = ds.n_interactions();
  meta["n_train"] = ds.train.nnz();
  meta["n_validation"] = ds.validation.nnz();
  meta["n_test"] = ds.test.nnz();
  meta["fingerprint"] = hex64(fingerprint(ds));
  std::ofstream out(dir / "meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
  if (!out) throw Error("write failed: meta.json");
}

SplitDataset load_split(const std::filesystem::path& dir) {
  nlohmann::json meta;
  {
    std::ifstream in = open_in(dir / "meta.json");
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("meta.json: ") + e.what());
    }
  }
  if (meta.value("format_version", 0) != 1) throw Error("unsupported split format");
  SplitDataset ds;
  ds.users = read_index_tsv(dir / "users.tsv");
  ds.items = read_index_tsv(dir / "items.tsv");
  ds.seed = meta.at("seed").get<std::uint64_t>();
  ds.k_core = meta.at("k_core").get<std::size_t>();
  if (meta.at("n_users").get<std::size_t>() != ds.n_users() ||
      meta.at("n_items").get<std::size_t>() != ds.n_items())
    throw Error("index files disagree with meta.json");
  ds.train = read_matrix_tsv(dir / "train.tsv", ds.n_users(), ds.n_items());
  ds.validation = read_matrix_tsv(dir / "validation.tsv", ds.n_users(), ds.n_items());
  ds.test = read_matrix_tsv(dir / "test.tsv", ds.n_users(), ds.n_items());
  if (meta.contains("fingerprint") &&
      meta["fingerprint"].get<std::string>() != hex64(fingerprint(ds)))
    throw Error("split files do not match the recorded fingerprint");
  return ds;
}

std::uint64_t fingerprint(const SplitDataset& ds) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(fingerprint(ds.train));
  mix(fingerprint(ds.validation));
  mix(fingerprint(ds.test));
  for (const auto& t : ds.users.tokens()) h = fnv1a(t, h ^ 0x1f);
  for (const auto& t : ds.items.tokens()) h = fnv1a(t, h ^ 0x2f);
  mix(ds.seed);
  mix(ds.k_core);
  return h;
}

}  // namespace specrec

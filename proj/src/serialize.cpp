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

#include "specrec/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "specrec/error.hpp"

namespace specrec {
namespace {

constexpr std::string_view kFactorsMagic = "SPECFACT";
// Refuse absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

}  // namespace

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u64(std::uint64_t v) {
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xff);
  out_.write(buf, 8);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::bytes(std::string_view s) {
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::string(std::string_view s) {
  u64(s.size());
  bytes(s);
}

void BinaryWriter::f64_block(const double* data, std::size_t n) {
  std::vector<char> buf(8 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = std::bit_cast<std::uint64_t>(data[k]);
    for (int b = 0; b < 8; ++b) buf[8 * k + b] = static_cast<char>((v >> (8 * b)) & 0xff);
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::uint8_t BinaryReader::u8() {
  const int c = in_.get();
  if (c == std::char_traits<char>::eof()) throw Error("truncated binary input");
  return static_cast<std::uint8_t>(c);
}

std::uint64_t BinaryReader::u64() {
  unsigned char buf[8];
  if (!in_.read(reinterpret_cast<char*>(buf), 8)) throw Error("truncated binary input");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t{buf[b]} << (8 * b);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::bytes(std::size_t n) {
  std::string s(n, '\0');
  if (!in_.read(s.data(), static_cast<std::streamsize>(n)))
    throw Error("truncated binary input");
  return s;
}

std::string BinaryReader::string() {
  const std::uint64_t n = u64();
  if (n > (1u << 20)) throw Error("string field too long");
  return bytes(n);
}

void BinaryReader::f64_block(double* data, std::size_t n) {
  std::vector<unsigned char> buf(8 * n);
  if (!in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw Error("truncated binary input");
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t{buf[8 * k + b]} << (8 * b);
    data[k] = std::bit_cast<double>(v);
  }
}

void write_factors(BinaryWriter& w, const SpectralFactors& factors) {
  const std::size_t f = factors.dim();
  if (static_cast<std::size_t>(factors.p_tilde.cols()) != f ||
      static_cast<std::size_t>(factors.q_tilde.cols()) != f)
    throw DimensionError("factor blocks disagree with sigma length");
  w.bytes(kFactorsMagic);
  w.u8(kFactorsVersion);
  w.u64(factors.n_users());
  w.u64(factors.n_items());
  w.u64(f);
  w.f64(factors.meta.alpha);
  w.f64(factors.meta.beta);
  w.u64(factors.meta.seed);
  w.f64(factors.meta.tol);
  w.f64_block(factors.sigma.data(), f);
  w.f64_block(factors.p_tilde.data(), factors.p_tilde.size());
  w.f64_block(factors.q_tilde.data(), factors.q_tilde.size());
}

SpectralFactors read_factors(BinaryReader& r) {
  if (r.bytes(kFactorsMagic.size()) != kFactorsMagic) throw Error("not a factors file");
  const auto version = r.u8();
  if (version != kFactorsVersion)
    throw Error("unsupported factors version " + std::to_string(version));
  const std::uint64_t n_users = r.u64();
  const std::uint64_t n_items = r.u64();
  const std::uint64_t f = r.u64();
  if (f > n_users + n_items || n_users * f > kMaxElements || n_items * f > kMaxElements)
    throw Error("implausible factors header");
  SpectralFactors out;
  out.meta.alpha = r.f64();
  out.meta.beta = r.f64();
  out.meta.seed = r.u64();
  out.meta.tol = r.f64();
  out.sigma.resize(f);
  r.f64_block(out.sigma.data(), f);
  out.p_tilde.resize(static_cast<Eigen::Index>(n_users), static_cast<Eigen::Index>(f));
  r.f64_block(out.p_tilde.data(), out.p_tilde.size());
  out.q_tilde.resize(static_cast<Eigen::Index>(n_items), static_cast<Eigen::Index>(f));
  r.f64_block(out.q_tilde.data(), out.q_tilde.size());
  return out;
}

void save_factors(const SpectralFactors& factors, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  write_factors(w, factors);
  if (!out) throw Error("write failed: " + path.string());
}

SpectralFactors load_factors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  BinaryReader r(in);
  return read_factors(r);
}

}  // namespace specrec

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
#include <string>
#include <string_view>

#include "specrec/spectral.hpp"

namespace specrec {

// Little-endian primitive writer, independent of host byte order.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view s);
  void string(std::string_view s);  // u64 length + bytes
  void f64_block(const double* data, std::size_t n);

 private:
  std::ostream& out_;
};

// Throws Error on truncated input.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);
  std::string string();
  void f64_block(double* data, std::size_t n);

 private:
  std::istream& in_;
};

// Factor file layout (all little-endian):
//   "SPECFACT" | u8 version = 1 | u64 U | u64 I | u64 f
//   | f64 alpha | f64 beta | u64 seed | f64 tol
//   | f64 sigma[f] | f64 P[U*f] row-major | f64 Q[I*f] row-major
inline constexpr std::uint8_t kFactorsVersion = 1;

void write_factors(BinaryWriter& w, const SpectralFactors& factors);
SpectralFactors read_factors(BinaryReader& r);

void save_factors(const SpectralFactors& factors, const std::filesystem::path& path);
SpectralFactors load_factors(const std::filesystem::path& path);

}  // namespace specrec

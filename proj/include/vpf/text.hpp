// Copyright 2026 The VPF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vpf/common.hpp"

namespace vpf::text {

/// Splits on ASCII non-alphanumerics and folds ASCII case. Bytes >= 0x80 are
/// word characters, so UTF-8 scripts (Hebrew, Arabic, ...) tokenize by
/// whitespace and punctuation.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (word) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Number of UTF-8 code points.
inline std::size_t codepoints(std::string_view s) {
  std::size_t n = 0;
  for (const char ch : s)
    if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++n;
  return n;
}

/// Hashed token-frequency embedding: each token goes to bucket
/// hash(token, seed) mod dim with sign from a second hash, then the vector is
/// L2-normalized. Empty (token-free) text gives the zero vector. If signed
/// contributions cancel exactly, the unsigned counts are used instead so any
/// text with tokens has unit norm.
inline std::vector<double> embed_text(std::string_view s, int dim, std::uint64_t seed) {
  if (dim < 1) throw InputError("InvalidArgument", "embedding dim must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  const auto tokens = tokenize(s);
  if (tokens.empty()) return v;
  std::vector<double> unsigned_counts(v.size(), 0.0);
  for (const auto& t : tokens) {
    const std::uint64_t h = fnv1a64(t, seed);
    const std::size_t bucket = h % static_cast<std::uint64_t>(dim);
    const double sign = (splitmix64(h ^ 0x5bd1e995ULL) >> 63) ? -1.0 : 1.0;
    v[bucket] += sign;
    unsigned_counts[bucket] += 1.0;
  }
  double norm = 0.0;
  for (const double x : v) norm += x * x;
  if (norm == 0.0) {
    v = std::move(unsigned_counts);
    for (const double x : v) norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace vpf::text

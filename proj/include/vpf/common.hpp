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

// Shared primitives: error types, calendar dates, string helpers, stable
// hashing, seeded randomness and a tiny leveled logger.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vpf {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every error raised by the library. `kind()` is the stable
/// machine-readable name (e.g. "UnknownVoteToken").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Bad or missing input data. The CLI maps these to exit status 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A cross-artifact contract was broken (e.g. column_spec hash mismatch).
/// The CLI maps these to exit status 3.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error("ContractViolation", what) {}
};

#define VPF_DEFINE_INPUT_ERROR(Name)                            \
  class Name : public InputError {                              \
   public:                                                      \
    explicit Name(const std::string& what) : InputError(#Name, what) {} \
  };

VPF_DEFINE_INPUT_ERROR(UnknownVoteToken)
VPF_DEFINE_INPUT_ERROR(UnsupportedFormat)
VPF_DEFINE_INPUT_ERROR(FileUnreadable)
VPF_DEFINE_INPUT_ERROR(SchemaFieldUnmapped)
VPF_DEFINE_INPUT_ERROR(OverrideFileMalformed)
VPF_DEFINE_INPUT_ERROR(ConfigInvalid)
VPF_DEFINE_INPUT_ERROR(MissingCoalitionEntry)
VPF_DEFINE_INPUT_ERROR(EmbeddingFileMissingKey)
VPF_DEFINE_INPUT_ERROR(EmptyInput)
VPF_DEFINE_INPUT_ERROR(DegenerateDates)
VPF_DEFINE_INPUT_ERROR(EmptyTrainingSet)
VPF_DEFINE_INPUT_ERROR(FeatureCountMismatch)
VPF_DEFINE_INPUT_ERROR(EmptyResults)
VPF_DEFINE_INPUT_ERROR(LengthMismatch)
VPF_DEFINE_INPUT_ERROR(NoJoinableBills)
VPF_DEFINE_INPUT_ERROR(EmptyBackground)
VPF_DEFINE_INPUT_ERROR(TooManyFeatures)
VPF_DEFINE_INPUT_ERROR(MissingArtifact)
VPF_DEFINE_INPUT_ERROR(ParseError)

#undef VPF_DEFINE_INPUT_ERROR

// ---------------------------------------------------------------------------
// Dates
// ---------------------------------------------------------------------------

/// Proleptic Gregorian calendar date at day resolution, stored as days since
/// 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  static constexpr Date from_days(std::int32_t days) {
    Date d;
    d.days_ = days;
    return d;
  }
  static constexpr Date from_ymd(int y, unsigned m, unsigned d) {
    // days_from_civil (H. Hinnant)
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return from_days(era * 146097 + static_cast<int>(doe) - 719468);
  }

  constexpr std::int32_t days() const { return days_; }

  struct Ymd {
    int year;
    unsigned month;
    unsigned day;
  };
  constexpr Ymd ymd() const {
    const int z = days_ + 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
  }

  std::string iso() const {
    const auto [y, m, d] = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
  }

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::int32_t days_ = 0;
};

inline constexpr bool valid_ymd(int y, unsigned m, unsigned d) {
  if (m < 1 || m > 12 || d < 1) return false;
  constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const unsigned limit = (m == 2 && leap) ? 29 : kDays[m - 1];
  return d <= limit;
}

namespace detail {

inline bool parse_uint(std::string_view s, std::size_t& pos, int width_max,
                       int& out) {
  const std::size_t start = pos;
  int v = 0;
  while (pos < s.size() && pos - start < static_cast<std::size_t>(width_max) &&
         std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    ++pos;
  }
  out = v;
  return pos > start;
}

inline int month_from_abbrev(std::string_view s) {
  static constexpr std::string_view kNames[] = {
      "jan", "feb", "mar", "apr", "may", "jun",
      "jul", "aug", "sep", "oct", "nov", "dec"};
  if (s.size() < 3) return 0;
  std::string low;
  for (std::size_t i = 0; i < 3; ++i)
    low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
  for (int i = 0; i < 12; ++i)
    if (kNames[i] == low) return i + 1;
  return 0;
}

}  // namespace detail

/// Parses `text` with a strftime-like `format` supporting %Y %m %d %b and
/// literal characters. Trailing content after the format is accepted only
/// when it starts with 'T' or ' ' (a time component), which is discarded.
inline std::optional<Date> parse_date(std::string_view text,
                                      std::string_view format = "%Y-%m-%d") {
  std::size_t pos = 0;
  int y = -1, m = -1, d = -1;
  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] == '%' && f + 1 < format.size()) {
      const char spec = format[++f];
      switch (spec) {
        case 'Y':
          if (!detail::parse_uint(text, pos, 4, y)) return std::nullopt;
          break;
        case 'm':
          if (!detail::parse_uint(text, pos, 2, m)) return std::nullopt;
          break;
        case 'd':
          if (!detail::parse_uint(text, pos, 2, d)) return std::nullopt;
          break;
        case 'b': {
          m = detail::month_from_abbrev(text.substr(pos));
          if (m == 0) return std::nullopt;
          pos += 3;
          while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
          break;
        }
        default:
          return std::nullopt;
      }
    } else {
      if (pos >= text.size() || text[pos] != format[f]) return std::nullopt;
      ++pos;
    }
  }
  if (pos < text.size() && text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
  if (y < 0 || m < 0 || d < 0) return std::nullopt;
  if (!valid_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d))) return std::nullopt;
  return Date::from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

/// Strict ISO-8601 calendar date (YYYY-MM-DD).
inline std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return parse_date(text, "%Y-%m-%d");
}

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// ASCII case folding; non-ASCII bytes (UTF-8 continuation) pass through.
inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // Accept integral floats such as "12.0" from JSON exports.
    char* end = nullptr;
    const std::string tmp(s);
    const double d = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || d != static_cast<double>(static_cast<long long>(d)))
      return std::nullopt;
    return static_cast<long long>(d);
  }
  return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
  const std::string v = fold_case(trim(s));
  if (v == "1" || v == "true" || v == "yes" || v == "y" || v == "t") return true;
  if (v == "0" || v == "false" || v == "no" || v == "n" || v == "f") return false;
  return std::nullopt;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Natural identifier order: runs of digits compare by numeric value, other
/// characters byte-wise, so "V2" < "V10". Equal-valued runs with different
/// zero padding fall back to plain byte order.
inline bool natural_less(std::string_view a, std::string_view b) {
  const auto digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && digit(a[ie])) ++ie;
      while (je < b.size() && digit(b[je])) ++je;
      std::string_view x = a.substr(i, ie - i), y = b.substr(j, je - j);
      while (x.size() > 1 && x.front() == '0') x.remove_prefix(1);
      while (y.size() > 1 && y.front() == '0') y.remove_prefix(1);
      if (x.size() != y.size()) return x.size() < y.size();
      if (x != y) return x < y;
      i = ie;
      j = je;
      continue;
    }
    if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
    ++i;
    ++j;
  }
  if ((i < a.size()) != (j < b.size())) return j < b.size();
  return a < b;
}

// ---------------------------------------------------------------------------
// Hashing and randomness
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a 64-bit over raw bytes, optionally seeded. Stable across platforms.
inline constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed ? splitmix64(seed) : 0);
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Derived sub-seed: a documented function of the run seed and a stage name.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  return splitmix64(seed ^ fnv1a64(stage));
}

/// Seeded generator with platform-stable draws (std distributions are not
/// portable across standard libraries, so conversions are done here).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection for unbiased bounded draws.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  /// Poisson(1) draw by inversion.
  int poisson1() {
    const double u = uniform();
    double p = 0.36787944117144233;  // e^-1
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 64) {
      ++k;
      p /= k;
      cdf += p;
    }
    return k;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable(path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileUnreadable("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

// ---------------------------------------------------------------------------
// Logging (VPF_LOG = error|warn|info|debug, default warn)
// ---------------------------------------------------------------------------

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("VPF_LOG");
    if (!env) return LogLevel::kWarn;
    const std::string v = fold_case(env);
    if (v == "error") return LogLevel::kError;
    if (v == "info") return LogLevel::kInfo;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

inline void log(LogLevel level, std::string_view msg) {
  if (level > log_threshold()) return;
  static constexpr const char* kTags[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[vpf %s] %.*s\n", kTags[static_cast<int>(level)],
               static_cast<int>(msg.size()), msg.data());
}

}  // namespace vpf

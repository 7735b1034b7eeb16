// Copyright 2026 The ctxbias Authors
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

#ifndef CTXBIAS_COMMON_HPP_
#define CTXBIAS_COMMON_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace ctxbias {

// Single exception type for every data/domain error in the library.  CLI
// layers map it to a distinct exit code; tests assert on the message text.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInfiniteWeight =
    std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// String helpers.

inline std::vector<std::string_view> SplitChar(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t begin = 0;
  while (true) {
    size_t end = s.find(sep, begin);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(begin));
      return out;
    }
    out.push_back(s.substr(begin, end - begin));
    begin = end + 1;
  }
}

inline std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' ||
                            s[i] == '\n' || s[i] == '\f' || s[i] == '\v')) {
      ++i;
    }
    size_t begin = i;
    while (i < s.size() && !(s[i] == ' ' || s[i] == '\t' || s[i] == '\r' ||
                             s[i] == '\n' || s[i] == '\f' || s[i] == '\v')) {
      ++i;
    }
    if (i > begin) out.push_back(s.substr(begin, i - begin));
  }
  return out;
}

inline std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::string JoinStrings(std::span<const std::string> parts,
                               std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Number parsing/formatting.  std::from_chars/std::to_chars keep doubles
// round-trippable through text files.

inline double ParseDouble(std::string_view s, std::string_view what) {
  if (s == "inf" || s == "Infinity") return kInfiniteWeight;
  if (s == "-inf" || s == "-Infinity") return -kInfiniteWeight;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return value;
}

inline int64_t ParseInt(std::string_view s, std::string_view what) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return value;
}

inline std::string FormatDouble(double value) {
  if (value == kInfiniteWeight) return "inf";
  if (value == -kInfiniteWeight) return "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Numerics.

inline double LogSumExp(std::span<const double> values) {
  double max = -kInfiniteWeight;
  for (double v : values) max = std::max(max, v);
  if (max == -kInfiniteWeight) return -kInfiniteWeight;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

// ---------------------------------------------------------------------------
// Portable randomness.  mt19937_64 output is pinned by the standard; the
// distributions below avoid std::*_distribution, whose algorithms are
// implementation-defined, so seeded runs are byte-identical everywhere.

// Uniform double in [0, 1) with 53 random bits.
inline double UniformReal(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi], inclusive, by rejection.
inline int64_t UniformInt(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  if (lo > hi) throw Error("UniformInt: empty range");
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<int64_t>(rng());  // full 64-bit range
  uint64_t limit = std::numeric_limits<uint64_t>::max() -
                   std::numeric_limits<uint64_t>::max() % span;
  uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<int64_t>(draw % span);
}

inline bool Flip(std::mt19937_64& rng, double p) {
  return UniformReal(rng) < p;
}

}  // namespace ctxbias

#endif  // CTXBIAS_COMMON_HPP_

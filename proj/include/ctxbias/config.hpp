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
//
// Shared CLI configuration: a `key=value` text file with one entry per line,
// `#` comments, and a fixed key set.  Unknown keys and out-of-range values
// are errors; absent keys keep their defaults.  Command-line flags override
// file values after loading.

#ifndef CTXBIAS_CONFIG_HPP_
#define CTXBIAS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxbias/common.hpp"

namespace ctxbias {

struct Config {
  // Input files; empty means unset.
  std::string vocab;
  std::string patterns;
  std::string contacts;
  std::string g2g;
  std::string projection;
  std::string scorer;
  std::string graph;
  // Decoding.
  int beam = 8;
  double lambda = 1.0;
  int max_symbols = 4;
  int nbest = 1;
  // Graph construction.
  double oov_weight = 6.0;
  int order = 4;
  // Variant spelling generation.
  int k_g2g = 2;
  double p = 0.2;
  // Tokenizer sampling.
  int l = 5;
  double alpha = 0.25;
  // Contact-list simulation.
  int min_size = 200;
  int max_size = 400;
  double remove_prob = 0.5;
  double swap_prob = 0.3;
  // Shared.
  std::uint64_t seed = 0;
  int jobs = 1;
};

namespace internal {

inline std::string_view Trim(std::string_view s) {
  size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  size_t e = s.size();
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

inline int RangedInt(std::string_view value, std::string_view key, int lo) {
  int v = static_cast<int>(ParseInt(value, std::string(key)));
  if (v < lo) {
    throw Error(std::string(key) + " must be >= " + std::to_string(lo) +
                ", got " + std::string(value));
  }
  return v;
}

inline double RangedDouble(std::string_view value, std::string_view key,
                           double lo, double hi) {
  double v = ParseDouble(value, std::string(key));
  if (!(v >= lo && v <= hi)) {
    throw Error(std::string(key) + " out of range: " + std::string(value));
  }
  return v;
}

}  // namespace internal

// Applies one `key=value` entry; throws on unknown keys or bad values.
inline void ApplyConfigValue(Config& config, std::string_view key,
                             std::string_view value) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (key == "vocab") {
    config.vocab = value;
  } else if (key == "patterns") {
    config.patterns = value;
  } else if (key == "contacts") {
    config.contacts = value;
  } else if (key == "g2g") {
    config.g2g = value;
  } else if (key == "projection") {
    config.projection = value;
  } else if (key == "scorer") {
    config.scorer = value;
  } else if (key == "graph") {
    config.graph = value;
  } else if (key == "beam") {
    config.beam = internal::RangedInt(value, key, 1);
  } else if (key == "lambda") {
    config.lambda = internal::RangedDouble(value, key, 0.0, kInf);
  } else if (key == "max_symbols") {
    config.max_symbols = internal::RangedInt(value, key, 1);
  } else if (key == "nbest") {
    config.nbest = internal::RangedInt(value, key, 1);
  } else if (key == "oov_weight") {
    config.oov_weight = internal::RangedDouble(value, key, 0.0, kInf);
  } else if (key == "order") {
    config.order = internal::RangedInt(value, key, 1);
  } else if (key == "k_g2g") {
    config.k_g2g = internal::RangedInt(value, key, 0);
  } else if (key == "p") {
    config.p = internal::RangedDouble(value, key, 0.0, 1.0);
  } else if (key == "l") {
    config.l = internal::RangedInt(value, key, 1);
  } else if (key == "alpha") {
    config.alpha = internal::RangedDouble(value, key, 0.0, kInf);
  } else if (key == "min_size") {
    config.min_size = internal::RangedInt(value, key, 1);
  } else if (key == "max_size") {
    config.max_size = internal::RangedInt(value, key, 1);
  } else if (key == "remove_prob") {
    config.remove_prob = internal::RangedDouble(value, key, 0.0, 1.0);
  } else if (key == "swap_prob") {
    config.swap_prob = internal::RangedDouble(value, key, 0.0, 1.0);
  } else if (key == "seed") {
    int64_t v = ParseInt(value, "seed");
    if (v < 0) throw Error("seed must be >= 0, got " + std::string(value));
    config.seed = static_cast<std::uint64_t>(v);
  } else if (key == "jobs") {
    config.jobs = internal::RangedInt(value, key, 1);
  } else {
    throw Error("unknown config key: " + std::string(key));
  }
}

inline Config ParseConfig(std::istream& is) {
  Config config;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    std::string_view view = internal::Trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error("config line " + std::to_string(line_no) +
                  ": expected key=value");
    }
    std::string_view key = internal::Trim(view.substr(0, eq));
    std::string_view value = internal::Trim(view.substr(eq + 1));
    if (key.empty()) {
      throw Error("config line " + std::to_string(line_no) + ": empty key");
    }
    try {
      ApplyConfigValue(config, key, value);
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

// Every non-empty path in the config must name an existing file.
inline void CheckConfigPaths(const Config& config) {
  const std::vector<std::pair<std::string_view, const std::string*>> paths = {
      {"vocab", &config.vocab},         {"patterns", &config.patterns},
      {"contacts", &config.contacts},   {"g2g", &config.g2g},
      {"projection", &config.projection}, {"scorer", &config.scorer},
      {"graph", &config.graph},
  };
  for (const auto& [key, path] : paths) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw Error(std::string(key) + " file not found: " + *path);
    }
  }
}

inline Config LoadConfigFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config file: " + path);
  Config config = ParseConfig(is);
  CheckConfigPaths(config);
  return config;
}

}  // namespace ctxbias

#endif  // CTXBIAS_CONFIG_HPP_

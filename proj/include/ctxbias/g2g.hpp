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

#ifndef CTXBIAS_G2G_HPP_
#define CTXBIAS_G2G_HPP_

#include <iostream>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctxbias/common.hpp"

namespace ctxbias {

// word -> ranked alternative spellings (may include the word itself).
using G2gMap = std::map<std::string, std::vector<std::string>>;

// Lines of `word<TAB>variant,variant,...`.  A duplicate word keeps the last
// row and warns on stderr.
inline G2gMap LoadG2g(std::istream& is) {
  G2gMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    if (fields.size() != 2) {
      throw Error("g2g line " + std::to_string(line_no) +
                  ": expected 'word<TAB>variants'");
    }
    std::string word(fields[0]);
    if (word.empty()) {
      throw Error("g2g line " + std::to_string(line_no) + ": empty word");
    }
    std::vector<std::string> variants;
    for (auto v : SplitChar(fields[1], ',')) {
      if (v.empty()) {
        throw Error("g2g line " + std::to_string(line_no) +
                    ": empty variant for '" + word + "'");
      }
      variants.emplace_back(v);
    }
    if (variants.empty()) {
      throw Error("g2g line " + std::to_string(line_no) +
                  ": no variants for '" + word + "'");
    }
    if (map.count(word) != 0) {
      std::cerr << "warning: g2g line " << line_no << ": duplicate word '"
                << word << "', keeping the last row\n";
    }
    map[word] = std::move(variants);
  }
  return map;
}

// Decode-side expansion: the word itself first, then its top-k ranked
// variants with the identity and any repeats removed.  Result length is at
// most k + 1.
inline std::vector<std::string> DecodeVariants(const std::string& word,
                                               const G2gMap& map, int k) {
  if (k < 0) throw Error("variant count must be >= 0");
  std::vector<std::string> out = {word};
  auto it = map.find(word);
  if (it == map.end()) return out;
  for (int i = 0; i < k && i < static_cast<int>(it->second.size()); ++i) {
    const std::string& v = it->second[i];
    bool seen = false;
    for (const std::string& existing : out) seen = seen || v == existing;
    if (!seen) out.push_back(v);
  }
  return out;
}

// Training-side stochastic replacement.  A token is eligible when the map
// knows it and its 1-best variant differs from the token itself (and, when
// entity_filter is given, the token is an entity word).  Each eligible token
// is independently replaced with probability p by a uniformly drawn
// non-identity variant.
inline std::vector<std::string> TrainReplace(
    const std::vector<std::string>& tokens, const G2gMap& map, double p,
    std::mt19937_64& rng, const std::set<std::string>* entity_filter = nullptr) {
  if (p < 0.0 || p > 1.0) throw Error("replacement probability must be in [0, 1]");
  std::vector<std::string> out = tokens;
  for (std::string& token : out) {
    auto it = map.find(token);
    if (it == map.end()) continue;
    if (it->second.front() == token) continue;
    if (entity_filter != nullptr && entity_filter->count(token) == 0) continue;
    if (!Flip(rng, p)) continue;
    std::vector<const std::string*> pool;
    for (const std::string& v : it->second) {
      if (v != token) pool.push_back(&v);
    }
    token = *pool[UniformInt(rng, 0, static_cast<int64_t>(pool.size()) - 1)];
  }
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_G2G_HPP_

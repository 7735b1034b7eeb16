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
// Projection of the three trie query vectors (fresh start, last piece,
// suffixes of length two or more) into the joint embedding space:
// h = W [start; last; ge2] with W of shape d x 3V.

#ifndef CTXBIAS_PLM_HPP_
#define CTXBIAS_PLM_HPP_

#include <cmath>
#include <istream>
#include <string>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/trie.hpp"

namespace ctxbias {

struct PlmProjection {
  int dim = 0;         // embedding dimension d
  int vocab_size = 0;  // V; rows have 3V columns
  std::vector<std::vector<double>> rows;
};

// Text format: first line `d V`, then d rows of 3V space-separated reals.
inline PlmProjection LoadPlmProjection(std::istream& is) {
  PlmProjection proj;
  std::string line;
  if (!std::getline(is, line)) throw Error("projection file is empty");
  line = StripCr(std::move(line));
  auto header = SplitWhitespace(line);
  if (header.size() != 2) throw Error("projection header must be 'd V'");
  proj.dim = static_cast<int>(ParseInt(header[0], "projection dim"));
  proj.vocab_size =
      static_cast<int>(ParseInt(header[1], "projection vocab size"));
  if (proj.dim <= 0 || proj.vocab_size <= 0) {
    throw Error("projection dimensions must be positive");
  }
  const int want = 3 * proj.vocab_size;
  for (int r = 0; r < proj.dim; ++r) {
    if (!std::getline(is, line)) {
      throw Error("projection row " + std::to_string(r) + " missing");
    }
    line = StripCr(std::move(line));
    auto fields = SplitWhitespace(line);
    if (static_cast<int>(fields.size()) != want) {
      throw Error("projection row " + std::to_string(r) + " has " +
                  std::to_string(fields.size()) + " entries, want " +
                  std::to_string(want));
    }
    std::vector<double> row(want);
    for (int c = 0; c < want; ++c) {
      row[c] = ParseDouble(fields[c], "projection entry");
      if (!std::isfinite(row[c])) {
        throw Error("projection entries must be finite");
      }
    }
    proj.rows.push_back(std::move(row));
  }
  return proj;
}

// All-zero projection of the given shape.
inline PlmProjection ZeroProjection(int dim, int vocab_size) {
  PlmProjection proj;
  proj.dim = dim;
  proj.vocab_size = vocab_size;
  proj.rows.assign(dim, std::vector<double>(3 * vocab_size, 0.0));
  return proj;
}

// W [start; last; ge2], accumulating only the set bits of each block.
inline std::vector<double> PlmApply(const PlmProjection& proj,
                                    const BiasVector& start,
                                    const BiasVector& last,
                                    const BiasVector& ge2) {
  const int v = proj.vocab_size;
  if (static_cast<int>(start.size()) != v ||
      static_cast<int>(last.size()) != v ||
      static_cast<int>(ge2.size()) != v) {
    throw Error("bias vector length does not match projection vocabulary");
  }
  std::vector<double> out(proj.dim, 0.0);
  const BiasVector* blocks[3] = {&start, &last, &ge2};
  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < v; ++i) {
      if (!(*blocks[b])[i]) continue;
      const int col = b * v + i;
      for (int r = 0; r < proj.dim; ++r) out[r] += proj.rows[r][col];
    }
  }
  return out;
}

// Embedding for a full emitted history, recomputed from scratch.
inline std::vector<double> PlmEmbed(const ContactTrie& trie,
                                    const std::vector<int>& history,
                                    const PlmProjection& proj) {
  if (proj.vocab_size != trie.vocab_size()) {
    throw Error("projection vocabulary size " +
                std::to_string(proj.vocab_size) + " does not match trie " +
                std::to_string(trie.vocab_size()));
  }
  PlmCursor cursor;
  for (int piece : history) cursor.Advance(trie, piece);
  return PlmApply(proj, TrieQuery(trie, {}), cursor.QueryLast(trie),
                  cursor.QueryGe2(trie));
}

}  // namespace ctxbias

#endif  // CTXBIAS_PLM_HPP_

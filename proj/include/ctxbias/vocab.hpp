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

#ifndef CTXBIAS_VOCAB_HPP_
#define CTXBIAS_VOCAB_HPP_

#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxbias/common.hpp"

namespace ctxbias {

struct VocabPiece {
  std::string text;
  double logprob;  // <= 0
};

// Unigram piece inventory.  Piece ids are dense [0, size) in file order.
class Vocabulary {
 public:
  static Vocabulary Load(std::istream& is) {
    Vocabulary vocab;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      line = StripCr(std::move(line));
      if (line.empty()) continue;
      auto fields = SplitChar(line, '\t');
      if (fields.size() != 2) {
        throw Error("vocab line " + std::to_string(line_no) +
                    ": expected 'piece<TAB>logprob'");
      }
      double logprob = ParseDouble(fields[1], "piece logprob");
      vocab.Add(std::string(fields[0]), logprob, line_no);
    }
    return vocab;
  }

  static Vocabulary FromPairs(
      const std::vector<std::pair<std::string, double>>& pieces) {
    Vocabulary vocab;
    int row = 0;
    for (const auto& [text, logprob] : pieces) vocab.Add(text, logprob, ++row);
    return vocab;
  }

  int size() const { return static_cast<int>(pieces_.size()); }

  const VocabPiece& Piece(int id) const {
    if (id < 0 || id >= size()) {
      throw Error("piece id out of range: " + std::to_string(id));
    }
    return pieces_[id];
  }

  // -1 when absent.
  int Find(std::string_view text) const {
    auto it = index_.find(std::string(text));
    return it == index_.end() ? -1 : it->second;
  }

  size_t max_piece_length() const { return max_length_; }

  std::string PieceString(std::span<const int> ids,
                          std::string_view sep = " ") const {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out.append(sep);
      out.append(Piece(ids[i]).text);
    }
    return out;
  }

 private:
  void Add(std::string text, double logprob, int line_no) {
    if (text.empty()) {
      throw Error("vocab line " + std::to_string(line_no) + ": empty piece");
    }
    if (logprob > 0.0) {
      throw Error("vocab line " + std::to_string(line_no) + ": piece '" +
                  text + "' has positive logprob");
    }
    if (index_.count(text) != 0) {
      throw Error("vocab line " + std::to_string(line_no) +
                  ": duplicate piece '" + text + "'");
    }
    int id = static_cast<int>(pieces_.size());
    max_length_ = std::max(max_length_, text.size());
    index_.emplace(text, id);
    pieces_.push_back(VocabPiece{std::move(text), logprob});
  }

  std::vector<VocabPiece> pieces_;
  std::unordered_map<std::string, int> index_;
  size_t max_length_ = 0;
};

}  // namespace ctxbias

#endif  // CTXBIAS_VOCAB_HPP_

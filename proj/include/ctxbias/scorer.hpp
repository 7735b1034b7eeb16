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
// Pluggable acoustic scorers.  A scorer maps (frame index, emitted piece
// history) to a normalized log-probability vector over the V vocabulary
// pieces followed by BLANK at index V.  Two implementations: TableScorer
// reads explicit per-(frame, history-suffix) rows; ToyJoinerScorer combines
// encoder, predictor, and optional contextual embeddings through a small
// joiner matrix.

#ifndef CTXBIAS_SCORER_HPP_
#define CTXBIAS_SCORER_HPP_

#include <cmath>
#include <istream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/vocab.hpp"

namespace ctxbias {

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual int num_frames() const = 0;
  virtual int vocab_size() const = 0;

  // Whether LogProbs can consume a contextual embedding.
  virtual bool supports_embedding() const { return false; }
  virtual int embedding_dim() const { return 0; }

  // Normalized log-probabilities over vocab_size() pieces plus BLANK at
  // index vocab_size().  h_ctx is null when contextual input is disabled.
  virtual std::vector<double> LogProbs(
      int t, const std::vector<int>& history,
      const std::vector<double>* h_ctx) const = 0;
};

namespace internal {

// Longest suffix of `history` present in `table`, which must hold the empty
// key as a catch-all if total coverage is wanted.  Returns nullptr when no
// suffix matches.
template <typename V>
const V* LongestSuffixMatch(const std::map<std::vector<int>, V>& table,
                            const std::vector<int>& history) {
  for (int len = static_cast<int>(history.size()); len >= 0; --len) {
    std::vector<int> suffix(history.end() - len, history.end());
    auto it = table.find(suffix);
    if (it != table.end()) return &it->second;
  }
  return nullptr;
}

}  // namespace internal

// Explicit log-probability rows keyed by (frame, history suffix); lookups
// take the longest matching suffix.
class TableScorer : public Scorer {
 public:
  TableScorer(int num_frames, int vocab_size)
      : num_frames_(num_frames), vocab_size_(vocab_size) {
    if (num_frames < 1 || vocab_size < 1) {
      throw Error("table scorer needs at least one frame and one piece");
    }
    rows_.resize(num_frames);
  }

  int num_frames() const override { return num_frames_; }
  int vocab_size() const override { return vocab_size_; }

  // Row of vocab_size()+1 log-probabilities; must log-sum-exp to 0.
  void AddRow(int t, std::vector<int> suffix, std::vector<double> logprobs) {
    if (t < 0 || t >= num_frames_) {
      throw Error("scorer row frame " + std::to_string(t) + " out of range");
    }
    if (static_cast<int>(logprobs.size()) != vocab_size_ + 1) {
      throw Error("scorer row needs " + std::to_string(vocab_size_ + 1) +
                  " log-probabilities");
    }
    if (std::abs(LogSumExp(logprobs)) > 1e-6) {
      throw Error("scorer row does not sum to one");
    }
    auto [it, inserted] = rows_[t].emplace(std::move(suffix),
                                           std::move(logprobs));
    (void)it;
    if (!inserted) throw Error("duplicate scorer row");
  }

  std::vector<double> LogProbs(
      int t, const std::vector<int>& history,
      const std::vector<double>* h_ctx) const override {
    if (h_ctx != nullptr) {
      throw Error("table scorer cannot take a contextual embedding");
    }
    if (t < 0 || t >= num_frames_) {
      throw Error("scorer queried at frame " + std::to_string(t) +
                  ", have " + std::to_string(num_frames_));
    }
    const std::vector<double>* row =
        internal::LongestSuffixMatch(rows_[t], history);
    if (row == nullptr) {
      throw Error("scorer has no row for frame " + std::to_string(t) +
                  " and the queried history");
    }
    return *row;
  }

 private:
  int num_frames_;
  int vocab_size_;
  std::vector<std::map<std::vector<int>, std::vector<double>>> rows_;
};

// Per-frame encoder vectors and suffix-keyed predictor vectors combined as
// logits = W (h_enc + h_pred + h_ctx) + b, then normalized.
class ToyJoinerScorer : public Scorer {
 public:
  ToyJoinerScorer(std::vector<std::vector<double>> enc,
                  std::map<std::vector<int>, std::vector<double>> pred,
                  std::vector<std::vector<double>> join,
                  std::vector<double> bias)
      : enc_(std::move(enc)),
        pred_(std::move(pred)),
        join_(std::move(join)),
        bias_(std::move(bias)) {
    if (enc_.empty() || join_.size() < 2 || join_[0].empty()) {
      throw Error("joiner scorer needs frames, pieces, and a dimension");
    }
    dim_ = static_cast<int>(join_[0].size());
    vocab_size_ = static_cast<int>(join_.size()) - 1;
    for (const auto& row : join_) {
      if (static_cast<int>(row.size()) != dim_) {
        throw Error("joiner rows disagree on dimension");
      }
    }
    if (static_cast<int>(bias_.size()) != vocab_size_ + 1) {
      throw Error("joiner bias length must be pieces plus blank");
    }
    for (const auto& h : enc_) {
      if (static_cast<int>(h.size()) != dim_) {
        throw Error("encoder vector dimension mismatch");
      }
    }
    if (pred_.find(std::vector<int>{}) == pred_.end()) {
      throw Error("predictor table needs an empty-suffix row");
    }
    for (const auto& [suffix, h] : pred_) {
      if (static_cast<int>(h.size()) != dim_) {
        throw Error("predictor vector dimension mismatch");
      }
    }
  }

  int num_frames() const override { return static_cast<int>(enc_.size()); }
  int vocab_size() const override { return vocab_size_; }
  bool supports_embedding() const override { return true; }
  int embedding_dim() const override { return dim_; }

  // Pre-normalization logits.
  std::vector<double> Logits(int t, const std::vector<int>& history,
                             const std::vector<double>* h_ctx) const {
    if (t < 0 || t >= num_frames()) {
      throw Error("scorer queried at frame " + std::to_string(t) +
                  ", have " + std::to_string(num_frames()));
    }
    if (h_ctx != nullptr && static_cast<int>(h_ctx->size()) != dim_) {
      throw Error("contextual embedding dimension mismatch");
    }
    const std::vector<double>* pred =
        internal::LongestSuffixMatch(pred_, history);
    std::vector<double> sum(dim_);
    for (int i = 0; i < dim_; ++i) {
      sum[i] = enc_[t][i] + (*pred)[i] + (h_ctx != nullptr ? (*h_ctx)[i] : 0.0);
    }
    std::vector<double> z(vocab_size_ + 1);
    for (int r = 0; r <= vocab_size_; ++r) {
      double dot = bias_[r];
      for (int i = 0; i < dim_; ++i) dot += join_[r][i] * sum[i];
      z[r] = dot;
    }
    return z;
  }

  std::vector<double> LogProbs(
      int t, const std::vector<int>& history,
      const std::vector<double>* h_ctx) const override {
    std::vector<double> z = Logits(t, history, h_ctx);
    double lse = LogSumExp(z);
    for (double& v : z) v -= lse;
    return z;
  }

 private:
  std::vector<std::vector<double>> enc_;
  std::map<std::vector<int>, std::vector<double>> pred_;
  std::vector<std::vector<double>> join_;
  std::vector<double> bias_;
  int dim_ = 0;
  int vocab_size_ = 0;
};

namespace internal {

inline std::vector<int> ParsePieceField(std::string_view field,
                                        const Vocabulary& vocab) {
  std::vector<int> pieces;
  for (std::string_view name : SplitWhitespace(field)) {
    int id = vocab.Find(name);
    if (id < 0) {
      throw Error("scorer references unknown piece '" + std::string(name) +
                  "'");
    }
    pieces.push_back(id);
  }
  return pieces;
}

inline std::vector<double> ParseRealField(std::string_view field,
                                          std::string_view what) {
  std::vector<double> values;
  for (std::string_view token : SplitWhitespace(field)) {
    values.push_back(ParseDouble(token, what));
  }
  return values;
}

}  // namespace internal

// Text format: header `T V`, then rows `t<TAB>history pieces<TAB>V+1
// log-probabilities`.  An empty history field is the per-frame catch-all.
inline TableScorer LoadTableScorer(std::istream& is, const Vocabulary& vocab) {
  std::string line;
  if (!std::getline(is, line)) throw Error("scorer file is empty");
  line = StripCr(std::move(line));
  auto header = SplitWhitespace(line);
  if (header.size() != 2) throw Error("table scorer header must be 'T V'");
  int frames = static_cast<int>(ParseInt(header[0], "scorer frame count"));
  int pieces = static_cast<int>(ParseInt(header[1], "scorer vocab size"));
  if (pieces != vocab.size()) {
    throw Error("scorer vocab size " + std::to_string(pieces) +
                " does not match vocabulary of " +
                std::to_string(vocab.size()));
  }
  TableScorer scorer(frames, pieces);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    if (fields.size() != 3) {
      throw Error("scorer line " + std::to_string(line_no) +
                  ": expected t<TAB>history<TAB>logprobs");
    }
    int t = static_cast<int>(ParseInt(fields[0], "scorer frame"));
    scorer.AddRow(t, internal::ParsePieceField(fields[1], vocab),
                  internal::ParseRealField(fields[2], "scorer log-prob"));
  }
  return scorer;
}

// Text format: header `joiner T V d`, then tab-separated sections
//   enc<TAB>t<TAB>d reals                (T rows)
//   pred<TAB>history pieces<TAB>d reals  (>= 1 rows; empty history required)
//   join<TAB>r<TAB>d reals               (V+1 rows; row V is BLANK)
//   bias<TAB>V+1 reals                   (1 row)
inline ToyJoinerScorer LoadJoinerScorer(std::istream& is,
                                        const Vocabulary& vocab) {
  std::string line;
  if (!std::getline(is, line)) throw Error("scorer file is empty");
  line = StripCr(std::move(line));
  auto header = SplitWhitespace(line);
  if (header.size() != 4 || header[0] != "joiner") {
    throw Error("joiner scorer header must be 'joiner T V d'");
  }
  int frames = static_cast<int>(ParseInt(header[1], "scorer frame count"));
  int pieces = static_cast<int>(ParseInt(header[2], "scorer vocab size"));
  int dim = static_cast<int>(ParseInt(header[3], "scorer dimension"));
  if (frames < 1 || pieces < 1 || dim < 1) {
    throw Error("joiner scorer dimensions must be positive");
  }
  if (pieces != vocab.size()) {
    throw Error("scorer vocab size " + std::to_string(pieces) +
                " does not match vocabulary of " +
                std::to_string(vocab.size()));
  }
  std::vector<std::vector<double>> enc(frames);
  std::map<std::vector<int>, std::vector<double>> pred;
  std::vector<std::vector<double>> join(pieces + 1);
  std::vector<double> bias;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    const std::string where = "scorer line " + std::to_string(line_no);
    if (fields[0] == "enc" && fields.size() == 3) {
      int t = static_cast<int>(ParseInt(fields[1], "encoder frame"));
      if (t < 0 || t >= frames) throw Error(where + ": frame out of range");
      enc[t] = internal::ParseRealField(fields[2], "encoder value");
    } else if (fields[0] == "pred" && fields.size() == 3) {
      pred[internal::ParsePieceField(fields[1], vocab)] =
          internal::ParseRealField(fields[2], "predictor value");
    } else if (fields[0] == "join" && fields.size() == 3) {
      int r = static_cast<int>(ParseInt(fields[1], "joiner row"));
      if (r < 0 || r > pieces) throw Error(where + ": row out of range");
      join[r] = internal::ParseRealField(fields[2], "joiner value");
    } else if (fields[0] == "bias" && fields.size() == 2) {
      bias = internal::ParseRealField(fields[1], "bias value");
    } else {
      throw Error(where + ": unknown section '" + std::string(fields[0]) + "'");
    }
  }
  for (int t = 0; t < frames; ++t) {
    if (enc[t].empty()) {
      throw Error("joiner scorer is missing encoder frame " +
                  std::to_string(t));
    }
  }
  for (int r = 0; r <= pieces; ++r) {
    if (join[r].empty()) {
      throw Error("joiner scorer is missing join row " + std::to_string(r));
    }
  }
  ToyJoinerScorer scorer(std::move(enc), std::move(pred), std::move(join),
                         std::move(bias));
  if (scorer.embedding_dim() != dim) {
    throw Error("joiner dimension disagrees with header");
  }
  return scorer;
}

// Dispatches on the header: `joiner ...` or a plain `T V` table.
inline std::unique_ptr<Scorer> LoadScorer(std::istream& is,
                                          const Vocabulary& vocab) {
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  std::istringstream buf(text);
  if (text.rfind("joiner", 0) == 0) {
    return std::make_unique<ToyJoinerScorer>(LoadJoinerScorer(buf, vocab));
  }
  return std::make_unique<TableScorer>(LoadTableScorer(buf, vocab));
}

}  // namespace ctxbias

#endif  // CTXBIAS_SCORER_HPP_

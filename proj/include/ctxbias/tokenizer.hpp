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

#ifndef CTXBIAS_TOKENIZER_HPP_
#define CTXBIAS_TOKENIZER_HPP_

#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/vocab.hpp"

namespace ctxbias {

inline constexpr std::string_view kDefaultMarker = "_";

struct Segmentation {
  std::vector<int> pieces;
  double logprob = 0.0;
};

// Total order used for every tie in this module: higher logprob, then fewer
// pieces, then lexicographically smaller id sequence.
inline bool SegmentationBetter(const Segmentation& a, const Segmentation& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  if (a.pieces.size() != b.pieces.size()) {
    return a.pieces.size() < b.pieces.size();
  }
  return a.pieces < b.pieces;
}

namespace internal {

// pieces_at[i] lists (piece id, piece length) for every vocabulary piece that
// matches word[i..].
inline std::vector<std::vector<std::pair<int, int>>> MatchTable(
    const Vocabulary& vocab, std::string_view word) {
  std::vector<std::vector<std::pair<int, int>>> at(word.size());
  size_t max_len = vocab.max_piece_length();
  for (size_t i = 0; i < word.size(); ++i) {
    for (size_t len = 1; len <= max_len && i + len <= word.size(); ++len) {
      int id = vocab.Find(word.substr(i, len));
      if (id >= 0) at[i].emplace_back(id, static_cast<int>(len));
    }
  }
  return at;
}

struct SuffixBound {
  double score = -kInfiniteWeight;          // best achievable score to go
  int min_pieces = std::numeric_limits<int>::max();  // over all completions
};

inline std::vector<SuffixBound> SuffixBounds(
    const std::vector<std::vector<std::pair<int, int>>>& at,
    const Vocabulary& vocab) {
  size_t n = at.size();
  std::vector<SuffixBound> togo(n + 1);
  togo[n].score = 0.0;
  togo[n].min_pieces = 0;
  for (size_t i = n; i-- > 0;) {
    for (auto [id, len] : at[i]) {
      const SuffixBound& rest = togo[i + len];
      if (rest.score != -kInfiniteWeight) {
        togo[i].score =
            std::max(togo[i].score, vocab.Piece(id).logprob + rest.score);
        togo[i].min_pieces = std::min(togo[i].min_pieces, rest.min_pieces + 1);
      }
    }
  }
  return togo;
}

}  // namespace internal

// Viterbi segmentation under the composite order above.  Throws when no
// piece sequence covers the word.
inline Segmentation BestParse(const Vocabulary& vocab, std::string_view word) {
  if (word.empty()) throw Error("cannot segment an empty word");
  auto at = internal::MatchTable(vocab, word);
  size_t n = word.size();
  std::vector<Segmentation> best(n + 1);
  std::vector<bool> reached(n + 1, false);
  reached[0] = true;
  for (size_t i = 0; i < n; ++i) {
    if (!reached[i]) continue;
    for (auto [id, len] : at[i]) {
      Segmentation cand = best[i];
      cand.pieces.push_back(id);
      cand.logprob += vocab.Piece(id).logprob;
      size_t j = i + len;
      if (!reached[j] || SegmentationBetter(cand, best[j])) {
        best[j] = std::move(cand);
        reached[j] = true;
      }
    }
  }
  if (!reached[n]) {
    throw Error("word '" + std::string(word) +
                "' cannot be segmented with the current vocabulary");
  }
  return best[n];
}

// Exact n-best segmentations in composite order: best-first search whose
// priority is an optimistic bound on any completion (suffix Viterbi score,
// minimum remaining piece count, and the partial sequence itself, which
// lower-bounds every extension lexicographically).
inline std::vector<Segmentation> NBestParses(const Vocabulary& vocab,
                                             std::string_view word, int l) {
  if (l < 1) throw Error("nbest size must be >= 1");
  if (word.empty()) throw Error("cannot segment an empty word");
  auto at = internal::MatchTable(vocab, word);
  auto togo = internal::SuffixBounds(at, vocab);
  size_t n = word.size();
  if (togo[0].score == -kInfiniteWeight) {
    throw Error("word '" + std::string(word) +
                "' cannot be segmented with the current vocabulary");
  }

  struct Item {
    double bound_score;
    int bound_count;
    std::vector<int> seq;
    size_t pos;
    double score;
  };
  struct Worse {
    bool operator()(const Item& a, const Item& b) const {
      if (a.bound_score != b.bound_score) return a.bound_score < b.bound_score;
      if (a.bound_count != b.bound_count) return a.bound_count > b.bound_count;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Item, std::vector<Item>, Worse> heap;
  heap.push(Item{togo[0].score, togo[0].min_pieces, {}, 0, 0.0});

  std::vector<Segmentation> results;
  while (!heap.empty() && static_cast<int>(results.size()) < l) {
    Item item = heap.top();
    heap.pop();
    if (item.pos == n) {
      results.push_back(Segmentation{std::move(item.seq), item.score});
      continue;
    }
    for (auto [id, len] : at[item.pos]) {
      size_t next = item.pos + len;
      if (togo[next].score == -kInfiniteWeight) continue;
      Item child;
      child.score = item.score + vocab.Piece(id).logprob;
      child.bound_score = child.score + togo[next].score;
      child.bound_count =
          static_cast<int>(item.seq.size()) + 1 + togo[next].min_pieces;
      child.seq = item.seq;
      child.seq.push_back(id);
      child.pos = next;
      heap.push(std::move(child));
    }
  }
  return results;
}

// Draws one of the l best parses with probability proportional to
// P(parse)^alpha.  alpha = 0 is uniform over the n-best list.
inline Segmentation SampleParse(const Vocabulary& vocab, std::string_view word,
                                int l, double alpha, std::mt19937_64& rng) {
  if (alpha < 0.0) throw Error("sampling alpha must be >= 0");
  std::vector<Segmentation> nbest = NBestParses(vocab, word, l);
  double max_lp = nbest.front().logprob;
  std::vector<double> weights(nbest.size());
  double total = 0.0;
  for (size_t i = 0; i < nbest.size(); ++i) {
    weights[i] = std::exp(alpha * (nbest[i].logprob - max_lp));
    total += weights[i];
  }
  double u = UniformReal(rng) * total;
  double cum = 0.0;
  for (size_t i = 0; i < nbest.size(); ++i) {
    cum += weights[i];
    if (u < cum) return nbest[i];
  }
  return nbest.back();
}

struct TokenizeOptions {
  bool sample = false;   // false: deterministic Viterbi parse per word
  int sample_size = 5;   // n-best list size when sampling
  double alpha = 0.25;   // sampling temperature
  std::string marker = std::string(kDefaultMarker);  // word-initial marker
};

// Marker-prefixed Viterbi decomposition of one word.
inline std::vector<int> DecomposeWord(const Vocabulary& vocab,
                                      std::string_view word,
                                      std::string_view marker) {
  return BestParse(vocab, std::string(marker) + std::string(word)).pieces;
}

// Concatenated decomposition of a multi-word spelling.
inline std::vector<int> DecomposeSpelling(const Vocabulary& vocab,
                                          std::span<const std::string> words,
                                          std::string_view marker) {
  std::vector<int> pieces;
  for (const std::string& word : words) {
    std::vector<int> part = DecomposeWord(vocab, word, marker);
    pieces.insert(pieces.end(), part.begin(), part.end());
  }
  return pieces;
}

// Whitespace-splits text and segments each word with the marker prepended.
// rng may be null when options.sample is false.
inline std::vector<int> TokenizeSentence(const Vocabulary& vocab,
                                         std::string_view text,
                                         const TokenizeOptions& options,
                                         std::mt19937_64* rng = nullptr) {
  if (options.sample && rng == nullptr) {
    throw Error("sampled tokenization requires an rng");
  }
  std::vector<int> out;
  auto words = SplitWhitespace(text);
  for (size_t i = 0; i < words.size(); ++i) {
    std::string marked = options.marker + std::string(words[i]);
    try {
      Segmentation seg =
          options.sample
              ? SampleParse(vocab, marked, options.sample_size, options.alpha,
                            *rng)
              : BestParse(vocab, marked);
      out.insert(out.end(), seg.pieces.begin(), seg.pieces.end());
    } catch (const Error& e) {
      throw Error("token " + std::to_string(i + 1) + " ('" +
                  std::string(words[i]) + "'): " + e.what());
    }
  }
  return out;
}

// Inverse of TokenizeSentence up to whitespace normalization: marker-initial
// pieces open a new word.  An empty marker concatenates everything.
inline std::string Detokenize(const Vocabulary& vocab,
                              std::span<const int> pieces,
                              std::string_view marker) {
  std::string out;
  bool any_word = false;
  for (int id : pieces) {
    const std::string& text = vocab.Piece(id).text;
    if (!marker.empty() && text.size() >= marker.size() &&
        std::string_view(text).substr(0, marker.size()) == marker) {
      if (any_word) out.push_back(' ');
      out.append(text.substr(marker.size()));
      any_word = true;
    } else {
      out.append(text);
      any_word = true;
    }
  }
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_TOKENIZER_HPP_

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
// Time-synchronous beam search over a pluggable scorer.  Per frame every
// hypothesis expands with BLANK (advancing time) and with up to a bounded
// number of piece emissions; graph costs are fused into the score before the
// per-frame beam selection, and the graph's final cost is added once the last
// frame is consumed.  BLANK advances neither the graph state nor the trie
// cursor.

#ifndef CTXBIAS_DECODER_HPP_
#define CTXBIAS_DECODER_HPP_

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctxbias/biasing.hpp"
#include "ctxbias/common.hpp"
#include "ctxbias/plm.hpp"
#include "ctxbias/scorer.hpp"
#include "ctxbias/trie.hpp"

namespace ctxbias {

struct DecodeConfig {
  int beam = 8;
  double lambda = 1.0;          // graph fusion weight, >= 0
  int max_symbols_per_frame = 4;
  int nbest = 1;
  bool use_plm = false;
};

struct DecodedHypothesis {
  std::vector<int> pieces;
  std::vector<std::string> words;  // graph output labels, empty without graph
  double score = 0.0;              // fused, includes the graph final cost
  double model_score = 0.0;        // sum of chosen scorer log-probs
  double lm_cost = 0.0;            // graph path cost incl final; inf if dead
};

// model_logprob + lambda * (-lm_weight): the graph weight is a tropical cost,
// negated into log-probability scale.  lambda == 0 bypasses the graph term
// entirely so unfused decoding is reproduced bit for bit; a dead graph state
// maps to -inf rather than removal.
inline double Fuse(double model_logprob, double lm_weight, double lambda) {
  if (lambda == 0.0) return model_logprob;
  if (lm_weight == kInfiniteWeight) return -kInfiniteWeight;
  return model_logprob - lambda * lm_weight;
}

namespace internal {

struct Hyp {
  std::vector<int> pieces;
  double model = 0.0;
  double fused = 0.0;
  LmState lm;
  PlmCursor cursor;
  std::vector<double> h_ctx;
};

// Ranking used both for pruning and for the final n-best: fused score
// descending, then fewer pieces, then lexicographically smaller sequence.
inline bool HypBetter(const Hyp& a, const Hyp& b) {
  if (a.fused != b.fused) return a.fused > b.fused;
  if (a.pieces.size() != b.pieces.size()) {
    return a.pieces.size() < b.pieces.size();
  }
  return a.pieces < b.pieces;
}

// Hypotheses with equal piece sequences have equal graph and trie state, so
// merging keeps whichever scores better.
inline void MergeHyp(std::map<std::vector<int>, Hyp>* pool, Hyp&& h) {
  auto it = pool->find(h.pieces);
  if (it == pool->end()) {
    pool->emplace(h.pieces, std::move(h));
  } else if (h.fused > it->second.fused ||
             (h.fused == it->second.fused && h.model > it->second.model)) {
    it->second = std::move(h);
  }
}

}  // namespace internal

inline std::vector<DecodedHypothesis> BeamDecode(const Scorer& scorer,
                                                 const BiasingGraph* graph,
                                                 const ContactTrie* trie,
                                                 const PlmProjection* proj,
                                                 const DecodeConfig& config) {
  if (config.beam < 1) throw Error("beam size must be at least 1");
  if (config.lambda < 0.0) throw Error("fusion weight must be non-negative");
  if (config.max_symbols_per_frame < 1) {
    throw Error("max symbols per frame must be at least 1");
  }
  if (config.nbest < 1) throw Error("nbest must be at least 1");
  const int v = scorer.vocab_size();
  if (config.use_plm) {
    if (trie == nullptr || proj == nullptr) {
      throw Error("contextual decoding needs a trie and a projection");
    }
    if (!scorer.supports_embedding()) {
      throw Error("this scorer cannot take a contextual embedding");
    }
    if (trie->vocab_size() != v || proj->vocab_size != v) {
      throw Error("trie and projection must match the scorer vocabulary");
    }
    if (proj->dim != scorer.embedding_dim()) {
      throw Error("projection dimension does not match the scorer");
    }
  }

  const BiasVector root_bits =
      config.use_plm ? TrieQuery(*trie, {}) : BiasVector{};
  auto embed = [&](const PlmCursor& cursor) {
    return PlmApply(*proj, root_bits, cursor.QueryLast(*trie),
                    cursor.QueryGe2(*trie));
  };

  internal::Hyp start;
  if (graph != nullptr) start.lm = LmStart(graph->fst);
  if (config.use_plm) start.h_ctx = embed(start.cursor);
  start.fused =
      Fuse(0.0, graph != nullptr ? start.lm.Cost() : 0.0, config.lambda);
  std::vector<internal::Hyp> beam_set;
  beam_set.push_back(std::move(start));

  for (int t = 0; t < scorer.num_frames(); ++t) {
    std::map<std::vector<int>, internal::Hyp> advanced;
    std::vector<internal::Hyp> frontier = beam_set;
    for (int round = 0; round <= config.max_symbols_per_frame; ++round) {
      std::map<std::vector<int>, internal::Hyp> emitted;
      for (const internal::Hyp& h : frontier) {
        std::vector<double> lp = scorer.LogProbs(
            t, h.pieces, config.use_plm ? &h.h_ctx : nullptr);
        if (static_cast<int>(lp.size()) != v + 1) {
          throw Error("scorer returned a vector of the wrong size");
        }
        internal::Hyp blank = h;
        blank.model += lp[v];
        blank.fused = Fuse(blank.model,
                           graph != nullptr ? blank.lm.Cost() : 0.0,
                           config.lambda);
        internal::MergeHyp(&advanced, std::move(blank));
        if (round == config.max_symbols_per_frame) continue;
        for (int piece = 0; piece < v; ++piece) {
          internal::Hyp next = h;
          next.pieces.push_back(piece);
          next.model += lp[piece];
          if (graph != nullptr) {
            next.lm = LmAdvance(graph->fst, h.lm, PieceSymbol(piece));
          }
          if (config.use_plm) {
            next.cursor.Advance(*trie, piece);
            next.h_ctx = embed(next.cursor);
          }
          next.fused = Fuse(next.model,
                            graph != nullptr ? next.lm.Cost() : 0.0,
                            config.lambda);
          internal::MergeHyp(&emitted, std::move(next));
        }
      }
      frontier.clear();
      for (auto& [pieces, h] : emitted) frontier.push_back(std::move(h));
      if (frontier.empty()) break;
      // In-frame expansions compete for the beam on fused scores as well;
      // a beam at least as large as the hypothesis space keeps everything.
      std::sort(frontier.begin(), frontier.end(), internal::HypBetter);
      if (static_cast<int>(frontier.size()) > config.beam) {
        frontier.resize(config.beam);
      }
    }
    beam_set.clear();
    for (auto& [pieces, h] : advanced) beam_set.push_back(std::move(h));
    std::sort(beam_set.begin(), beam_set.end(), internal::HypBetter);
    if (static_cast<int>(beam_set.size()) > config.beam) {
      beam_set.resize(config.beam);
    }
  }

  std::vector<DecodedHypothesis> results;
  for (internal::Hyp& h : beam_set) {
    DecodedHypothesis out;
    out.pieces = std::move(h.pieces);
    out.model_score = h.model;
    out.lm_cost = graph != nullptr ? LmFinalCost(graph->fst, h.lm) : 0.0;
    out.score = Fuse(out.model_score, out.lm_cost, config.lambda);
    if (graph != nullptr) {
      for (int olabel : LmFinalOlabels(graph->fst, h.lm)) {
        out.words.push_back(graph->word_syms.Name(olabel));
      }
    }
    results.push_back(std::move(out));
  }
  std::sort(results.begin(), results.end(),
            [](const DecodedHypothesis& a, const DecodedHypothesis& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.pieces.size() != b.pieces.size()) {
                return a.pieces.size() < b.pieces.size();
              }
              return a.pieces < b.pieces;
            });
  if (static_cast<int>(results.size()) > config.nbest) {
    results.resize(config.nbest);
  }
  return results;
}

}  // namespace ctxbias

#endif  // CTXBIAS_DECODER_HPP_

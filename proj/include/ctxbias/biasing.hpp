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

#ifndef CTXBIAS_BIASING_HPP_
#define CTXBIAS_BIASING_HPP_

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/contact_list.hpp"
#include "ctxbias/fst.hpp"
#include "ctxbias/fst_ops.hpp"
#include "ctxbias/ngram.hpp"
#include "ctxbias/symbol_table.hpp"
#include "ctxbias/tokenizer.hpp"
#include "ctxbias/vocab.hpp"

namespace ctxbias {

// Input-label spaces of the biasing graph: pieces sit above the reserved
// labels; the class tag takes the next value after the piece block.
inline int PieceSymbol(int piece_id) { return piece_id + kNumReservedLabels; }
inline int PieceIdFromSymbol(int symbol) {
  return symbol - kNumReservedLabels;
}
inline int NameTagSymbol(const Vocabulary& vocab) {
  return vocab.size() + kNumReservedLabels;
}

// ---------------------------------------------------------------------------
// expand_word_arcs: rewrite a word-level acceptor onto the piece alphabet.
// Every word arc becomes a chain of piece arcs, each carrying the same weight
// as the word-level arc; the word id rides the last chain arc as the output
// label.  Epsilon arcs copy through; the class tag becomes its own symbol.

inline Wfst ExpandWordArcs(const Wfst& word_fst, const SymbolTable& word_syms,
                           const Vocabulary& vocab, std::string_view marker) {
  word_fst.Validate();
  Wfst out;
  for (int s = 0; s < word_fst.NumStates(); ++s) out.AddState();
  out.SetStart(word_fst.Start());
  for (const auto& [s, w] : word_fst.Finals()) out.SetFinal(s, w);

  for (int s = 0; s < word_fst.NumStates(); ++s) {
    for (const Arc& arc : word_fst.Arcs(s)) {
      if (arc.ilabel == kEpsLabel) {
        out.AddArc(s, arc);
        continue;
      }
      const std::string& word = word_syms.Name(arc.ilabel);
      if (word == kClassTag) {
        out.AddArc(s, Arc{NameTagSymbol(vocab), arc.olabel, arc.weight,
                          arc.next});
        continue;
      }
      std::vector<int> pieces;
      try {
        pieces = DecomposeWord(vocab, word, marker);
      } catch (const Error& e) {
        throw Error("cannot expand word arc: " + std::string(e.what()));
      }
      int cur = s;
      for (size_t i = 0; i < pieces.size(); ++i) {
        bool last = i + 1 == pieces.size();
        int next = last ? arc.next : out.AddState();
        out.AddArc(cur, Arc{PieceSymbol(pieces[i]),
                            last ? arc.olabel : kEpsLabel, arc.weight, next});
        cur = next;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// build_name_fst: union of zero-weight piece chains, one per spelling, with
// the display form as the output label on each chain's last arc, plus a
// failure region: a PHI arc from the root and a PHI self-loop, both at
// oov_weight, accepting any non-empty piece string.  PHI matches every
// consumed symbol as a weighted alternative path.  The union is epsilon
// removed, determinized, and minimized.

inline Wfst BuildNameFst(const ContactList& contacts, const Vocabulary& vocab,
                         SymbolTable* word_syms, double oov_weight,
                         std::string_view marker) {
  if (contacts.empty()) throw Error("empty contact list");
  if (oov_weight < 0.0) throw Error("oov weight must be >= 0");
  Wfst fst;
  int start = fst.AddState();
  fst.SetStart(start);
  for (const Contact& contact : contacts.contacts) {
    int display = word_syms->AddSymbol(contact.display);
    for (const auto& spelling : contact.spellings) {
      std::vector<int> pieces;
      try {
        pieces = DecomposeSpelling(vocab, spelling, marker);
      } catch (const Error& e) {
        throw Error("contact '" + contact.display +
                    "': " + std::string(e.what()));
      }
      int cur = start;
      for (size_t i = 0; i < pieces.size(); ++i) {
        bool last = i + 1 == pieces.size();
        int next = fst.AddState();
        fst.AddArc(cur, Arc{PieceSymbol(pieces[i]),
                            last ? display : kEpsLabel, 0.0, next});
        cur = next;
      }
      fst.SetFinal(cur, 0.0);
    }
  }
  int oov = fst.AddState();
  fst.AddArc(start, Arc{kPhiLabel, kEpsLabel, oov_weight, oov});
  fst.AddArc(oov, Arc{kPhiLabel, kEpsLabel, oov_weight, oov});
  fst.SetFinal(oov, 0.0);
  return Minimize(Determinize(RmEpsilon(fst)));
}

// ---------------------------------------------------------------------------
// replace_class_tag: splice a fresh copy of the name machine over every class
// tag arc.  The tag arc's LM weight moves onto an epsilon entry arc; final
// weights of the name machine become epsilon exit arcs back to the tag arc's
// target.  A graph without tag arcs is returned unchanged with a warning.

inline Wfst ReplaceClassTag(const Wfst& lm, const Wfst& name_fst,
                            int name_tag_symbol) {
  lm.Validate();
  name_fst.Validate();
  bool any = false;
  for (int s = 0; s < lm.NumStates() && !any; ++s) {
    for (const Arc& arc : lm.Arcs(s)) any = any || arc.ilabel == name_tag_symbol;
  }
  if (!any) {
    std::cerr << "warning: no class tag arcs to replace\n";
    return lm;
  }

  Wfst out;
  for (int s = 0; s < lm.NumStates(); ++s) out.AddState();
  out.SetStart(lm.Start());
  for (const auto& [s, w] : lm.Finals()) out.SetFinal(s, w);

  for (int s = 0; s < lm.NumStates(); ++s) {
    for (const Arc& arc : lm.Arcs(s)) {
      if (arc.ilabel != name_tag_symbol) {
        out.AddArc(s, arc);
        continue;
      }
      std::vector<int> remap(name_fst.NumStates());
      for (int q = 0; q < name_fst.NumStates(); ++q) remap[q] = out.AddState();
      out.AddArc(s, Arc{kEpsLabel, kEpsLabel, arc.weight,
                        remap[name_fst.Start()]});
      for (int q = 0; q < name_fst.NumStates(); ++q) {
        for (const Arc& narc : name_fst.Arcs(q)) {
          out.AddArc(remap[q], Arc{narc.ilabel, narc.olabel, narc.weight,
                                   remap[narc.next]});
        }
        double f = name_fst.FinalWeight(q);
        if (f != kInfiniteWeight) {
          out.AddArc(remap[q], Arc{kEpsLabel, kEpsLabel, f, arc.next});
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// On-the-fly scoring state over the biasing graph.  The graph mixes epsilon
// backoff arcs, explicit piece arcs, and PHI failure arcs, so a hypothesis
// tracks the full weighted set of alive graph states (exact subset
// simulation under (min, +)); PHI consumes the advanced symbol as an
// alternative to any explicit match.  Nodes are chained immutably so the
// best output-label sequence can be read back at the end.

class LmState {
 public:
  struct Element {
    int state;
    double cost;
    int parent;   // element index in the previous node, -1 at the root
    int olabel;   // output label of the consuming arc, kEpsLabel if none
  };

  struct Node {
    std::vector<Element> elems;  // unique states, ascending
    std::shared_ptr<const Node> prev;
  };

  LmState() = default;
  explicit LmState(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  bool Engaged() const { return node_ != nullptr; }

  bool DeadEnd() const { return node_ == nullptr || node_->elems.empty(); }

  // Min accumulated graph weight over alive states; +inf when dead.
  double Cost() const {
    double cost = kInfiniteWeight;
    if (node_ == nullptr) return cost;
    for (const Element& e : node_->elems) cost = std::min(cost, e.cost);
    return cost;
  }

  const std::shared_ptr<const Node>& node() const { return node_; }

 private:
  std::shared_ptr<const Node> node_;
};

namespace internal {

struct ClosureEntry {
  double cost;
  int parent;  // element index in the current node
};

// Weighted epsilon closure of a node's elements.  Epsilon arcs carry no
// output labels in graphs built by this module, so closure moves only
// accumulate weight.  Relaxation is pass-bounded; a pass count beyond the
// state count means a negative epsilon cycle.
inline std::map<int, ClosureEntry> EpsClosure(
    const Wfst& graph, const std::vector<LmState::Element>& elems) {
  std::map<int, ClosureEntry> closure;
  for (size_t i = 0; i < elems.size(); ++i) {
    auto it = closure.find(elems[i].state);
    if (it == closure.end() || elems[i].cost < it->second.cost) {
      closure[elems[i].state] =
          ClosureEntry{elems[i].cost, static_cast<int>(i)};
    }
  }
  for (int pass = 0; pass <= graph.NumStates(); ++pass) {
    bool changed = false;
    for (const auto& [state, entry] : std::map<int, ClosureEntry>(closure)) {
      for (const Arc& arc : graph.Arcs(state)) {
        if (arc.ilabel != kEpsLabel) continue;
        double cand = entry.cost + arc.weight;
        auto it = closure.find(arc.next);
        if (it == closure.end() || cand < it->second.cost) {
          closure[arc.next] = ClosureEntry{cand, entry.parent};
          changed = true;
        }
      }
    }
    if (!changed) return closure;
  }
  throw Error("negative-weight epsilon cycle in biasing graph");
}

}  // namespace internal

inline LmState LmStart(const Wfst& graph) {
  graph.Validate();
  auto node = std::make_shared<LmState::Node>();
  node->elems.push_back(
      LmState::Element{graph.Start(), 0.0, -1, kEpsLabel});
  return LmState(std::move(node));
}

inline LmState LmAdvance(const Wfst& graph, const LmState& state, int symbol) {
  if (symbol < kNumReservedLabels) {
    throw Error("cannot advance on reserved label " + std::to_string(symbol));
  }
  if (state.DeadEnd()) return LmState(std::make_shared<LmState::Node>());

  auto closure = internal::EpsClosure(graph, state.node()->elems);
  // state -> (cost, parent, olabel); ties keep the first candidate in
  // ascending source-state order.
  std::map<int, std::tuple<double, int, int>> next;
  for (const auto& [q, entry] : closure) {
    for (const Arc& arc : graph.Arcs(q)) {
      if (arc.ilabel != symbol && arc.ilabel != kPhiLabel) continue;
      double cand = entry.cost + arc.weight;
      auto it = next.find(arc.next);
      if (it == next.end() || cand < std::get<0>(it->second)) {
        next[arc.next] = {cand, entry.parent, arc.olabel};
      }
    }
  }
  auto node = std::make_shared<LmState::Node>();
  node->prev = state.node();
  node->elems.reserve(next.size());
  for (const auto& [q, tuple] : next) {
    node->elems.push_back(LmState::Element{q, std::get<0>(tuple),
                                           std::get<1>(tuple),
                                           std::get<2>(tuple)});
  }
  return LmState(std::move(node));
}

// Min over alive states of accumulated cost + epsilon closure + final weight;
// +inf when no final state is reachable.
inline double LmFinalCost(const Wfst& graph, const LmState& state) {
  if (state.DeadEnd()) return kInfiniteWeight;
  auto closure = internal::EpsClosure(graph, state.node()->elems);
  double best = kInfiniteWeight;
  for (const auto& [q, entry] : closure) {
    double f = graph.FinalWeight(q);
    if (f != kInfiniteWeight) best = std::min(best, entry.cost + f);
  }
  return best;
}

// Output labels along the best accepting path (ties: smallest final state).
// Empty when no final state is reachable.
inline std::vector<int> LmFinalOlabels(const Wfst& graph,
                                       const LmState& state) {
  std::vector<int> olabels;
  if (state.DeadEnd()) return olabels;
  auto closure = internal::EpsClosure(graph, state.node()->elems);
  double best = kInfiniteWeight;
  int parent = -1;
  for (const auto& [q, entry] : closure) {
    double f = graph.FinalWeight(q);
    if (f == kInfiniteWeight) continue;
    if (entry.cost + f < best) {
      best = entry.cost + f;
      parent = entry.parent;
    }
  }
  if (best == kInfiniteWeight) return olabels;
  const LmState::Node* node = state.node().get();
  int idx = parent;
  while (node != nullptr && idx >= 0) {
    const LmState::Element& e = node->elems[idx];
    if (e.olabel != kEpsLabel) olabels.push_back(e.olabel);
    idx = e.parent;
    node = node->prev.get();
  }
  std::reverse(olabels.begin(), olabels.end());
  return olabels;
}

// ---------------------------------------------------------------------------
// End-to-end construction of the biasing graph.

struct BiasingGraphOptions {
  int order = 4;
  double oov_weight = 6.0;
  std::string marker = std::string(kDefaultMarker);
};

struct BiasingGraph {
  Wfst fst;
  SymbolTable word_syms;
};

inline BiasingGraph BuildBiasingGraph(const PatternCorpus& corpus,
                                      const ContactList& contacts,
                                      const Vocabulary& vocab,
                                      const BiasingGraphOptions& options) {
  BiasingGraph graph;
  Wfst word_lm = BuildPatternLm(corpus, options.order, &graph.word_syms);
  Wfst piece_lm =
      ExpandWordArcs(word_lm, graph.word_syms, vocab, options.marker);
  Wfst name_fst = BuildNameFst(contacts, vocab, &graph.word_syms,
                               options.oov_weight, options.marker);
  graph.fst = ReplaceClassTag(piece_lm, name_fst, NameTagSymbol(vocab));
  return graph;
}

}  // namespace ctxbias

#endif  // CTXBIAS_BIASING_HPP_

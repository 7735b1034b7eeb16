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
// Prefix tree over contact spellings in piece-id space, with the binary
// next-symbol queries used by the contact-aware predictor: bit i of a query
// answer is set iff the queried prefix extended by piece i is still a prefix
// of some contact spelling.

#ifndef CTXBIAS_TRIE_HPP_
#define CTXBIAS_TRIE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/contact_list.hpp"
#include "ctxbias/tokenizer.hpp"
#include "ctxbias/vocab.hpp"

namespace ctxbias {

// Length-V indicator vector; entries are 0 or 1.
using BiasVector = std::vector<std::uint8_t>;

// Immutable prefix tree over piece id sequences.  Node 0 is the root (the
// empty prefix); every root-to-terminal path spells one contact spelling.
class ContactTrie {
 public:
  struct Node {
    std::map<int, int> children;  // piece id -> node index
    bool terminal = false;
    int depth = 0;  // distance from the root, equals the prefix length
  };

  explicit ContactTrie(int vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size <= 0) throw Error("trie needs a positive vocabulary size");
    nodes_.emplace_back();
  }

  int vocab_size() const { return vocab_size_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }

  void AddSequence(const std::vector<int>& pieces) {
    if (pieces.empty()) throw Error("trie sequence must be non-empty");
    int cur = 0;
    for (int piece : pieces) {
      if (piece < 0 || piece >= vocab_size_) {
        throw Error("trie piece id " + std::to_string(piece) +
                    " outside vocabulary of size " +
                    std::to_string(vocab_size_));
      }
      auto it = nodes_[cur].children.find(piece);
      if (it == nodes_[cur].children.end()) {
        int next = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_.back().depth = nodes_[cur].depth + 1;
        nodes_[cur].children.emplace(piece, next);
        cur = next;
      } else {
        cur = it->second;
      }
    }
    nodes_[cur].terminal = true;
  }

  // Node index reached by walking `pieces` from the root, or -1.
  int Walk(const std::vector<int>& pieces) const {
    int cur = 0;
    for (int piece : pieces) {
      auto it = nodes_[cur].children.find(piece);
      if (it == nodes_[cur].children.end()) return -1;
      cur = it->second;
    }
    return cur;
  }

 private:
  int vocab_size_;
  std::vector<Node> nodes_;
};

// Builds a trie directly from piece id sequences.
inline ContactTrie BuildTrieFromSequences(
    const std::vector<std::vector<int>>& sequences, int vocab_size) {
  if (sequences.empty()) throw Error("cannot build a trie from no sequences");
  ContactTrie trie(vocab_size);
  for (const std::vector<int>& seq : sequences) trie.AddSequence(seq);
  return trie;
}

// Builds the trie over every spelling of every contact, each decomposed with
// the deterministic per-word parse.
inline ContactTrie BuildTrie(const ContactList& contacts,
                             const Vocabulary& vocab,
                             std::string_view marker = kDefaultMarker) {
  if (contacts.empty()) {
    throw Error("cannot build a trie from an empty contact list");
  }
  std::vector<std::vector<int>> sequences;
  for (const Contact& contact : contacts.contacts) {
    for (const std::vector<std::string>& spelling : contact.spellings) {
      sequences.push_back(DecomposeSpelling(vocab, spelling, marker));
    }
  }
  return BuildTrieFromSequences(sequences, vocab.size());
}

// Indicator over the children of one node; -1 yields all zeros.
inline BiasVector ChildBits(const ContactTrie& trie, int node) {
  BiasVector bits(trie.vocab_size(), 0);
  if (node < 0) return bits;
  for (const auto& [piece, child] : trie.node(node).children) bits[piece] = 1;
  return bits;
}

// Valid next symbols after `prefix`: bit i is set iff prefix plus piece i is
// a prefix of some spelling.  Prefixes absent from the trie yield all zeros.
inline BiasVector TrieQuery(const ContactTrie& trie,
                            const std::vector<int>& prefix) {
  return ChildBits(trie, trie.Walk(prefix));
}

// Incremental per-hypothesis query state: the set of trie nodes reached by
// the suffixes of the emitted history.  Each live node sits at a distinct
// depth (depth d is reached only by the unique length-d suffix), so advancing
// costs O(live nodes) instead of re-walking every suffix.
class PlmCursor {
 public:
  PlmCursor() = default;

  void Advance(const ContactTrie& trie, int piece) {
    std::vector<int> next;
    next.reserve(live_.size() + 1);
    for (int node : live_) {
      auto it = trie.node(node).children.find(piece);
      if (it != trie.node(node).children.end()) next.push_back(it->second);
    }
    auto it = trie.node(0).children.find(piece);
    if (it != trie.node(0).children.end()) next.push_back(it->second);
    live_ = std::move(next);
  }

  // Valid continuations of the length-1 history suffix.
  BiasVector QueryLast(const ContactTrie& trie) const {
    for (int node : live_) {
      if (trie.node(node).depth == 1) return ChildBits(trie, node);
    }
    return BiasVector(trie.vocab_size(), 0);
  }

  // OR of valid continuations over every history suffix of length >= 2.
  BiasVector QueryGe2(const ContactTrie& trie) const {
    BiasVector bits(trie.vocab_size(), 0);
    for (int node : live_) {
      if (trie.node(node).depth < 2) continue;
      for (const auto& [piece, child] : trie.node(node).children) {
        bits[piece] = 1;
      }
    }
    return bits;
  }

 private:
  std::vector<int> live_;
};

// Condensed next-symbol vector over every history suffix of length >= 2;
// histories shorter than two pieces yield all zeros.
inline BiasVector TrieQueryGe2(const ContactTrie& trie,
                               const std::vector<int>& history) {
  PlmCursor cursor;
  for (int piece : history) cursor.Advance(trie, piece);
  return cursor.QueryGe2(trie);
}

}  // namespace ctxbias

#endif  // CTXBIAS_TRIE_HPP_

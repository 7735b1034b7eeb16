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

#ifndef CTXBIAS_NGRAM_HPP_
#define CTXBIAS_NGRAM_HPP_

#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/fst.hpp"
#include "ctxbias/symbol_table.hpp"

namespace ctxbias {

// Class tag standing in for any contact name inside a pattern.
inline constexpr std::string_view kClassTag = "@name";

struct Pattern {
  double weight = 1.0;  // fractional count, > 0
  std::vector<std::string> words;
};

using PatternCorpus = std::vector<Pattern>;

// Lines of `weight<TAB>word word ...`.
inline PatternCorpus LoadPatternCorpus(std::istream& is) {
  PatternCorpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    if (fields.size() != 2) {
      throw Error("pattern line " + std::to_string(line_no) +
                  ": expected 'weight<TAB>words'");
    }
    Pattern pattern;
    pattern.weight = ParseDouble(fields[0], "pattern weight");
    if (pattern.weight <= 0.0) {
      throw Error("pattern line " + std::to_string(line_no) +
                  ": weight must be > 0");
    }
    for (auto word : SplitWhitespace(fields[1])) {
      pattern.words.emplace_back(word);
    }
    if (pattern.words.empty()) {
      throw Error("pattern line " + std::to_string(line_no) + ": no words");
    }
    corpus.push_back(std::move(pattern));
  }
  return corpus;
}

// Interpolated Witten-Bell n-gram over word ids:
//   P(w|h) = (c(h,w) + T(h) P(w|h')) / (c(h) + T(h))
// with T(h) = number of distinct successors of h, h' = h minus its oldest
// token, and a uniform base over the observed predicted-token set.  Pattern
// weights act as fractional counts.
class WittenBellLm {
 public:
  static constexpr int kBosToken = -1;  // history padding only
  static constexpr int kEosToken = -2;  // predicted only

  WittenBellLm(const PatternCorpus& corpus, int order, SymbolTable* word_syms)
      : order_(order) {
    if (order < 1) throw Error("n-gram order must be >= 1");
    if (corpus.empty()) throw Error("empty pattern corpus");
    for (const Pattern& pattern : corpus) {
      std::vector<int> seq(order - 1, kBosToken);
      for (const std::string& word : pattern.words) {
        seq.push_back(word_syms->AddSymbol(word));
      }
      seq.push_back(kEosToken);
      for (size_t pos = order - 1; pos < seq.size(); ++pos) {
        int token = seq[pos];
        predicted_.insert(token);
        for (int hlen = 0; hlen < order; ++hlen) {
          std::vector<int> h(seq.begin() + (pos - hlen), seq.begin() + pos);
          succ_[h][token] += pattern.weight;
        }
      }
    }
  }

  int order() const { return order_; }

  const std::set<int>& predicted() const { return predicted_; }

  // Observed contexts; closed under suffix shortening by construction.
  const std::map<std::vector<int>, std::map<int, double>>& contexts() const {
    return succ_;
  }

  // Distinct-successor count of an observed context.
  double TypeCount(std::span<const int> h) const {
    return static_cast<double>(Successors(h).size());
  }

  double TokenCount(std::span<const int> h) const {
    double c = 0.0;
    for (const auto& [token, count] : Successors(h)) c += count;
    return c;
  }

  // P(token | history); history longer than order-1 uses its suffix.  token
  // may be kEosToken.
  double Prob(std::span<const int> history, int token) const {
    std::span<const int> h = history;
    if (static_cast<int>(h.size()) > order_ - 1) {
      h = h.subspan(h.size() - (order_ - 1));
    }
    return ProbRec(h, token);
  }

 private:
  const std::map<int, double>& Successors(std::span<const int> h) const {
    static const std::map<int, double> kEmpty;
    auto it = succ_.find(std::vector<int>(h.begin(), h.end()));
    return it == succ_.end() ? kEmpty : it->second;
  }

  double ProbRec(std::span<const int> h, int token) const {
    if (h.empty()) {
      const auto& succ = Successors(h);
      double base = 1.0 / static_cast<double>(predicted_.size());
      double c = 0.0, count = 0.0;
      for (const auto& [t, n] : succ) {
        c += n;
        if (t == token) count = n;
      }
      double types = static_cast<double>(succ.size());
      return (count + types * base) / (c + types);
    }
    const auto& succ = Successors(h);
    if (succ.empty()) return ProbRec(h.subspan(1), token);
    double c = 0.0, count = 0.0;
    for (const auto& [t, n] : succ) {
      c += n;
      if (t == token) count = n;
    }
    double types = static_cast<double>(succ.size());
    return (count + types * ProbRec(h.subspan(1), token)) / (c + types);
  }

  int order_;
  std::set<int> predicted_;
  std::map<std::vector<int>, std::map<int, double>> succ_;
};

// Word-level backoff acceptor for the pattern corpus.  One state per observed
// context; explicit arcs carry -log P(w|h); epsilon backoff arcs carry
// -log(T(h)/(c(h)+T(h))); every state is final with -log P(</s>|h).  The
// interpolated explicit arc never costs more than its backoff route, so
// tropical min-path scoring reproduces P exactly.
inline Wfst BuildPatternLm(const PatternCorpus& corpus, int order,
                           SymbolTable* word_syms) {
  WittenBellLm lm(corpus, order, word_syms);

  Wfst fst;
  std::map<std::vector<int>, int> states;
  for (const auto& [h, succ] : lm.contexts()) {
    states.emplace(h, fst.AddState());
  }

  // Longest observed suffix of h, trying the longest usable length first.
  auto suffix_state = [&](const std::vector<int>& h) {
    size_t max_len =
        std::min<size_t>(h.size(), static_cast<size_t>(order - 1));
    for (size_t len = max_len;; --len) {
      std::vector<int> suffix(h.end() - len, h.end());
      auto it = states.find(suffix);
      if (it != states.end()) return it->second;
      if (len == 0) throw Error("missing empty context state");
    }
  };

  for (const auto& [h, succ] : lm.contexts()) {
    int s = states.at(h);
    for (const auto& [token, count] : succ) {
      if (token == WittenBellLm::kEosToken) continue;
      std::vector<int> next = h;
      next.push_back(token);
      fst.AddArc(s, Arc{token, token, -std::log(lm.Prob(h, token)),
                        suffix_state(next)});
    }
    if (!h.empty()) {
      double gamma = lm.TypeCount(h) / (lm.TokenCount(h) + lm.TypeCount(h));
      fst.AddArc(s, Arc{kEpsLabel, kEpsLabel, -std::log(gamma),
                        suffix_state({h.begin() + 1, h.end()})});
    }
    fst.SetFinal(s, -std::log(lm.Prob(h, WittenBellLm::kEosToken)));
  }

  std::vector<int> start_context(order - 1, WittenBellLm::kBosToken);
  fst.SetStart(states.at(start_context));
  return fst;
}

}  // namespace ctxbias

#endif  // CTXBIAS_NGRAM_HPP_

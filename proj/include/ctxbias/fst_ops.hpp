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

#ifndef CTXBIAS_FST_OPS_HPP_
#define CTXBIAS_FST_OPS_HPP_

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/fst.hpp"

namespace ctxbias {

// ---------------------------------------------------------------------------
// Predicates.

inline bool IsEpsilonFree(const Wfst& fst) {
  for (int s = 0; s < fst.NumStates(); ++s) {
    for (const Arc& arc : fst.Arcs(s)) {
      if (arc.ilabel == kEpsLabel) return false;
    }
  }
  return true;
}

// No state has two arcs sharing an ilabel (PHI counts as a label, so at most
// one failure arc per state).
inline bool IsInputDeterministic(const Wfst& fst) {
  for (int s = 0; s < fst.NumStates(); ++s) {
    std::set<int> seen;
    for (const Arc& arc : fst.Arcs(s)) {
      if (!seen.insert(arc.ilabel).second) return false;
    }
  }
  return true;
}

// No state has two arcs sharing an (ilabel, olabel) pair.
inline bool IsJointDeterministic(const Wfst& fst) {
  for (int s = 0; s < fst.NumStates(); ++s) {
    std::set<std::pair<int, int>> seen;
    for (const Arc& arc : fst.Arcs(s)) {
      if (!seen.insert({arc.ilabel, arc.olabel}).second) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Trim: keep states both reachable from the start and able to reach a final
// state.  The start state survives even when the language is empty.

inline Wfst Trim(const Wfst& fst) {
  fst.Validate();
  int n = fst.NumStates();
  std::vector<bool> accessible(n, false);
  std::deque<int> queue = {fst.Start()};
  accessible[fst.Start()] = true;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (const Arc& arc : fst.Arcs(s)) {
      if (!accessible[arc.next]) {
        accessible[arc.next] = true;
        queue.push_back(arc.next);
      }
    }
  }

  std::vector<std::vector<int>> reverse(n);
  for (int s = 0; s < n; ++s) {
    for (const Arc& arc : fst.Arcs(s)) reverse[arc.next].push_back(s);
  }
  std::vector<bool> coaccessible(n, false);
  for (const auto& [s, w] : fst.Finals()) {
    if (!coaccessible[s]) {
      coaccessible[s] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int p : reverse[s]) {
      if (!coaccessible[p]) {
        coaccessible[p] = true;
        queue.push_back(p);
      }
    }
  }

  std::vector<int> remap(n, kNoStateId);
  Wfst out;
  for (int s = 0; s < n; ++s) {
    if ((accessible[s] && coaccessible[s]) || s == fst.Start()) {
      remap[s] = out.AddState();
    }
  }
  out.SetStart(remap[fst.Start()]);
  for (int s = 0; s < n; ++s) {
    if (remap[s] == kNoStateId) continue;
    for (const Arc& arc : fst.Arcs(s)) {
      if (remap[arc.next] == kNoStateId) continue;
      out.AddArc(remap[s], Arc{arc.ilabel, arc.olabel, arc.weight,
                               remap[arc.next]});
    }
    double f = fst.FinalWeight(s);
    if (f != kInfiniteWeight && coaccessible[s] && accessible[s]) {
      out.SetFinal(remap[s], f);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Epsilon removal.  Epsilon-input arcs must carry epsilon outputs.  Each
// state's epsilon closure is folded into its non-epsilon arcs and final
// weight; an epsilon-free machine comes back unchanged.

inline Wfst RmEpsilon(const Wfst& fst) {
  fst.Validate();
  int n = fst.NumStates();
  bool has_eps = false;
  for (int s = 0; s < n; ++s) {
    for (const Arc& arc : fst.Arcs(s)) {
      if (arc.ilabel == kEpsLabel && arc.olabel != kEpsLabel) {
        throw Error("epsilon input arc with non-epsilon output label");
      }
      has_eps = has_eps || arc.ilabel == kEpsLabel;
    }
  }
  if (!has_eps) return fst;

  // Bellman-Ford closure over the epsilon subgraph reachable from s.  A pass
  // that still relaxes after |nodes| rounds means a negative epsilon cycle.
  auto closure = [&](int s) {
    std::map<int, double> dist;
    dist[s] = 0.0;
    std::vector<int> nodes = {s};
    std::deque<int> queue = {s};
    std::set<int> seen = {s};
    while (!queue.empty()) {
      int q = queue.front();
      queue.pop_front();
      for (const Arc& arc : fst.Arcs(q)) {
        if (arc.ilabel != kEpsLabel) continue;
        if (seen.insert(arc.next).second) {
          nodes.push_back(arc.next);
          queue.push_back(arc.next);
        }
      }
    }
    for (size_t pass = 0; pass <= nodes.size(); ++pass) {
      bool changed = false;
      for (int q : nodes) {
        auto dq = dist.find(q);
        if (dq == dist.end()) continue;
        for (const Arc& arc : fst.Arcs(q)) {
          if (arc.ilabel != kEpsLabel) continue;
          double cand = dq->second + arc.weight;
          auto dn = dist.find(arc.next);
          if (dn == dist.end() || cand < dn->second) {
            dist[arc.next] = cand;
            changed = true;
          }
        }
      }
      if (!changed) return dist;
    }
    throw Error("negative-weight epsilon cycle");
  };

  Wfst out;
  for (int s = 0; s < n; ++s) out.AddState();
  out.SetStart(fst.Start());
  for (int s = 0; s < n; ++s) {
    std::map<int, double> reach = closure(s);
    // (ilabel, olabel, next) -> min weight
    std::map<std::tuple<int, int, int>, double> merged;
    double final_weight = kInfiniteWeight;
    for (const auto& [q, w] : reach) {
      for (const Arc& arc : fst.Arcs(q)) {
        if (arc.ilabel == kEpsLabel) continue;
        auto key = std::make_tuple(arc.ilabel, arc.olabel, arc.next);
        double cand = w + arc.weight;
        auto it = merged.find(key);
        if (it == merged.end() || cand < it->second) merged[key] = cand;
      }
      double f = fst.FinalWeight(q);
      if (f != kInfiniteWeight) {
        final_weight = std::min(final_weight, w + f);
      }
    }
    for (const auto& [key, w] : merged) {
      auto [ilabel, olabel, next] = key;
      out.AddArc(s, Arc{ilabel, olabel, w, next});
    }
    if (final_weight != kInfiniteWeight) out.SetFinal(s, final_weight);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Determinization: weighted subset construction over joint (ilabel, olabel)
// labels with residual-weight normalization.  Requires an epsilon-free
// machine; PHI is an ordinary label here.

inline Wfst Determinize(const Wfst& fst) {
  fst.Validate();
  if (!IsEpsilonFree(fst)) {
    throw Error("determinize requires an epsilon-free machine");
  }
  constexpr int kMaxSubsets = 1 << 20;

  using Subset = std::vector<std::pair<int, double>>;  // sorted by state
  std::map<Subset, int> ids;
  std::vector<Subset> subsets;
  Wfst out;
  std::deque<int> queue;

  // Interns the subset, enqueueing it for expansion when newly created.
  auto intern = [&](Subset subset) {
    auto it = ids.find(subset);
    if (it != ids.end()) return it->second;
    if (static_cast<int>(subsets.size()) >= kMaxSubsets) {
      throw Error("determinization did not converge within the subset budget");
    }
    int id = out.AddState();
    ids.emplace(subset, id);
    subsets.push_back(std::move(subset));
    queue.push_back(id);
    return id;
  };

  int start = intern(Subset{{fst.Start(), 0.0}});
  out.SetStart(start);
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    Subset subset = subsets[id];

    double final_weight = kInfiniteWeight;
    // joint label -> (target state -> min residual)
    std::map<std::pair<int, int>, std::map<int, double>> moves;
    for (const auto& [q, residual] : subset) {
      for (const Arc& arc : fst.Arcs(q)) {
        auto& targets = moves[{arc.ilabel, arc.olabel}];
        double cand = residual + arc.weight;
        auto it = targets.find(arc.next);
        if (it == targets.end() || cand < it->second) targets[arc.next] = cand;
      }
      double f = fst.FinalWeight(q);
      if (f != kInfiniteWeight) {
        final_weight = std::min(final_weight, residual + f);
      }
    }
    if (final_weight != kInfiniteWeight) out.SetFinal(id, final_weight);

    for (const auto& [label, targets] : moves) {
      double w = kInfiniteWeight;
      for (const auto& [q, r] : targets) w = std::min(w, r);
      Subset next;
      next.reserve(targets.size());
      for (const auto& [q, r] : targets) next.emplace_back(q, r - w);
      int next_id = intern(std::move(next));
      out.AddArc(id, Arc{label.first, label.second, w, next_id});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimization of a joint-deterministic machine: trim, push weights toward
// the start (canonical pushing: every state's residual best cost becomes
// constant), then Moore partition refinement over (ilabel, olabel, pushed
// weight, target class).

inline Wfst Minimize(const Wfst& fst) {
  fst.Validate();
  if (!IsJointDeterministic(fst)) {
    throw Error("minimize requires a joint-deterministic machine");
  }
  Wfst trimmed = Trim(fst);
  int n = trimmed.NumStates();
  if (trimmed.Finals().empty()) {
    // Empty language: the single-start machine is already minimal.
    return trimmed;
  }

  // d[s] = min over accepting paths from s of (path weight + final weight).
  // Bellman-Ford; all states are coaccessible after Trim.
  std::vector<double> d(n, kInfiniteWeight);
  for (const auto& [s, w] : trimmed.Finals()) d[s] = w;
  for (int pass = 0; pass <= n; ++pass) {
    bool changed = false;
    for (int s = 0; s < n; ++s) {
      for (const Arc& arc : trimmed.Arcs(s)) {
        if (d[arc.next] == kInfiniteWeight) continue;
        double cand = arc.weight + d[arc.next];
        if (cand < d[s]) {
          d[s] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
    if (pass == n) throw Error("negative-weight cycle in minimize");
  }

  double d_start = d[trimmed.Start()];
  auto pushed_weight = [&](int s, const Arc& arc) {
    return arc.weight + d[arc.next] - d[s];
  };
  auto pushed_final = [&](int s) {
    double f = trimmed.FinalWeight(s);
    return f == kInfiniteWeight ? kInfiniteWeight : f - d[s] + d_start;
  };

  // Moore refinement.  Initial classes key on pushed final weight.
  std::vector<int> cls(n, 0);
  {
    std::map<double, int> final_classes;
    for (int s = 0; s < n; ++s) {
      double f = pushed_final(s);
      auto it = final_classes.find(f);
      if (it == final_classes.end()) {
        it = final_classes.emplace(f, static_cast<int>(final_classes.size()))
                 .first;
      }
      cls[s] = it->second;
    }
  }
  while (true) {
    using Signature = std::pair<int, std::vector<std::tuple<int, int, double, int>>>;
    std::map<Signature, int> next_ids;
    std::vector<int> next_cls(n);
    for (int s = 0; s < n; ++s) {
      Signature sig;
      sig.first = cls[s];
      for (const Arc& arc : trimmed.Arcs(s)) {
        sig.second.emplace_back(arc.ilabel, arc.olabel, pushed_weight(s, arc),
                                cls[arc.next]);
      }
      std::sort(sig.second.begin(), sig.second.end());
      auto it = next_ids.find(sig);
      if (it == next_ids.end()) {
        it = next_ids.emplace(std::move(sig),
                              static_cast<int>(next_ids.size()))
                 .first;
      }
      next_cls[s] = it->second;
    }
    bool stable = next_cls == cls;
    cls = std::move(next_cls);
    if (stable) break;
  }

  // Rebuild the quotient machine; classes are numbered by first appearance
  // in a BFS from the start class for a stable result.
  int n_classes = 1 + *std::max_element(cls.begin(), cls.end());
  std::vector<int> representative(n_classes, kNoStateId);
  for (int s = n - 1; s >= 0; --s) representative[cls[s]] = s;

  std::vector<int> order(n_classes, kNoStateId);
  Wfst out;
  std::deque<int> queue = {cls[trimmed.Start()]};
  order[cls[trimmed.Start()]] = out.AddState();
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    int s = representative[c];
    std::vector<Arc> arcs = trimmed.Arcs(s);
    std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
      return std::tie(a.ilabel, a.olabel) < std::tie(b.ilabel, b.olabel);
    });
    for (const Arc& arc : arcs) {
      int tc = cls[arc.next];
      if (order[tc] == kNoStateId) {
        order[tc] = out.AddState();
        queue.push_back(tc);
      }
    }
  }
  for (int c = 0; c < n_classes; ++c) {
    if (order[c] == kNoStateId) continue;  // unreachable class
    int s = representative[c];
    for (const Arc& arc : trimmed.Arcs(s)) {
      out.AddArc(order[c], Arc{arc.ilabel, arc.olabel, pushed_weight(s, arc),
                               order[cls[arc.next]]});
    }
    double f = pushed_final(s);
    if (f != kInfiniteWeight) out.SetFinal(order[c], f);
  }
  out.SetStart(order[cls[trimmed.Start()]]);
  return out;
}

// ---------------------------------------------------------------------------
// Language enumeration: min accepting weight for every (input string, output
// string) pair with both strings no longer than max_len.  Label-correcting
// relaxation over (state, strings) nodes; a relaxation budget guards against
// negative cycles.

using LanguageMap =
    std::map<std::pair<std::vector<int>, std::vector<int>>, double>;

inline LanguageMap EnumerateLanguage(const Wfst& fst, int max_len,
                                     long budget = 2'000'000) {
  LanguageMap out;
  if (fst.Start() == kNoStateId) return out;

  using Node = std::tuple<int, std::vector<int>, std::vector<int>>;
  std::map<Node, double> best;
  std::deque<Node> queue;
  Node root{fst.Start(), {}, {}};
  best[root] = 0.0;
  queue.push_back(root);
  long pops = 0;
  while (!queue.empty()) {
    if (++pops > budget) {
      throw Error("language enumeration exceeded its relaxation budget");
    }
    Node node = queue.front();
    queue.pop_front();
    const auto& [state, istr, ostr] = node;
    double w = best.at(node);
    for (const Arc& arc : fst.Arcs(state)) {
      Node next{arc.next, istr, ostr};
      if (arc.ilabel != kEpsLabel) {
        auto& ni = std::get<1>(next);
        if (static_cast<int>(ni.size()) >= max_len) continue;
        ni.push_back(arc.ilabel);
      }
      if (arc.olabel != kEpsLabel) {
        auto& no = std::get<2>(next);
        if (static_cast<int>(no.size()) >= max_len) continue;
        no.push_back(arc.olabel);
      }
      double cand = w + arc.weight;
      auto it = best.find(next);
      if (it == best.end() || cand < it->second) {
        best[next] = cand;
        queue.push_back(std::move(next));
      }
    }
  }
  for (const auto& [node, w] : best) {
    const auto& [state, istr, ostr] = node;
    double f = fst.FinalWeight(state);
    if (f == kInfiniteWeight) continue;
    auto key = std::make_pair(istr, ostr);
    auto it = out.find(key);
    double total = w + f;
    if (it == out.end() || total < it->second) out[key] = total;
  }
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_FST_OPS_HPP_

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

#ifndef CTXBIAS_FST_HPP_
#define CTXBIAS_FST_HPP_

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/symbol_table.hpp"

namespace ctxbias {

inline constexpr int kNoStateId = -1;

struct Arc {
  int ilabel = kEpsLabel;
  int olabel = kEpsLabel;
  double weight = 0.0;
  int next = kNoStateId;

  friend bool operator==(const Arc& a, const Arc& b) {
    return a.ilabel == b.ilabel && a.olabel == b.olabel &&
           a.weight == b.weight && a.next == b.next;
  }
};

// Weighted transducer over the tropical semiring (min, +).  States are dense
// ints; label 0 is epsilon and label 1 is the failure label PHI.
class Wfst {
 public:
  int AddState() {
    arcs_.emplace_back();
    return static_cast<int>(arcs_.size()) - 1;
  }

  int NumStates() const { return static_cast<int>(arcs_.size()); }

  int NumArcs() const {
    int n = 0;
    for (const auto& a : arcs_) n += static_cast<int>(a.size());
    return n;
  }

  void SetStart(int state) {
    CheckState(state);
    start_ = state;
  }

  int Start() const { return start_; }

  void SetFinal(int state, double weight) {
    CheckState(state);
    if (!std::isfinite(weight)) throw Error("final weight must be finite");
    finals_[state] = weight;
  }

  bool IsFinal(int state) const { return finals_.count(state) != 0; }

  // kInfiniteWeight when the state is not final.
  double FinalWeight(int state) const {
    auto it = finals_.find(state);
    return it == finals_.end() ? kInfiniteWeight : it->second;
  }

  const std::map<int, double>& Finals() const { return finals_; }

  void AddArc(int state, const Arc& arc) {
    CheckState(state);
    CheckState(arc.next);
    if (arc.ilabel < 0 || arc.olabel < 0) throw Error("negative arc label");
    if (!std::isfinite(arc.weight)) throw Error("arc weight must be finite");
    arcs_[state].push_back(arc);
  }

  const std::vector<Arc>& Arcs(int state) const {
    CheckState(state);
    return arcs_[state];
  }

  // Structural sanity check used before the heavier operations.
  void Validate() const {
    if (start_ == kNoStateId) throw Error("FST has no start state");
    CheckState(start_);
  }

  friend bool operator==(const Wfst& a, const Wfst& b) {
    return a.start_ == b.start_ && a.arcs_ == b.arcs_ && a.finals_ == b.finals_;
  }

 private:
  void CheckState(int state) const {
    if (state < 0 || state >= NumStates()) {
      throw Error("state id out of range: " + std::to_string(state));
    }
  }

  int start_ = kNoStateId;
  std::vector<std::vector<Arc>> arcs_;
  std::map<int, double> finals_;
};

// ---------------------------------------------------------------------------
// Text serialization, one record per line:
//   arc:   src<TAB>dst<TAB>ilabel<TAB>olabel<TAB>weight
//   final: state<TAB>weight
// The start state is the src of the first line.  A start state with no arcs
// and no final weight is written as `state<TAB>inf`, which readers treat as
// a start marker only.

inline void WriteFstText(const Wfst& fst, std::ostream& os) {
  fst.Validate();
  auto write_state_arcs = [&](int s) {
    for (const Arc& arc : fst.Arcs(s)) {
      os << s << '\t' << arc.next << '\t' << arc.ilabel << '\t' << arc.olabel
         << '\t' << FormatDouble(arc.weight) << '\n';
    }
  };
  int start = fst.Start();
  if (fst.Arcs(start).empty() && !fst.IsFinal(start)) {
    os << start << '\t' << "inf" << '\n';
  } else if (fst.Arcs(start).empty()) {
    os << start << '\t' << FormatDouble(fst.FinalWeight(start)) << '\n';
  }
  write_state_arcs(start);
  for (int s = 0; s < fst.NumStates(); ++s) {
    if (s != start) write_state_arcs(s);
  }
  for (const auto& [s, w] : fst.Finals()) {
    if (s == start && fst.Arcs(start).empty()) continue;  // already written
    os << s << '\t' << FormatDouble(w) << '\n';
  }
}

inline Wfst ReadFstText(std::istream& is) {
  struct PendingArc {
    int src;
    Arc arc;
  };
  std::vector<PendingArc> arcs;
  std::vector<std::pair<int, double>> finals;
  int start = kNoStateId;
  int max_state = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    auto state_field = [&](std::string_view s) {
      int v = static_cast<int>(ParseInt(s, "state id"));
      if (v < 0) throw Error("FST line " + std::to_string(line_no) +
                             ": negative state id");
      max_state = std::max(max_state, v);
      return v;
    };
    if (fields.size() == 2) {
      int s = state_field(fields[0]);
      if (start == kNoStateId) start = s;
      double w = ParseDouble(fields[1], "final weight");
      if (w != kInfiniteWeight) finals.emplace_back(s, w);
    } else if (fields.size() == 5) {
      PendingArc p;
      p.src = state_field(fields[0]);
      p.arc.next = state_field(fields[1]);
      p.arc.ilabel = static_cast<int>(ParseInt(fields[2], "ilabel"));
      p.arc.olabel = static_cast<int>(ParseInt(fields[3], "olabel"));
      p.arc.weight = ParseDouble(fields[4], "arc weight");
      if (start == kNoStateId) start = p.src;
      arcs.push_back(p);
    } else {
      throw Error("FST line " + std::to_string(line_no) +
                  ": expected 2 or 5 tab-separated fields");
    }
  }
  if (start == kNoStateId) throw Error("empty FST file");
  Wfst fst;
  for (int s = 0; s <= max_state; ++s) fst.AddState();
  fst.SetStart(start);
  for (const auto& p : arcs) fst.AddArc(p.src, p.arc);
  for (const auto& [s, w] : finals) fst.SetFinal(s, w);
  return fst;
}

}  // namespace ctxbias

#endif  // CTXBIAS_FST_HPP_

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

#ifndef CTXBIAS_SYMBOL_TABLE_HPP_
#define CTXBIAS_SYMBOL_TABLE_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxbias/common.hpp"

namespace ctxbias {

// Label values 0 and 1 are reserved in every transducer in this library.
inline constexpr int kEpsLabel = 0;
inline constexpr int kPhiLabel = 1;
inline constexpr int kNumReservedLabels = 2;
inline constexpr std::string_view kEpsSymbol = "<eps>";
inline constexpr std::string_view kPhiSymbol = "<phi>";

// Bijective string<->id map.  Ids 0 and 1 are pre-bound to <eps> and <phi>;
// user symbols start at kNumReservedLabels.
class SymbolTable {
 public:
  SymbolTable() {
    AddSymbol(std::string(kEpsSymbol));
    AddSymbol(std::string(kPhiSymbol));
  }

  int AddSymbol(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    names_.push_back(name);
    ids_.emplace(name, id);
    return id;
  }

  // -1 when absent.
  int Find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    return it == ids_.end() ? -1 : it->second;
  }

  const std::string& Name(int id) const {
    if (id < 0 || id >= static_cast<int>(names_.size())) {
      throw Error("symbol id out of range: " + std::to_string(id));
    }
    return names_[id];
  }

  int size() const { return static_cast<int>(names_.size()); }

  void Write(std::ostream& os) const {
    for (int id = 0; id < size(); ++id) {
      os << names_[id] << '\t' << id << '\n';
    }
  }

  static SymbolTable Read(std::istream& is) {
    SymbolTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      line = StripCr(std::move(line));
      if (line.empty()) continue;
      auto fields = SplitChar(line, '\t');
      if (fields.size() != 2) {
        throw Error("symbol table line " + std::to_string(line_no) +
                    ": expected 'symbol<TAB>id'");
      }
      int id = static_cast<int>(ParseInt(fields[1], "symbol id"));
      if (id < static_cast<int>(table.names_.size())) {
        // Reserved rows may be listed; anything else must be new and dense.
        if (table.names_[id] != fields[0]) {
          throw Error("symbol table line " + std::to_string(line_no) +
                      ": id " + std::to_string(id) + " redefined");
        }
        continue;
      }
      if (id != static_cast<int>(table.names_.size())) {
        throw Error("symbol table line " + std::to_string(line_no) +
                    ": ids must be dense and ascending");
      }
      if (table.ids_.count(std::string(fields[0])) != 0) {
        throw Error("symbol table line " + std::to_string(line_no) +
                    ": duplicate symbol '" + std::string(fields[0]) + "'");
      }
      table.AddSymbol(std::string(fields[0]));
    }
    return table;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace ctxbias

#endif  // CTXBIAS_SYMBOL_TABLE_HPP_

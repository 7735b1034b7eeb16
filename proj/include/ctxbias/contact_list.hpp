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

#ifndef CTXBIAS_CONTACT_LIST_HPP_
#define CTXBIAS_CONTACT_LIST_HPP_

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/g2g.hpp"

namespace ctxbias {

// One entry of a user's contact list: the display form plus every spelling
// (word sequence) that should be recognized for it.
struct Contact {
  std::string display;
  std::vector<std::vector<std::string>> spellings;
};

struct ContactList {
  std::vector<Contact> contacts;
  bool empty() const { return contacts.empty(); }
};

// Lines of `display` or `display<TAB>spelling|spelling`; spellings are
// space-separated word sequences.  A bare display line spells itself.
inline ContactList LoadContactList(std::istream& is) {
  ContactList list;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    if (fields.size() > 2) {
      throw Error("contact line " + std::to_string(line_no) +
                  ": expected 'display' or 'display<TAB>spellings'");
    }
    Contact contact;
    contact.display = std::string(fields[0]);
    if (contact.display.empty()) {
      throw Error("contact line " + std::to_string(line_no) +
                  ": empty display form");
    }
    std::string_view spelling_field =
        fields.size() == 2 ? fields[1] : fields[0];
    for (auto spelling : SplitChar(spelling_field, '|')) {
      std::vector<std::string> words;
      for (auto word : SplitWhitespace(spelling)) words.emplace_back(word);
      if (words.empty()) {
        throw Error("contact line " + std::to_string(line_no) +
                    ": empty spelling for '" + contact.display + "'");
      }
      contact.spellings.push_back(std::move(words));
    }
    list.contacts.push_back(std::move(contact));
  }
  return list;
}

// Variant spelling #i of a multi-word spelling zips each word's i-th ranked
// variant (identity when a word runs out of variants).
inline std::vector<std::vector<std::string>> G2gVariantSpellings(
    const std::vector<std::string>& words, const G2gMap& map, int k) {
  std::vector<std::vector<std::string>> per_word;
  size_t longest = 1;
  for (const std::string& word : words) {
    per_word.push_back(DecodeVariants(word, map, k));
    longest = std::max(longest, per_word.back().size());
  }
  std::vector<std::vector<std::string>> out;
  for (size_t i = 0; i < longest; ++i) {
    std::vector<std::string> variant;
    for (const auto& choices : per_word) {
      variant.push_back(choices[std::min(i, choices.size() - 1)]);
    }
    bool seen = false;
    for (const auto& existing : out) seen = seen || existing == variant;
    if (!seen) out.push_back(std::move(variant));
  }
  return out;
}

// Decode-side list preparation: each contact keeps its original spellings
// and gains up to k variant spellings per original, deduplicated.
inline ContactList ExpandContactsWithG2g(const ContactList& list,
                                         const G2gMap& map, int k) {
  ContactList out;
  for (const Contact& contact : list.contacts) {
    Contact expanded;
    expanded.display = contact.display;
    for (const auto& spelling : contact.spellings) {
      for (auto& variant : G2gVariantSpellings(spelling, map, k)) {
        bool seen = false;
        for (const auto& existing : expanded.spellings) {
          seen = seen || existing == variant;
        }
        if (!seen) expanded.spellings.push_back(std::move(variant));
      }
    }
    out.contacts.push_back(std::move(expanded));
  }
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_CONTACT_LIST_HPP_

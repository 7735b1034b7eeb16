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
// Training-time contact-list simulation: for a tagged utterance, draw a list
// of names around its target entity.  Per draw, in this fixed order: (1) list
// size uniform in [min,max]; (2) remove-target flag; (3) distractors sampled
// without replacement from the pool minus the target; (4) swap flag; (5) on
// swap, a uniform choice among the listed distractors replaces the target in
// the reference text.  The final list always has exactly the drawn size, and
// every name gains G2G variant spellings.

#ifndef CTXBIAS_SIMULATE_HPP_
#define CTXBIAS_SIMULATE_HPP_

#include <istream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctxbias/common.hpp"
#include "ctxbias/contact_list.hpp"
#include "ctxbias/g2g.hpp"

namespace ctxbias {

struct TaggedUtterance {
  std::string text;
  std::string entity;
};

// Lines of `text<TAB>entity`.
inline std::vector<TaggedUtterance> LoadTaggedCorpus(std::istream& is) {
  std::vector<TaggedUtterance> corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    auto fields = SplitChar(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error("corpus line " + std::to_string(line_no) +
                  ": expected text<TAB>entity");
    }
    corpus.push_back(
        TaggedUtterance{std::string(fields[0]), std::string(fields[1])});
  }
  return corpus;
}

// Distinct tagged entities in first-appearance order.
inline std::vector<std::string> BuildEntityPool(
    const std::vector<TaggedUtterance>& corpus) {
  std::vector<std::string> pool;
  std::set<std::string> seen;
  for (const TaggedUtterance& utt : corpus) {
    if (seen.insert(utt.entity).second) pool.push_back(utt.entity);
  }
  return pool;
}

struct SimulationConfig {
  int min_size = 200;
  int max_size = 400;
  double remove_prob = 0.5;
  double swap_prob = 0.3;
  int g2g_variants = 2;
};

struct SimulatedUtterance {
  std::string reference;    // utterance text, target swapped out if flagged
  std::string target;       // the tagged entity
  std::string swapped_to;   // empty unless swapped
  bool removed = false;     // target left out of the list
  bool swapped = false;     // reference target replaced
  ContactList contacts;     // drawn names expanded with G2G variants
};

namespace internal {

// First occurrence of `from` in `text` replaced by `to`; `text` unchanged
// when absent.
inline std::string ReplaceFirst(const std::string& text,
                                const std::string& from,
                                const std::string& to) {
  auto pos = text.find(from);
  if (pos == std::string::npos) return text;
  return text.substr(0, pos) + to + text.substr(pos + from.size());
}

inline Contact MakeContact(const std::string& name) {
  Contact contact;
  contact.display = name;
  std::vector<std::string> words;
  for (std::string_view word : SplitWhitespace(name)) {
    words.emplace_back(word);
  }
  contact.spellings.push_back(std::move(words));
  return contact;
}

}  // namespace internal

inline SimulatedUtterance SimulateContactList(
    const TaggedUtterance& utt, const std::vector<std::string>& pool,
    const G2gMap& g2g, const SimulationConfig& config, std::mt19937_64& rng) {
  if (config.min_size < 1 || config.max_size < config.min_size) {
    throw Error("simulation size bounds are invalid");
  }
  std::vector<std::string> others;
  others.reserve(pool.size());
  for (const std::string& name : pool) {
    if (name != utt.entity) others.push_back(name);
  }
  if (static_cast<int>(others.size()) < config.max_size) {
    throw Error("entity pool of " + std::to_string(pool.size()) +
                " is too small for lists of up to " +
                std::to_string(config.max_size));
  }

  SimulatedUtterance out;
  out.target = utt.entity;
  int size = static_cast<int>(
      UniformInt(rng, config.min_size, config.max_size));
  out.removed = Flip(rng, config.remove_prob);
  int distractors = out.removed ? size : size - 1;
  // Partial Fisher-Yates: the first `distractors` slots become the sample.
  for (int i = 0; i < distractors; ++i) {
    int j = static_cast<int>(
        UniformInt(rng, i, static_cast<int>(others.size()) - 1));
    std::swap(others[i], others[j]);
  }
  ContactList list;
  if (!out.removed) list.contacts.push_back(internal::MakeContact(utt.entity));
  for (int i = 0; i < distractors; ++i) {
    list.contacts.push_back(internal::MakeContact(others[i]));
  }
  // The flip is drawn unconditionally to keep the stream position fixed;
  // with no distractors there is nothing to swap to.
  bool want_swap = Flip(rng, config.swap_prob);
  out.swapped = want_swap && distractors > 0;
  if (out.swapped) {
    out.swapped_to = others[UniformInt(rng, 0, distractors - 1)];
    out.reference = internal::ReplaceFirst(utt.text, utt.entity,
                                           out.swapped_to);
  } else {
    out.reference = utt.text;
  }
  out.contacts = ExpandContactsWithG2g(list, g2g, config.g2g_variants);
  return out;
}

}  // namespace ctxbias

#endif  // CTXBIAS_SIMULATE_HPP_

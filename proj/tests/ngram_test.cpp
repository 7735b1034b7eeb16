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

#include "ctxbias/ngram.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ctxbias/fst_ops.hpp"
#include "support/oracles.hpp"

namespace ctxbias {
namespace {

PatternCorpus MakeCorpus(
    std::vector<std::pair<double, std::vector<std::string>>> rows) {
  PatternCorpus corpus;
  for (auto& [weight, words] : rows) {
    corpus.push_back(Pattern{weight, std::move(words)});
  }
  return corpus;
}

// -log P of a word sequence plus the end-of-sentence transition.
double ChainCost(const WittenBellLm& lm, const std::vector<int>& ids) {
  double cost = 0.0;
  std::vector<int> history(lm.order() - 1, WittenBellLm::kBosToken);
  for (int id : ids) {
    cost += -std::log(lm.Prob(history, id));
    history.push_back(id);
  }
  return cost + -std::log(lm.Prob(history, WittenBellLm::kEosToken));
}

TEST(PatternCorpusTest, LoadValidatesRows) {
  std::istringstream good("1.5\tcall @name\n2\tplay music\n");
  PatternCorpus corpus = LoadPatternCorpus(good);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_DOUBLE_EQ(corpus[0].weight, 1.5);
  EXPECT_EQ(corpus[0].words, (std::vector<std::string>{"call", "@name"}));

  std::istringstream zero("0\tcall\n");
  EXPECT_THROW(LoadPatternCorpus(zero), Error);
  std::istringstream negative("-1\tcall\n");
  EXPECT_THROW(LoadPatternCorpus(negative), Error);
  std::istringstream no_words("1.0\t \n");
  EXPECT_THROW(LoadPatternCorpus(no_words), Error);
  std::istringstream one_field("call @name\n");
  EXPECT_THROW(LoadPatternCorpus(one_field), Error);
}

// Hand-worked order-2 model on the single pattern "call @name":
// P(call|<s>) = P(@name|call) = P(</s>|@name) = 2/3, the unigram mass of
// each predicted token is 1/3, and gamma(<s>) = 1/2.
TEST(WittenBellTest, HandWorkedTwoGramExample) {
  SymbolTable syms;
  WittenBellLm lm(MakeCorpus({{1.0, {"call", "@name"}}}), 2, &syms);
  int call = syms.Find("call");
  int name = syms.Find(std::string(kClassTag));
  ASSERT_GE(call, kNumReservedLabels);
  ASSERT_GE(name, kNumReservedLabels);

  std::vector<int> bos{WittenBellLm::kBosToken};
  EXPECT_NEAR(lm.Prob(bos, call), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lm.Prob({{call}}, name), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lm.Prob({{name}}, WittenBellLm::kEosToken), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(lm.Prob({}, call), 1.0 / 3.0, 1e-12);
  // Unseen after <s>: pure backoff, gamma * unigram = 1/2 * 1/3.
  EXPECT_NEAR(lm.Prob(bos, name), 1.0 / 6.0, 1e-12);
}

TEST(WittenBellTest, ProbSumsToOneOverPredictedSet) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> pool = {"call", "text", "play",
                                         "@name", "music", "please"};
  for (int trial = 0; trial < 60; ++trial) {
    PatternCorpus corpus;
    int n_patterns = static_cast<int>(UniformInt(rng, 1, 5));
    for (int i = 0; i < n_patterns; ++i) {
      Pattern pattern;
      pattern.weight = 0.5 * static_cast<double>(UniformInt(rng, 1, 6));
      int len = static_cast<int>(UniformInt(rng, 1, 4));
      for (int j = 0; j < len; ++j) {
        pattern.words.push_back(pool[UniformInt(rng, 0, pool.size() - 1)]);
      }
      corpus.push_back(std::move(pattern));
    }
    int order = static_cast<int>(UniformInt(rng, 1, 4));
    SymbolTable syms;
    WittenBellLm lm(corpus, order, &syms);

    // Histories: a few random in-vocab sequences, plus the BOS context.
    for (int h = 0; h < 5; ++h) {
      std::vector<int> history;
      if (h == 0) {
        history.assign(order - 1, WittenBellLm::kBosToken);
      } else {
        int len = static_cast<int>(UniformInt(rng, 0, 3));
        for (int j = 0; j < len; ++j) {
          history.push_back(static_cast<int>(
              UniformInt(rng, kNumReservedLabels, syms.size() - 1)));
        }
      }
      double sum = lm.Prob(history, WittenBellLm::kEosToken);
      for (int token : lm.predicted()) {
        if (token != WittenBellLm::kEosToken) sum += lm.Prob(history, token);
      }
      EXPECT_NEAR(sum, 1.0, 1e-9) << "trial " << trial;
    }
  }
}

TEST(PatternLmTest, TwoGramFixtureStructure) {
  SymbolTable syms;
  PatternCorpus corpus = MakeCorpus({{1.0, {"call", "@name"}}});
  Wfst fst = BuildPatternLm(corpus, 2, &syms);
  // Contexts: {}, {<s>}, {call}, {@name}.
  EXPECT_EQ(fst.NumStates(), 4);
  EXPECT_EQ(fst.Finals().size(), 4u);

  // The backoff arc out of the start state carries -log(1/2).
  double backoff = kInfiniteWeight;
  for (const Arc& arc : fst.Arcs(fst.Start())) {
    if (arc.ilabel == kEpsLabel) backoff = arc.weight;
  }
  EXPECT_NEAR(backoff, -std::log(0.5), 1e-12);

  // Full pattern cost = 3 * -log(2/3).
  WittenBellLm lm(corpus, 2, &syms);
  std::vector<int> ids = {syms.Find("call"), syms.Find(std::string(kClassTag))};
  LanguageMap language = EnumerateLanguage(fst, 2);
  auto it = language.find({ids, ids});
  ASSERT_NE(it, language.end());
  EXPECT_NEAR(it->second, 3.0 * -std::log(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(it->second, ChainCost(lm, ids), 1e-12);
}

TEST(PatternLmTest, MinPathCostEqualsChainProbability) {
  std::mt19937_64 rng(32);
  const std::vector<std::string> pool = {"call", "text", "@name", "now"};
  for (int trial = 0; trial < 40; ++trial) {
    PatternCorpus corpus;
    int n_patterns = static_cast<int>(UniformInt(rng, 1, 4));
    for (int i = 0; i < n_patterns; ++i) {
      Pattern pattern;
      pattern.weight = 0.25 * static_cast<double>(UniformInt(rng, 1, 8));
      int len = static_cast<int>(UniformInt(rng, 1, 3));
      for (int j = 0; j < len; ++j) {
        pattern.words.push_back(pool[UniformInt(rng, 0, pool.size() - 1)]);
      }
      corpus.push_back(std::move(pattern));
    }
    int order = static_cast<int>(UniformInt(rng, 1, 4));
    SymbolTable syms;
    Wfst fst = BuildPatternLm(corpus, order, &syms);
    WittenBellLm lm(corpus, order, &syms);

    LanguageMap language = EnumerateLanguage(fst, 3);
    // Every in-vocab sequence of length <= 3 is scorable, at the chain cost.
    std::vector<std::vector<int>> sequences;
    for (int len = 1; len <= 3; ++len) {
      for (int draw = 0; draw < 6; ++draw) {
        std::vector<int> seq;
        for (int j = 0; j < len; ++j) {
          seq.push_back(static_cast<int>(
              UniformInt(rng, kNumReservedLabels, syms.size() - 1)));
        }
        sequences.push_back(std::move(seq));
      }
    }
    for (const auto& seq : sequences) {
      auto it = language.find({seq, seq});
      ASSERT_NE(it, language.end()) << "trial " << trial;
      EXPECT_NEAR(it->second, ChainCost(lm, seq), 1e-9) << "trial " << trial;
    }
  }
}

TEST(PatternLmTest, OrderOneIsSingleStateAcceptor) {
  SymbolTable syms;
  PatternCorpus corpus =
      MakeCorpus({{1.0, {"call", "@name"}}, {1.0, {"play", "music"}}});
  Wfst fst = BuildPatternLm(corpus, 1, &syms);
  EXPECT_EQ(fst.NumStates(), 1);
  EXPECT_TRUE(fst.IsFinal(fst.Start()));
  for (const Arc& arc : fst.Arcs(fst.Start())) {
    EXPECT_EQ(arc.next, fst.Start());
    EXPECT_NE(arc.ilabel, kEpsLabel);
  }

  WittenBellLm lm(corpus, 1, &syms);
  std::vector<int> seq = {syms.Find("music"), syms.Find("call")};
  LanguageMap language = EnumerateLanguage(fst, 2);
  auto it = language.find({seq, seq});
  ASSERT_NE(it, language.end());
  EXPECT_NEAR(it->second, ChainCost(lm, seq), 1e-12);
}

TEST(PatternLmTest, HeavierPatternCostsLess) {
  SymbolTable syms_light, syms_heavy;
  Wfst light = BuildPatternLm(
      MakeCorpus({{1.0, {"call", "@name"}}, {1.0, {"play", "music"}}}), 2,
      &syms_light);
  Wfst heavy = BuildPatternLm(
      MakeCorpus({{4.0, {"call", "@name"}}, {1.0, {"play", "music"}}}), 2,
      &syms_heavy);
  std::vector<int> ids_light = {syms_light.Find("call"),
                                syms_light.Find(std::string(kClassTag))};
  std::vector<int> ids_heavy = {syms_heavy.Find("call"),
                                syms_heavy.Find(std::string(kClassTag))};
  double cost_light = EnumerateLanguage(light, 2).at({ids_light, ids_light});
  double cost_heavy = EnumerateLanguage(heavy, 2).at({ids_heavy, ids_heavy});
  EXPECT_LT(cost_heavy, cost_light);
}

TEST(PatternLmTest, RejectsBadArguments) {
  SymbolTable syms;
  EXPECT_THROW(BuildPatternLm(PatternCorpus{}, 2, &syms), Error);
  EXPECT_THROW(BuildPatternLm(MakeCorpus({{1.0, {"x"}}}), 0, &syms), Error);
}

}  // namespace
}  // namespace ctxbias

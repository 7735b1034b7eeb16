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
// Command-line front end.  Exit codes: 0 success, 1 usage error, 2 data
// error.  Every subcommand accepts --config pointing at a key=value file;
// explicit flags override file values.

#include <atomic>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ctxbias/biasing.hpp"
#include "ctxbias/config.hpp"
#include "ctxbias/contact_list.hpp"
#include "ctxbias/decoder.hpp"
#include "ctxbias/g2g.hpp"
#include "ctxbias/ngram.hpp"
#include "ctxbias/plm.hpp"
#include "ctxbias/scorer.hpp"
#include "ctxbias/simulate.hpp"
#include "ctxbias/tokenizer.hpp"
#include "ctxbias/trie.hpp"
#include "ctxbias/vocab.hpp"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;

// Missing parameters are usage problems (exit 1); unreadable or malformed
// files are data problems (exit 2, via ctxbias::Error).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream OpenFile(const std::string& path, const char* what) {
  std::ifstream is(path);
  if (!is) {
    throw ctxbias::Error(std::string(what) + " file cannot be opened: " +
                         path);
  }
  return is;
}

std::ofstream CreateFile(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ctxbias::Error("cannot write file: " + path);
  return os;
}

void Require(const std::string& value, const char* flag, const char* sub) {
  if (value.empty()) {
    throw UsageError(std::string(sub) + ": " + flag +
                     " is required (flag or config)");
  }
}

ctxbias::Vocabulary LoadVocabFile(const std::string& path) {
  auto is = OpenFile(path, "vocab");
  return ctxbias::Vocabulary::Load(is);
}

ctxbias::ContactList LoadContactsFile(const std::string& path) {
  auto is = OpenFile(path, "contacts");
  return ctxbias::LoadContactList(is);
}

ctxbias::G2gMap LoadG2gFile(const std::string& path) {
  auto is = OpenFile(path, "g2g map");
  return ctxbias::LoadG2g(is);
}

// Contact list as used by graph and trie construction: expanded with variant
// spellings whenever a map is configured.
ctxbias::ContactList LoadExpandedContacts(const ctxbias::Config& config) {
  ctxbias::ContactList contacts = LoadContactsFile(config.contacts);
  if (!config.g2g.empty()) {
    contacts = ctxbias::ExpandContactsWithG2g(contacts,
                                              LoadG2gFile(config.g2g),
                                              config.k_g2g);
  }
  return contacts;
}

// ---------------------------------------------------------------------------
// Subcommand bodies.  Each reads its inputs from the merged config.

int RunTokenize(const ctxbias::Config& config, const std::string& mode) {
  Require(config.vocab, "--vocab", "tokenize");
  ctxbias::Vocabulary vocab = LoadVocabFile(config.vocab);
  ctxbias::TokenizeOptions options;
  options.sample = mode == "sample";
  options.sample_size = config.l;
  options.alpha = config.alpha;
  std::mt19937_64 rng(config.seed);
  std::string line;
  while (std::getline(std::cin, line)) {
    line = ctxbias::StripCr(std::move(line));
    std::vector<int> pieces =
        ctxbias::TokenizeSentence(vocab, line, options, &rng);
    std::cout << vocab.PieceString(pieces) << "\n";
  }
  return 0;
}

int RunBuildGraph(const ctxbias::Config& config, const std::string& out) {
  Require(config.vocab, "--vocab", "build-graph");
  Require(config.patterns, "--patterns", "build-graph");
  Require(config.contacts, "--contacts", "build-graph");
  ctxbias::Vocabulary vocab = LoadVocabFile(config.vocab);
  auto pf = OpenFile(config.patterns, "patterns");
  ctxbias::PatternCorpus corpus = ctxbias::LoadPatternCorpus(pf);
  ctxbias::ContactList contacts = LoadExpandedContacts(config);
  ctxbias::BiasingGraphOptions options;
  options.order = config.order;
  options.oov_weight = config.oov_weight;
  ctxbias::BiasingGraph graph =
      ctxbias::BuildBiasingGraph(corpus, contacts, vocab, options);

  auto fst_os = CreateFile(out);
  ctxbias::WriteFstText(graph.fst, fst_os);
  auto osyms_os = CreateFile(out + ".osyms");
  graph.word_syms.Write(osyms_os);
  // Input labels are the fixed piece encoding; the sidecar makes them
  // readable without the vocab file.
  auto isyms_os = CreateFile(out + ".isyms");
  isyms_os << ctxbias::kEpsSymbol << '\t' << ctxbias::kEpsLabel << '\n'
           << ctxbias::kPhiSymbol << '\t' << ctxbias::kPhiLabel << '\n';
  for (int id = 0; id < vocab.size(); ++id) {
    isyms_os << vocab.Piece(id).text << '\t' << ctxbias::PieceSymbol(id)
             << '\n';
  }
  return 0;
}

int RunQueryTrie(const ctxbias::Config& config, const std::string& prefix) {
  Require(config.vocab, "--vocab", "query-trie");
  Require(config.contacts, "--contacts", "query-trie");
  ctxbias::Vocabulary vocab = LoadVocabFile(config.vocab);
  ctxbias::ContactList contacts = LoadExpandedContacts(config);
  ctxbias::ContactTrie trie = ctxbias::BuildTrie(contacts, vocab);
  std::vector<int> ids;
  for (std::string_view piece : ctxbias::SplitWhitespace(prefix)) {
    int id = vocab.Find(piece);
    if (id < 0) {
      throw ctxbias::Error("unknown piece: " + std::string(piece));
    }
    ids.push_back(id);
  }
  ctxbias::BiasVector bits = ctxbias::TrieQuery(trie, ids);
  std::string sep;
  for (int id = 0; id < vocab.size(); ++id) {
    if (bits[id]) {
      std::cout << sep << vocab.Piece(id).text;
      sep = " ";
    }
  }
  std::cout << "\n";
  return 0;
}

Json HypothesisJson(const ctxbias::DecodedHypothesis& hyp,
                    const ctxbias::Vocabulary& vocab) {
  Json j;
  Json pieces = Json::array();
  for (int id : hyp.pieces) pieces.push_back(vocab.Piece(id).text);
  j["pieces"] = std::move(pieces);
  j["words"] = hyp.words;
  j["score"] = hyp.score;  // non-finite scores serialize as null
  return j;
}

int RunDecode(const ctxbias::Config& config,
              const std::vector<std::string>& scorer_paths, bool plm) {
  Require(config.vocab, "--vocab", "decode");
  Require(config.graph, "--graph", "decode");
  if (scorer_paths.empty()) {
    throw UsageError("decode: --scorer is required (flag or config)");
  }
  // The contact list feeds the prediction-network trie; plain graph fusion
  // reads everything it needs from the compiled graph.
  if (plm) {
    Require(config.contacts, "--contacts", "decode");
    Require(config.projection, "--proj", "decode");
  }

  ctxbias::Vocabulary vocab = LoadVocabFile(config.vocab);
  ctxbias::BiasingGraph graph;
  {
    auto fst_is = OpenFile(config.graph, "graph");
    graph.fst = ctxbias::ReadFstText(fst_is);
    auto syms_is = OpenFile(config.graph + ".osyms", "graph word symbols");
    graph.word_syms = ctxbias::SymbolTable::Read(syms_is);
  }
  std::optional<ctxbias::ContactTrie> trie;
  ctxbias::PlmProjection proj;
  if (plm) {
    trie = ctxbias::BuildTrie(LoadExpandedContacts(config), vocab);
    auto proj_is = OpenFile(config.projection, "projection");
    proj = ctxbias::LoadPlmProjection(proj_is);
  }
  ctxbias::DecodeConfig decode_config;
  decode_config.beam = config.beam;
  decode_config.lambda = config.lambda;
  decode_config.max_symbols_per_frame = config.max_symbols;
  decode_config.nbest = config.nbest;
  decode_config.use_plm = plm;

  auto decode_one = [&](const std::string& path) {
    auto scorer_is = OpenFile(path, "scorer");
    std::unique_ptr<ctxbias::Scorer> scorer =
        ctxbias::LoadScorer(scorer_is, vocab);
    std::vector<ctxbias::DecodedHypothesis> hyps =
        ctxbias::BeamDecode(*scorer, &graph, plm ? &*trie : nullptr,
                            plm ? &proj : nullptr, decode_config);
    if (config.nbest == 1) return HypothesisJson(hyps[0], vocab).dump();
    Json list = Json::array();
    for (const auto& hyp : hyps) list.push_back(HypothesisJson(hyp, vocab));
    Json j;
    j["nbest"] = std::move(list);
    return j.dump();
  };

  size_t n = scorer_paths.size();
  std::vector<std::string> lines(n);
  int threads = std::min<int>(config.jobs, static_cast<int>(n));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) lines[i] = decode_one(scorer_paths[i]);
  } else {
    std::atomic<size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr error;
    auto worker = [&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          lines[i] = decode_one(scorer_paths[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  for (const std::string& line : lines) std::cout << line << "\n";
  return 0;
}

int RunG2gExpand(const ctxbias::Config& config) {
  Require(config.g2g, "--map", "g2g-expand");
  ctxbias::G2gMap map = LoadG2gFile(config.g2g);
  std::string line;
  while (std::getline(std::cin, line)) {
    line = ctxbias::StripCr(std::move(line));
    if (line.empty()) {
      std::cout << "\n";
      continue;
    }
    std::vector<std::string> variants =
        ctxbias::DecodeVariants(line, map, config.k_g2g);
    std::string sep;
    for (const std::string& v : variants) {
      std::cout << sep << v;
      sep = " ";
    }
    std::cout << "\n";
  }
  return 0;
}

int RunG2gReplace(const ctxbias::Config& config,
                  const std::string& entities_path) {
  Require(config.g2g, "--map", "g2g-replace");
  ctxbias::G2gMap map = LoadG2gFile(config.g2g);
  std::set<std::string> entities;
  bool filter = !entities_path.empty();
  if (filter) {
    auto is = OpenFile(entities_path, "entities");
    std::string word;
    while (std::getline(is, word)) {
      word = ctxbias::StripCr(std::move(word));
      if (!word.empty()) entities.insert(word);
    }
  }
  std::mt19937_64 rng(config.seed);
  std::string line;
  while (std::getline(std::cin, line)) {
    line = ctxbias::StripCr(std::move(line));
    std::vector<std::string> tokens;
    for (std::string_view token : ctxbias::SplitWhitespace(line)) {
      tokens.emplace_back(token);
    }
    std::vector<std::string> replaced = ctxbias::TrainReplace(
        tokens, map, config.p, rng, filter ? &entities : nullptr);
    std::string sep;
    for (const std::string& token : replaced) {
      std::cout << sep << token;
      sep = " ";
    }
    std::cout << "\n";
  }
  return 0;
}

int RunSimulate(const ctxbias::Config& config, const std::string& corpus_path) {
  if (corpus_path.empty()) {
    throw UsageError("simulate: --corpus is required");
  }
  auto corpus_is = OpenFile(corpus_path, "corpus");
  std::vector<ctxbias::TaggedUtterance> corpus =
      ctxbias::LoadTaggedCorpus(corpus_is);
  std::vector<std::string> pool = ctxbias::BuildEntityPool(corpus);
  ctxbias::G2gMap map;
  if (!config.g2g.empty()) map = LoadG2gFile(config.g2g);
  ctxbias::SimulationConfig sim;
  sim.min_size = config.min_size;
  sim.max_size = config.max_size;
  sim.remove_prob = config.remove_prob;
  sim.swap_prob = config.swap_prob;
  sim.g2g_variants = config.k_g2g;
  std::mt19937_64 rng(config.seed);
  for (const ctxbias::TaggedUtterance& utt : corpus) {
    ctxbias::SimulatedUtterance sample =
        ctxbias::SimulateContactList(utt, pool, map, sim, rng);
    std::cout << sample.reference << '\t' << sample.target << '\t'
              << (sample.removed ? 1 : 0) << '\t' << (sample.swapped ? 1 : 0)
              << '\t' << sample.swapped_to << '\t';
    std::string sep;
    for (const ctxbias::Contact& contact : sample.contacts.contacts) {
      std::cout << sep << contact.display;
      sep = "|";
    }
    std::cout << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Flag plumbing.

struct Flags {
  std::string config_path;
  std::string vocab;
  std::string patterns;
  std::string contacts;
  std::string g2g;
  std::string projection;
  std::string graph;
  std::string out;
  std::string mode = "best";
  std::string prefix;
  std::string corpus;
  std::string entities;
  std::vector<std::string> scorers;
  int beam = 8;
  int max_symbols = 4;
  int nbest = 1;
  int order = 4;
  int k = 2;
  int l = 5;
  int jobs = 1;
  int min_size = 200;
  int max_size = 400;
  double lambda = 1.0;
  double oov_weight = 6.0;
  double p = 0.2;
  double alpha = 0.25;
  double remove_prob = 0.5;
  double swap_prob = 0.3;
  std::uint64_t seed = 0;
  bool plm = false;
};

// Config-file values first, then any flag the user actually passed.
ctxbias::Config MergeConfig(const CLI::App* sub, const Flags& f) {
  ctxbias::Config config;
  auto given = [&](const char* flag) {
    return sub->get_option_no_throw(flag) != nullptr && sub->count(flag) > 0;
  };
  if (given("--config")) config = ctxbias::LoadConfigFile(f.config_path);
  if (given("--vocab")) config.vocab = f.vocab;
  if (given("--patterns")) config.patterns = f.patterns;
  if (given("--contacts")) config.contacts = f.contacts;
  if (given("--g2g")) config.g2g = f.g2g;
  if (given("--map")) config.g2g = f.g2g;
  if (given("--proj")) config.projection = f.projection;
  if (given("--graph")) config.graph = f.graph;
  if (given("--scorer") && !f.scorers.empty()) config.scorer = f.scorers[0];
  if (given("--beam")) config.beam = f.beam;
  if (given("--lambda")) config.lambda = f.lambda;
  if (given("--max-symbols")) config.max_symbols = f.max_symbols;
  if (given("--nbest")) config.nbest = f.nbest;
  if (given("--oov-weight")) config.oov_weight = f.oov_weight;
  if (given("--order")) config.order = f.order;
  if (given("--k")) config.k_g2g = f.k;
  if (given("--p")) config.p = f.p;
  if (given("--l")) config.l = f.l;
  if (given("--alpha")) config.alpha = f.alpha;
  if (given("--min-size")) config.min_size = f.min_size;
  if (given("--max-size")) config.max_size = f.max_size;
  if (given("--remove-prob")) config.remove_prob = f.remove_prob;
  if (given("--swap-prob")) config.swap_prob = f.swap_prob;
  if (given("--seed")) config.seed = f.seed;
  if (given("--jobs")) config.jobs = f.jobs;
  ctxbias::CheckConfigPaths(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "contextual biasing toolkit: word-piece tokenization, biasing graph "
      "construction, prefix-trie queries, variant spellings, contact-list "
      "simulation, and beam-search decoding"};
  app.require_subcommand(1);
  Flags f;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", f.config_path,
                    "key=value file; explicit flags override its values");
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", f.seed, "rng seed (default 0)");
  };

  CLI::App* tokenize = app.add_subcommand(
      "tokenize",
      "segment stdin lines into word pieces; vocab file has one "
      "piece<TAB>logprob per line");
  add_config(tokenize);
  add_seed(tokenize);
  tokenize->add_option("--vocab", f.vocab, "piece inventory file");
  tokenize->add_option("--mode", f.mode, "best or sample")
      ->check(CLI::IsMember({"best", "sample"}));
  tokenize->add_option("--l", f.l, "n-best list size when sampling")
      ->check(CLI::PositiveNumber);
  tokenize->add_option("--alpha", f.alpha, "sampling temperature")
      ->check(CLI::NonNegativeNumber);

  CLI::App* build = app.add_subcommand(
      "build-graph",
      "compile patterns (weight<TAB>words with @name slots) and contacts "
      "(display<TAB>spelling|spelling) into a biasing graph; writes OUT plus "
      "OUT.isyms and OUT.osyms");
  add_config(build);
  build->add_option("--vocab", f.vocab, "piece inventory file");
  build->add_option("--patterns", f.patterns, "weighted pattern file");
  build->add_option("--contacts", f.contacts, "contact list file");
  build->add_option("--g2g", f.g2g, "variant spelling map (optional)");
  build->add_option("--k", f.k, "variant spellings per name")
      ->check(CLI::NonNegativeNumber);
  build->add_option("--oov-weight", f.oov_weight, "failure arc cost")
      ->check(CLI::NonNegativeNumber);
  build->add_option("--order", f.order, "pattern n-gram order")
      ->check(CLI::PositiveNumber);
  build->add_option("--out", f.out, "output graph path")->required();

  CLI::App* query = app.add_subcommand(
      "query-trie",
      "print the pieces that can extend a prefix inside some contact "
      "spelling");
  add_config(query);
  query->add_option("--vocab", f.vocab, "piece inventory file");
  query->add_option("--contacts", f.contacts, "contact list file");
  query->add_option("--g2g", f.g2g, "variant spelling map (optional)");
  query->add_option("--k", f.k, "variant spellings per name")
      ->check(CLI::NonNegativeNumber);
  query->add_option("--prefix", f.prefix,
                    "space-separated pieces (empty for the word start)");

  CLI::App* decode = app.add_subcommand(
      "decode",
      "beam-search decode scorer files (one utterance each) against a built "
      "graph; emits one JSON object per utterance");
  add_config(decode);
  decode->add_option("--scorer", f.scorers,
                     "scorer file; repeat for several utterances");
  decode->add_option("--graph", f.graph, "graph from build-graph");
  decode->add_option("--contacts", f.contacts, "contact list file");
  decode->add_option("--vocab", f.vocab, "piece inventory file");
  decode->add_option("--g2g", f.g2g, "variant spelling map (optional)");
  decode->add_option("--k", f.k, "variant spellings per name")
      ->check(CLI::NonNegativeNumber);
  decode->add_flag("--plm", f.plm, "feed trie queries into the scorer");
  decode->add_option("--proj", f.projection, "projection file (d V header)");
  decode->add_option("--beam", f.beam, "beam width")
      ->check(CLI::PositiveNumber);
  decode->add_option("--lambda", f.lambda, "graph fusion weight")
      ->check(CLI::NonNegativeNumber);
  decode->add_option("--max-symbols", f.max_symbols,
                     "emission cap per frame")
      ->check(CLI::PositiveNumber);
  decode->add_option("--nbest", f.nbest, "hypotheses per utterance")
      ->check(CLI::PositiveNumber);
  decode->add_option("--jobs", f.jobs, "parallel utterances")
      ->check(CLI::PositiveNumber);

  CLI::App* expand = app.add_subcommand(
      "g2g-expand",
      "print variant spellings (identity first) for each stdin word; map "
      "file has word<TAB>variant|variant lines");
  add_config(expand);
  expand->add_option("--map", f.g2g, "variant spelling map");
  expand->add_option("--k", f.k, "variants per word")
      ->check(CLI::NonNegativeNumber);

  CLI::App* replace = app.add_subcommand(
      "g2g-replace",
      "stochastically replace eligible stdin words with variant spellings");
  add_config(replace);
  add_seed(replace);
  replace->add_option("--map", f.g2g, "variant spelling map");
  replace->add_option("--p", f.p, "replacement probability")
      ->check(CLI::Range(0.0, 1.0));
  replace->add_option("--entities", f.entities,
                      "restrict replacement to words listed in this file");

  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "draw a contact list around each tagged utterance (text<TAB>entity "
      "lines); prints reference, target, removal and swap flags, and the "
      "drawn names");
  add_config(simulate);
  add_seed(simulate);
  simulate->add_option("--corpus", f.corpus, "tagged utterance file");
  simulate->add_option("--g2g", f.g2g, "variant spelling map (optional)");
  simulate->add_option("--k", f.k, "variant spellings per name")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--min-size", f.min_size, "smallest list")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--max-size", f.max_size, "largest list")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--remove-prob", f.remove_prob,
                       "target removal probability")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--swap-prob", f.swap_prob,
                       "reference swap probability")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (tokenize->parsed()) {
      return RunTokenize(MergeConfig(tokenize, f), f.mode);
    }
    if (build->parsed()) {
      return RunBuildGraph(MergeConfig(build, f), f.out);
    }
    if (query->parsed()) {
      return RunQueryTrie(MergeConfig(query, f), f.prefix);
    }
    if (decode->parsed()) {
      ctxbias::Config config = MergeConfig(decode, f);
      std::vector<std::string> scorers = f.scorers;
      if (scorers.empty() && !config.scorer.empty()) {
        scorers.push_back(config.scorer);
      }
      return RunDecode(config, scorers, f.plm);
    }
    if (expand->parsed()) {
      return RunG2gExpand(MergeConfig(expand, f));
    }
    if (replace->parsed()) {
      return RunG2gReplace(MergeConfig(replace, f), f.entities);
    }
    if (simulate->parsed()) {
      return RunSimulate(MergeConfig(simulate, f), f.corpus);
    }
    std::cerr << "ctxbias: no subcommand\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "ctxbias: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ctxbias: " << e.what() << "\n";
    return 2;
  }
}

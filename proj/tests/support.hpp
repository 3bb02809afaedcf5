#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "preflect/corpus.hpp"
#include "preflect/io.hpp"

namespace preflect::testing {

inline std::string data_path(const std::string& rel) { return std::string(PREFLECT_DATA_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<nlohmann::json> read_json_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

inline AnnotatedSentence make_sentence(const std::string& id, const std::vector<std::array<std::string, 3>>& tokens,
                                       const std::string& parse,
                                       const std::vector<std::tuple<std::string, int, int>>& deps) {
  AnnotatedSentence s;
  s.id = id;
  for (const auto& [surface, lemma, pos] : tokens) s.tokens.push_back(Token{s.tokens.size(), surface, lemma, pos});
  s.tree = parse_ptb(parse);
  for (const auto& [rel, head, dep] : deps) {
    DependencyEdge e{rel, std::nullopt, static_cast<TokenIndex>(dep)};
    if (head >= 0) e.head = static_cast<TokenIndex>(head);
    s.deps.edges.push_back(e);
  }
  return s;
}

inline const char* kWorkedParse =
    "(S (NP (PRP I)) (VP (VBD bought) (NP (NNS vegetables)) (PP (TO to) (NP (PRP$ my) (NN home)))))";

// "I bought vegetables to my home" with basic dependencies.
inline AnnotatedSentence worked_example() {
  return make_sentence("worked-1",
                       {{{"I", "I", "PRP"}},
                        {{"bought", "buy", "VBD"}},
                        {{"vegetables", "vegetable", "NNS"}},
                        {{"to", "to", "TO"}},
                        {{"my", "my", "PRP$"}},
                        {{"home", "home", "NN"}}},
                       kWorkedParse,
                       {{"nsubj", 1, 0}, {"root", -1, 1}, {"dobj", 1, 2}, {"prep", 1, 3}, {"poss", 5, 4}, {"pobj", 3, 5}});
}

// ---------------------------------------------------------------------------
// Random generators for property tests

struct SentenceGenerator {
  std::mt19937 rng;
  std::vector<std::string> phrase_labels{"S", "NP", "VP", "PP", "SBAR"};
  std::vector<std::string> tags{"NN", "NNS", "NNP", "VB", "VBD", "VBZ", "VBN", "MD", "PRP", "PRP$",
                                "DT", "JJ", "RB", "IN", "TO", "CC", "CD"};
  std::vector<std::string> words{"the", "cat", "saw", "a", "dog", "to", "home", "will", "have", "she", "he", "I"};
  std::vector<std::string> relations{"nsubj", "nsubjpass", "aux", "auxpass", "prep", "pobj", "dobj",
                                     "det", "poss", "amod", "advmod", "cc", "conj"};

  explicit SentenceGenerator(unsigned seed) : rng(seed) {}

  std::size_t uniform(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }

  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[uniform(0, v.size() - 1)]; }

  ConstituencyTree build(std::size_t begin, std::size_t end, const std::vector<Token>& toks, std::size_t depth) {
    if (end - begin == 1 && (depth > 0 && uniform(0, 2) != 0)) {
      ConstituencyTree pre{toks[begin].pos, {ConstituencyTree::leaf(toks[begin].surface, begin)}, kNoToken};
      return pre;
    }
    ConstituencyTree node{pick(phrase_labels), {}, kNoToken};
    std::size_t n = end - begin;
    std::size_t parts = std::min<std::size_t>(n, uniform(1, 3));
    if (n > 1 && parts == 1 && depth > 3) parts = 2;
    // cut points
    std::vector<std::size_t> cuts{begin, end};
    while (cuts.size() < parts + 1) {
      std::size_t c = uniform(begin + 1, end - 1);
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1] - cuts[k] == 1 && uniform(0, 1) == 0) {
        std::size_t t = cuts[k];
        node.children.push_back(ConstituencyTree{toks[t].pos, {ConstituencyTree::leaf(toks[t].surface, t)}, kNoToken});
      } else {
        node.children.push_back(build(cuts[k], cuts[k + 1], toks, depth + 1));
      }
    }
    return node;
  }

  AnnotatedSentence sentence(std::size_t min_len = 1, std::size_t max_len = 8) {
    AnnotatedSentence s;
    s.id = "g" + std::to_string(uniform(0, 1'000'000));
    std::size_t n = uniform(min_len, max_len);
    for (std::size_t i = 0; i < n; ++i) {
      std::string w = pick(words);
      s.tokens.push_back(Token{i, w, w, pick(tags)});
    }
    s.tree = build(0, n, s.tokens, 0);
    // random dependency tree: visit in random order, attach to an earlier one
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < n; ++k) {
      DependencyEdge e;
      e.dependent = order[k];
      if (k == 0) {
        e.relation = "root";
      } else {
        e.head = order[uniform(0, k - 1)];
        e.relation = pick(relations);
      }
      s.deps.edges.push_back(e);
    }
    return s;
  }
};

}  // namespace preflect::testing

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "preflect/corpus.hpp"

namespace preflect {

// Penn tag -> word class (N, V, ADJ, ADV, PRP, PRE, CONJ, DET, NUM, PUNCT, X).
class PosSimplificationMap {
 public:
  PosSimplificationMap() : table_(penn_defaults()) {}
  explicit PosSimplificationMap(std::map<std::string, std::string, std::less<>> table) : table_(std::move(table)) {}

  // Unknown tags map to X; `on_unknown` is told about each one.
  std::string operator()(std::string_view pos) const {
    if (auto it = table_.find(pos); it != table_.end()) return it->second;
    if (on_unknown) on_unknown(pos);
    return "X";
  }

  bool knows(std::string_view pos) const { return table_.find(pos) != table_.end(); }
  const std::map<std::string, std::string, std::less<>>& table() const { return table_; }

  std::function<void(std::string_view)> on_unknown;

  static std::map<std::string, std::string, std::less<>> penn_defaults() {
    return {
        {"NN", "N"},      {"NNS", "N"},     {"NNP", "N"},    {"NNPS", "N"},
        {"VB", "V"},      {"VBD", "V"},     {"VBG", "V"},    {"VBN", "V"},   {"VBP", "V"},  {"VBZ", "V"},
        {"MD", "V"},
        {"JJ", "ADJ"},    {"JJR", "ADJ"},   {"JJS", "ADJ"},
        {"RB", "ADV"},    {"RBR", "ADV"},   {"RBS", "ADV"},  {"WRB", "ADV"},
        {"PRP", "PRP"},   {"PRP$", "PRP"},  {"WP", "PRP"},   {"WP$", "PRP"},
        {"IN", "PRE"},    {"TO", "PRE"},
        {"CC", "CONJ"},
        {"DT", "DET"},    {"PDT", "DET"},   {"WDT", "DET"},
        {"CD", "NUM"},
        {".", "PUNCT"},   {",", "PUNCT"},   {":", "PUNCT"},  {"``", "PUNCT"}, {"''", "PUNCT"},
        {"-LRB-", "PUNCT"}, {"-RRB-", "PUNCT"}, {"$", "PUNCT"}, {"#", "PUNCT"}, {"SYM", "PUNCT"},
        {"HYPH", "PUNCT"}, {"NFP", "PUNCT"},
        {"EX", "X"},      {"FW", "X"},      {"LS", "X"},     {"POS", "X"},   {"RP", "X"},   {"UH", "X"},
    };
  }

 private:
  std::map<std::string, std::string, std::less<>> table_;
};

inline std::string simplify_pos(std::string_view pos) {
  static const PosSimplificationMap map;
  return map(pos);
}

inline bool is_content_class(std::string_view word_class) {
  return word_class == "N" || word_class == "V" || word_class == "ADJ" || word_class == "ADV";
}

struct FactorizerOptions {
  // A one-token sentence has only a ROOT edge; when set, its morphology
  // gets a "root" atom instead of the POS tag alone.
  bool root_atom_for_singleton = false;
  bool lowercase = true;
};

// morphology = [POS] ++ [incoming relation], except the ROOT-attached token
// whose relation is left out.
inline std::vector<FactoredToken> factorize_sentence(const AnnotatedSentence& sentence,
                                                     const FactorizerOptions& options = {},
                                                     const PosSimplificationMap& pos_map = PosSimplificationMap()) {
  std::vector<FactoredToken> out;
  out.reserve(sentence.tokens.size());
  const bool singleton = sentence.tokens.size() == 1;
  for (const Token& tok : sentence.tokens) {
    FactoredToken f;
    f.surface = tok.surface;
    f.word = options.lowercase ? text::to_lower(tok.surface) : tok.surface;
    f.lemma = options.lowercase ? text::to_lower(tok.lemma) : tok.lemma;
    f.word_class = pos_map(tok.pos);
    f.morphology.push_back(tok.pos);
    if (const DependencyEdge* edge = sentence.deps.incoming(tok.index)) {
      if (!edge->is_root()) {
        f.morphology.push_back(text::to_lower(edge->relation));
      } else if (singleton && options.root_atom_for_singleton) {
        f.morphology.push_back("root");
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace preflect

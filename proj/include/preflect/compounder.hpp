#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "preflect/corpus.hpp"
#include "preflect/error.hpp"
#include "preflect/factorizer.hpp"
#include "preflect/text.hpp"

namespace preflect {

// ---------------------------------------------------------------------------
// Person-number-gender lexicon

inline bool is_png_atom(std::string_view atom) {
  static const std::set<std::string, std::less<>> atoms{"1s", "2s", "3s", "3sm", "3sf", "3sn", "1p", "2p", "3p"};
  return atoms.count(atom) != 0;
}

class PngLexicon {
 public:
  PngLexicon() : words_(default_pronouns()), tags_(default_tags()) {}

  // One `key atom` pair per line. Keys starting with `@` name a POS tag
  // (`@NN`, `@NNS`, ...) and `@default` sets the fallback. Entries override
  // the built-in ones; `//` starts a comment line.
  static PngLexicon parse(std::string_view content) {
    PngLexicon lex;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
      ++line_no;
      auto line = text::trim(raw);
      if (line.empty() || line.starts_with("//")) continue;
      auto fields = text::split_ws(line);
      if (fields.size() != 2) throw Error(ErrorKind::FormatError, "expected 'key atom'", line_no);
      if (!is_png_atom(fields[1])) throw Error(ErrorKind::FormatError, "unknown PNG atom '" + fields[1] + "'", line_no);
      if (fields[0] == "@default") {
        lex.fallback_ = fields[1];
      } else if (fields[0].front() == '@') {
        lex.tags_[fields[0].substr(1)] = fields[1];
      } else {
        lex.words_[text::to_lower(fields[0])] = fields[1];
      }
    }
    return lex;
  }

  std::string lookup(const Token& subject) const {
    if (auto it = words_.find(text::to_lower(subject.surface)); it != words_.end()) return it->second;
    if (auto it = words_.find(text::to_lower(subject.lemma)); it != words_.end()) return it->second;
    if (auto it = tags_.find(subject.pos); it != tags_.end()) return it->second;
    if (on_unknown) on_unknown(subject);
    return fallback_;
  }

  const std::map<std::string, std::string, std::less<>>& words() const { return words_; }

  std::function<void(const Token&)> on_unknown;

  static std::map<std::string, std::string, std::less<>> default_pronouns() {
    return {
        {"i", "1s"},        {"me", "1s"},         {"myself", "1s"},
        {"we", "1p"},       {"us", "1p"},         {"ourselves", "1p"},
        {"you", "2s"},      {"yourself", "2s"},   {"yourselves", "2p"},
        {"he", "3sm"},      {"him", "3sm"},       {"himself", "3sm"},
        {"she", "3sf"},     {"her", "3sf"},       {"herself", "3sf"},
        {"it", "3sn"},      {"itself", "3sn"},
        {"they", "3p"},     {"them", "3p"},       {"themselves", "3p"},
    };
  }

  static std::map<std::string, std::string, std::less<>> default_tags() {
    return {{"NN", "3s"}, {"NNP", "3s"}, {"NNS", "3p"}, {"NNPS", "3p"}};
  }

 private:
  std::map<std::string, std::string, std::less<>> words_;
  std::map<std::string, std::string, std::less<>> tags_;
  std::string fallback_ = "3s";
};

inline std::string extract_png(const Token& subject, const PngLexicon& lexicon = PngLexicon()) {
  return lexicon.lookup(subject);
}

// ---------------------------------------------------------------------------
// Rules

enum class FoldTarget { Head, HeadOfHead };
enum class FoldAction { Surface, Tag, Png };

inline std::string_view to_string(FoldTarget t) { return t == FoldTarget::Head ? "HEAD" : "HEAD_OF_HEAD"; }

inline std::string_view to_string(FoldAction a) {
  switch (a) {
    case FoldAction::Surface: return "FOLD_SURFACE";
    case FoldAction::Tag: return "FOLD_TAG";
    case FoldAction::Png: return "FOLD_PNG";
  }
  return "?";
}

using TagSet = std::optional<std::set<std::string, std::less<>>>;  // empty optional = ANY

struct CompoundRule {
  std::string id;
  std::string deprel;
  TagSet dependent_pos;
  TagSet head_pos;
  FoldTarget target = FoldTarget::Head;
  FoldAction action = FoldAction::Surface;
  bool delete_dependent = false;
  std::size_t line = 0;

  std::string to_string() const {
    auto tags = [](const char* key, const TagSet& set) {
      if (!set) return std::string();
      return std::string(" ") + key + "=" + text::join(std::vector<std::string>(set->begin(), set->end()), ",");
    };
    return id + ": " + deprel + tags("dep_pos", dependent_pos) + tags("head_pos", head_pos) + " -> " +
           std::string(preflect::to_string(target)) + " " + std::string(preflect::to_string(action)) +
           (delete_dependent ? " delete" : "");
  }
};

struct CompoundRuleSet {
  std::vector<CompoundRule> rules;
  // Relations whose edges are turned around before matching (`%invert rel`):
  // rel(P, N) becomes rel(N, P) and N takes over P's own attachment.
  std::vector<std::string> inverted_relations;
  std::string path;
};

namespace detail {

inline bool tag_matches(const TagSet& set, std::string_view tag) { return !set || set->count(tag) != 0; }

inline bool auxiliary_relation(std::string_view rel) { return rel == "aux" || rel == "auxpass"; }

inline TagSet parse_tag_set(std::string_view value, std::size_t line) {
  std::set<std::string, std::less<>> out;
  for (auto& tag : text::split(value, ',')) {
    if (tag.empty()) throw Error(ErrorKind::BadCompoundRule, "empty tag in tag set", line);
    out.insert(tag);
  }
  return out;
}

inline CompoundRule parse_compound_rule(std::string_view line_text, std::size_t line) {
  auto colon = line_text.find(':');
  auto arrow = line_text.find("->");
  if (colon == std::string_view::npos || arrow == std::string_view::npos || colon > arrow) {
    throw Error(ErrorKind::BadCompoundRule, "expected 'id: deprel [dep_pos=..] [head_pos=..] -> TARGET ACTION [delete]'", line);
  }
  CompoundRule rule;
  rule.line = line;
  rule.id = std::string(text::trim(line_text.substr(0, colon)));
  if (rule.id.empty() || text::has_space(rule.id)) throw Error(ErrorKind::BadCompoundRule, "bad rule id", line);

  auto trigger = text::split_ws(line_text.substr(colon + 1, arrow - colon - 1));
  if (trigger.empty()) throw Error(ErrorKind::BadCompoundRule, "missing dependency relation", line);
  rule.deprel = text::to_lower(trigger.front());
  for (std::size_t i = 1; i < trigger.size(); ++i) {
    const std::string& field = trigger[i];
    if (field.starts_with("dep_pos=") && !rule.dependent_pos) {
      rule.dependent_pos = parse_tag_set(std::string_view(field).substr(8), line);
    } else if (field.starts_with("head_pos=") && !rule.head_pos) {
      rule.head_pos = parse_tag_set(std::string_view(field).substr(9), line);
    } else {
      throw Error(ErrorKind::BadCompoundRule, "unexpected trigger field '" + field + "'", line);
    }
  }

  auto effect = text::split_ws(line_text.substr(arrow + 2));
  if (effect.size() < 2 || effect.size() > 3) throw Error(ErrorKind::BadCompoundRule, "expected 'TARGET ACTION [delete]'", line);
  std::string target = text::to_lower(effect[0]);
  std::string action = text::to_lower(effect[1]);
  if (target == "head") {
    rule.target = FoldTarget::Head;
  } else if (target == "head_of_head") {
    rule.target = FoldTarget::HeadOfHead;
  } else {
    throw Error(ErrorKind::BadCompoundRule, "unknown target '" + effect[0] + "'", line);
  }
  if (action == "fold_surface") {
    rule.action = FoldAction::Surface;
  } else if (action == "fold_tag") {
    rule.action = FoldAction::Tag;
  } else if (action == "fold_png") {
    rule.action = FoldAction::Png;
  } else {
    throw Error(ErrorKind::BadCompoundRule, "unknown action '" + effect[1] + "'", line);
  }
  if (effect.size() == 3) {
    if (text::to_lower(effect[2]) != "delete") throw Error(ErrorKind::BadCompoundRule, "unexpected '" + effect[2] + "'", line);
    rule.delete_dependent = true;
  }
  return rule;
}

}  // namespace detail

// Checks rule-level and set-level constraints:
//  - FOLD_PNG never deletes (subjects stay in the sentence);
//  - a deleting rule names its dependent tags, and may only delete
//    content-class tags through an auxiliary relation;
//  - no tag a rule deletes is a HEAD fold target of another rule.
inline void validate(const CompoundRuleSet& set) {
  std::set<std::string> ids;
  for (const auto& r : set.rules) {
    if (!ids.insert(r.id).second) throw Error(ErrorKind::BadCompoundRule, "duplicate rule id '" + r.id + "'", r.line);
    if (r.action == FoldAction::Png && r.delete_dependent) {
      throw Error(ErrorKind::BadCompoundRule, "rule " + r.id + ": FOLD_PNG rules cannot delete", r.line);
    }
    if (!r.delete_dependent) continue;
    if (!r.dependent_pos) {
      throw Error(ErrorKind::BadCompoundRule, "rule " + r.id + ": deleting rules must restrict dep_pos", r.line);
    }
    for (const auto& tag : *r.dependent_pos) {
      if (is_content_class(simplify_pos(tag)) && !detail::auxiliary_relation(r.deprel)) {
        throw Error(ErrorKind::BadCompoundRule,
                    "rule " + r.id + ": would delete content-word tag " + tag + " outside an auxiliary relation", r.line);
      }
    }
  }
  for (const auto& deleter : set.rules) {
    if (!deleter.delete_dependent) continue;
    for (const auto& r : set.rules) {
      if (r.target != FoldTarget::Head || !r.head_pos) continue;
      for (const auto& tag : *r.head_pos) {
        if (deleter.dependent_pos->count(tag)) {
          throw Error(ErrorKind::DanglingTarget,
                      "rule " + r.id + " folds onto " + tag + ", which rule " + deleter.id + " deletes", r.line);
        }
      }
    }
  }
}

inline CompoundRuleSet parse_compound_rules(std::string_view content, std::string path = {}) {
  CompoundRuleSet set;
  set.path = std::move(path);
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.starts_with("//")) continue;
    if (line.starts_with("%")) {
      auto fields = text::split_ws(line.substr(1));
      if (fields.size() != 2 || fields[0] != "invert") {
        throw Error(ErrorKind::BadCompoundRule, "unknown directive '" + std::string(line) + "'", line_no);
      }
      set.inverted_relations.push_back(text::to_lower(fields[1]));
      continue;
    }
    set.rules.push_back(detail::parse_compound_rule(line, line_no));
  }
  validate(set);
  return set;
}

// ---------------------------------------------------------------------------
// Application

struct Deletion {
  TokenIndex deleted = 0;  // original sentence index
  TokenIndex target = 0;   // original index of the token that received the atom
  std::string atom;
  std::string rule;

  bool operator==(const Deletion&) const = default;
};

// Working form of one sentence during compounding. `factored` and `origin`
// list the surviving tokens in original relative order; `edges` are the
// not-yet-consumed dependency edges over original indices.
struct CompoundState {
  std::vector<Token> annotations;  // indexed by original position
  std::vector<FactoredToken> factored;
  std::vector<TokenIndex> origin;
  std::vector<DependencyEdge> edges;
  bool rewritten = false;

  static CompoundState from(std::vector<FactoredToken> factored, const AnnotatedSentence& sentence) {
    if (factored.size() != sentence.tokens.size()) {
      throw Error(ErrorKind::LengthMismatch, "sentence " + sentence.id + ": factored tokens are not aligned with the sentence");
    }
    CompoundState st;
    st.annotations = sentence.tokens;
    st.factored = std::move(factored);
    for (std::size_t i = 0; i < st.factored.size(); ++i) st.origin.push_back(i);
    st.edges = sentence.deps.edges;
    return st;
  }
};

struct CompoundResult {
  CompoundState state;
  std::vector<Deletion> deletions;
  std::size_t folds = 0;  // atoms appended, including non-deleting folds

  const std::vector<FactoredToken>& tokens() const { return state.factored; }
};

namespace detail {

inline void invert_relations(std::vector<DependencyEdge>& edges, const std::vector<std::string>& relations) {
  for (const auto& rel : relations) {
    std::set<TokenIndex> inverted_heads;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      DependencyEdge& e = edges[k];
      if (e.relation != rel || e.is_root()) continue;
      TokenIndex head = *e.head;
      TokenIndex dep = e.dependent;
      if (!inverted_heads.insert(head).second) continue;
      for (auto& up : edges) {
        if (up.dependent == head) {
          up.dependent = dep;  // N takes over P's attachment
          break;
        }
      }
      edges[k].head = dep;
      edges[k].dependent = head;
    }
  }
}

inline std::optional<TokenIndex> head_of(const std::vector<DependencyEdge>& edges, TokenIndex token) {
  for (const auto& e : edges) {
    if (e.dependent == token) return e.head;
  }
  return std::nullopt;
}

}  // namespace detail

// One pass over the remaining edges. Each edge fires the first rule it
// matches; atoms land on their targets in sentence order of the folded
// dependents. Fired edges and edges touching deleted tokens are consumed.
inline CompoundResult compound(CompoundState state, const CompoundRuleSet& rules,
                               const PngLexicon& lexicon = PngLexicon()) {
  if (!state.rewritten) {
    detail::invert_relations(state.edges, rules.inverted_relations);
    state.rewritten = true;
  }
  std::vector<bool> alive(state.annotations.size(), false);
  for (TokenIndex i : state.origin) alive[i] = true;

  struct Action {
    std::size_t edge;
    TokenIndex dependent;
    TokenIndex target;
    std::string atom;
    const CompoundRule* rule;
  };
  std::vector<Action> actions;

  std::vector<std::size_t> order(state.edges.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return state.edges[a].dependent < state.edges[b].dependent; });

  for (std::size_t k : order) {
    const DependencyEdge& e = state.edges[k];
    if (e.is_root() || !alive[e.dependent] || !alive[*e.head]) continue;
    const Token& dep = state.annotations[e.dependent];
    const Token& head = state.annotations[*e.head];
    const std::string rel = text::to_lower(e.relation);
    for (const auto& rule : rules.rules) {
      if (rule.deprel != rel || !detail::tag_matches(rule.dependent_pos, dep.pos) ||
          !detail::tag_matches(rule.head_pos, head.pos)) {
        continue;
      }
      TokenIndex target = *e.head;
      if (rule.target == FoldTarget::HeadOfHead) {
        auto up = detail::head_of(state.edges, target);
        if (!up || !alive[*up]) continue;
        target = *up;
      }
      std::string atom;
      switch (rule.action) {
        case FoldAction::Surface: atom = text::to_lower(dep.surface); break;
        case FoldAction::Tag: atom = dep.pos; break;
        case FoldAction::Png: atom = lexicon.lookup(dep); break;
      }
      actions.push_back({k, e.dependent, target, std::move(atom), &rule});
      break;
    }
  }

  std::vector<bool> deleted(state.annotations.size(), false);
  for (const auto& a : actions) {
    if (a.rule->delete_dependent) deleted[a.dependent] = true;
  }
  for (const auto& a : actions) {
    if (deleted[a.target]) {
      throw Error(ErrorKind::DanglingTarget, "rule " + a.rule->id + " folds onto token " + std::to_string(a.target) +
                                                 ", which another rule deletes");
    }
  }

  std::vector<std::size_t> position(state.annotations.size(), 0);
  for (std::size_t p = 0; p < state.origin.size(); ++p) position[state.origin[p]] = p;

  CompoundResult result;
  std::vector<bool> consumed(state.edges.size(), false);
  for (const auto& a : actions) {  // already in dependent order
    state.factored[position[a.target]].morphology.push_back(a.atom);
    consumed[a.edge] = true;
    if (a.rule->delete_dependent) result.deletions.push_back({a.dependent, a.target, a.atom, a.rule->id});
  }
  result.folds = actions.size();

  CompoundState next;
  next.annotations = std::move(state.annotations);
  next.rewritten = true;
  for (std::size_t p = 0; p < state.origin.size(); ++p) {
    if (deleted[state.origin[p]]) continue;
    next.factored.push_back(std::move(state.factored[p]));
    next.origin.push_back(state.origin[p]);
  }
  for (std::size_t k = 0; k < state.edges.size(); ++k) {
    const DependencyEdge& e = state.edges[k];
    if (consumed[k] || deleted[e.dependent] || (e.head && deleted[*e.head])) continue;
    next.edges.push_back(e);
  }
  result.state = std::move(next);
  return result;
}

inline CompoundResult compound_sentence(std::vector<FactoredToken> factored, const AnnotatedSentence& sentence,
                                        const CompoundRuleSet& rules, const PngLexicon& lexicon = PngLexicon()) {
  return compound(CompoundState::from(std::move(factored), sentence), rules, lexicon);
}

// Emits the surviving tokens in reordered sentence order. `compounded` holds
// the survivors in original relative order.
inline std::vector<FactoredToken> integrate(const std::vector<FactoredToken>& compounded,
                                            const std::vector<TokenIndex>& permutation,
                                            const std::vector<Deletion>& deletions) {
  const std::size_t n = permutation.size();
  std::vector<bool> seen(n, false);
  for (TokenIndex i : permutation) {
    if (i >= n || seen[i]) throw Error(ErrorKind::PermutationMismatch, "permutation is not a permutation of 0.." + std::to_string(n) + "-1");
    seen[i] = true;
  }
  std::vector<bool> deleted(n, false);
  std::size_t deleted_count = 0;
  for (const auto& d : deletions) {
    if (d.deleted >= n) throw Error(ErrorKind::PermutationMismatch, "deletion index outside permutation domain");
    if (!deleted[d.deleted]) ++deleted_count;
    deleted[d.deleted] = true;
  }
  if (compounded.size() + deleted_count != n) {
    throw Error(ErrorKind::PermutationMismatch, "permutation covers " + std::to_string(n) + " tokens but " +
                                                    std::to_string(compounded.size()) + " survive " +
                                                    std::to_string(deleted_count) + " deletions");
  }
  std::vector<std::size_t> slot(n, 0);
  std::size_t next = 0;
  for (TokenIndex i = 0; i < n; ++i) {
    if (!deleted[i]) slot[i] = next++;
  }
  std::vector<FactoredToken> out;
  out.reserve(compounded.size());
  for (TokenIndex i : permutation) {
    if (!deleted[i]) out.push_back(compounded[slot[i]]);
  }
  return out;
}

}  // namespace preflect

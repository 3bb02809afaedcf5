#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "preflect/corpus.hpp"
#include "preflect/error.hpp"
#include "preflect/text.hpp"

namespace preflect {

// A child position in a rule pattern. `NP*` is a wildcard slot that binds a
// run of one or more consecutive NP children.
struct PatternSymbol {
  std::string label;
  bool wildcard = false;

  std::string to_string() const { return wildcard ? label + "*" : label; }
  auto operator<=>(const PatternSymbol&) const = default;
};

struct Pattern {
  std::string parent;
  std::vector<PatternSymbol> symbols;

  std::string to_string() const {
    std::string out = parent + " ->";
    for (const auto& s : symbols) out += " " + s.to_string();
    return out;
  }
  auto operator<=>(const Pattern&) const = default;
};

// `source_of_target[t]` is the source slot whose children fill target slot t.
struct ReorderRule {
  Pattern source;
  Pattern target;
  std::vector<std::size_t> source_of_target;
  std::size_t line = 0;

  bool is_identity() const {
    for (std::size_t t = 0; t < source_of_target.size(); ++t) {
      if (source_of_target[t] != t) return false;
    }
    return true;
  }

  bool is_involution() const {
    for (std::size_t t = 0; t < source_of_target.size(); ++t) {
      if (source_of_target[source_of_target[t]] != t) return false;
    }
    return true;
  }

  std::string mapping_string() const {
    std::string out;
    for (std::size_t t = 0; t < source_of_target.size(); ++t) {
      if (t != 0) out += ',';
      out += std::to_string(t) + ':' + std::to_string(source_of_target[t]);
    }
    return out;
  }

  std::string to_string() const { return source.to_string() + " # " + target.to_string() + " # " + mapping_string(); }
};

struct ReorderRuleSet {
  std::vector<ReorderRule> rules;
  std::string path;

  std::size_t size() const { return rules.size(); }
  bool empty() const { return rules.empty(); }
};

// Half-open child range bound to each source slot, in source slot order.
using WildcardBinding = std::vector<std::pair<std::size_t, std::size_t>>;

struct RuleApplication {
  NodeId node = 0;
  std::size_t rule = 0;  // index into ReorderRuleSet::rules

  bool operator==(const RuleApplication&) const = default;
};

struct ReorderResult {
  ConstituencyTree tree;
  std::vector<RuleApplication> applied;
};

struct RegeneratedSentence {
  std::string text;
  std::vector<TokenIndex> permutation;
};

// ---------------------------------------------------------------------------
// Rule file parsing

namespace detail {

inline Pattern parse_pattern(std::string_view unit, std::size_t line) {
  auto arrow = unit.find("->");
  if (arrow == std::string_view::npos || unit.find("->", arrow + 2) != std::string_view::npos) {
    throw Error(ErrorKind::BadArrow, "expected exactly one '->' in '" + std::string(text::trim(unit)) + "'", line);
  }
  auto lhs = text::split_ws(unit.substr(0, arrow));
  auto rhs = text::split_ws(unit.substr(arrow + 2));
  if (lhs.size() != 1) throw Error(ErrorKind::BadArrow, "left of '->' must be a single parent label", line);
  if (rhs.empty()) throw Error(ErrorKind::BadArrow, "no child symbols right of '->'", line);
  Pattern p;
  p.parent = lhs.front();
  if (p.parent.back() == '*') throw Error(ErrorKind::BadArrow, "parent label cannot be a wildcard", line);
  for (auto& sym : rhs) {
    PatternSymbol s;
    if (sym.size() > 1 && sym.back() == '*') {
      s.wildcard = true;
      sym.pop_back();
    } else if (sym == "*") {
      throw Error(ErrorKind::BadArrow, "bare '*' is not a symbol", line);
    }
    s.label = std::move(sym);
    p.symbols.push_back(std::move(s));
  }
  return p;
}

inline std::vector<std::size_t> parse_mapping(std::string_view unit, std::size_t slots, std::size_t line) {
  std::string normalized(unit);
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  auto pairs = text::split_ws(normalized);
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> source_of_target(slots, unset);
  std::vector<bool> source_used(slots, false);
  for (const auto& pair : pairs) {
    auto colon = pair.find(':');
    std::size_t t = 0, s = 0;
    try {
      if (colon == std::string::npos) throw std::invalid_argument("no colon");
      std::size_t used = 0;
      t = std::stoul(pair.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument("junk");
      s = std::stoul(pair.substr(colon + 1), &used);
      if (used != pair.size() - colon - 1) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw Error(ErrorKind::MappingNotBijective, "malformed mapping pair '" + pair + "' (expected target:source)", line);
    }
    if (t >= slots || s >= slots) {
      throw Error(ErrorKind::MappingNotBijective, "mapping pair '" + pair + "' is outside the " + std::to_string(slots) + " pattern slots", line);
    }
    if (source_of_target[t] != unset) throw Error(ErrorKind::MappingNotBijective, "target slot " + std::to_string(t) + " mapped twice", line);
    if (source_used[s]) throw Error(ErrorKind::MappingNotBijective, "source slot " + std::to_string(s) + " used twice", line);
    source_of_target[t] = s;
    source_used[s] = true;
  }
  if (pairs.size() != slots) {
    throw Error(ErrorKind::MappingNotBijective,
                "mapping covers " + std::to_string(pairs.size()) + " of " + std::to_string(slots) + " slots", line);
  }
  return source_of_target;
}

inline std::vector<std::size_t> infer_mapping(const Pattern& source, const Pattern& target, std::size_t line) {
  auto sorted = source.symbols;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::AmbiguousMapping, "source pattern repeats a symbol; give the mapping explicitly", line);
  }
  std::vector<std::size_t> out;
  for (const auto& sym : target.symbols) {
    auto it = std::find(source.symbols.begin(), source.symbols.end(), sym);
    out.push_back(static_cast<std::size_t>(it - source.symbols.begin()));
  }
  return out;
}

}  // namespace detail

// Parses one rule line: `SOURCE # TARGET [# t:s,t:s,...]`.
inline ReorderRule parse_rule(std::string_view line_text, std::size_t line = 0) {
  auto units = text::split(line_text, '#');
  if (units.size() < 2 || units.size() > 3) {
    throw Error(ErrorKind::BadArrow, "expected 'SOURCE # TARGET [# MAPPING]'", line);
  }
  ReorderRule rule;
  rule.line = line;
  rule.source = detail::parse_pattern(units[0], line);
  rule.target = detail::parse_pattern(units[1], line);

  if (rule.source.parent != rule.target.parent) {
    throw Error(ErrorKind::SymbolMultisetMismatch,
                "parent labels differ ('" + rule.source.parent + "' vs '" + rule.target.parent + "')", line);
  }
  auto a = rule.source.symbols, b = rule.target.symbols;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) {
    throw Error(ErrorKind::SymbolMultisetMismatch,
                "target '" + rule.target.to_string() + "' is not a reordering of source '" + rule.source.to_string() + "'", line);
  }

  const std::size_t slots = rule.source.symbols.size();
  if (units.size() == 3 && !text::trim(units[2]).empty()) {
    rule.source_of_target = detail::parse_mapping(units[2], slots, line);
    for (std::size_t t = 0; t < slots; ++t) {
      if (rule.target.symbols[t] != rule.source.symbols[rule.source_of_target[t]]) {
        throw Error(ErrorKind::MappingSlotMismatch,
                    "target slot " + std::to_string(t) + " (" + rule.target.symbols[t].to_string() +
                        ") is filled from source slot " + std::to_string(rule.source_of_target[t]) + " (" +
                        rule.source.symbols[rule.source_of_target[t]].to_string() + ")",
                    line);
      }
    }
  } else {
    rule.source_of_target = detail::infer_mapping(rule.source, rule.target, line);
  }
  return rule;
}

// Blank lines and `//` comment lines are skipped. Rules keep file order.
inline ReorderRuleSet parse_ruleset(std::string_view content, std::string path = {}) {
  ReorderRuleSet set;
  set.path = std::move(path);
  std::map<Pattern, std::size_t> seen;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.starts_with("//")) continue;
    ReorderRule rule = parse_rule(line, line_no);
    auto [it, inserted] = seen.emplace(rule.source, line_no);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateSourcePattern,
                  "source '" + rule.source.to_string() + "' already defined on line " + std::to_string(it->second), line_no);
    }
    set.rules.push_back(std::move(rule));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Matching and application

namespace detail {

inline bool match_from(const std::vector<PatternSymbol>& pattern, std::size_t slot,
                       const std::vector<std::string>& children, std::size_t pos, WildcardBinding& binding) {
  if (slot == pattern.size()) return pos == children.size();
  const PatternSymbol& sym = pattern[slot];
  if (pos >= children.size() || children[pos] != sym.label) return false;
  if (!sym.wildcard) {
    binding[slot] = {pos, pos + 1};
    return match_from(pattern, slot + 1, children, pos + 1, binding);
  }
  std::size_t run_end = pos;
  while (run_end < children.size() && children[run_end] == sym.label) ++run_end;
  // longest run first, shrinking only if the rest of the pattern fails
  for (std::size_t end = run_end; end > pos; --end) {
    binding[slot] = {pos, end};
    if (match_from(pattern, slot + 1, children, end, binding)) return true;
  }
  return false;
}

}  // namespace detail

// Anchored match of the rule's source children against a full child label
// sequence. The parent label is not checked here; see reorder_tree.
inline std::optional<WildcardBinding> match_production(const ReorderRule& rule, const std::vector<std::string>& children) {
  WildcardBinding binding(rule.source.symbols.size());
  if (!detail::match_from(rule.source.symbols, 0, children, 0, binding)) return std::nullopt;
  return binding;
}

// Moves child runs into target slot order. Children inside a wildcard run
// keep their relative order.
template <typename T>
std::vector<T> permute_children(const ReorderRule& rule, const WildcardBinding& binding, std::vector<T> children) {
  std::vector<T> out;
  out.reserve(children.size());
  for (std::size_t source_slot : rule.source_of_target) {
    auto [begin, end] = binding[source_slot];
    for (std::size_t i = begin; i < end; ++i) out.push_back(std::move(children[i]));
  }
  return out;
}

namespace detail {

inline void reorder_node(ConstituencyTree& node, const ReorderRuleSet& rules, NodeId& next_id,
                         std::vector<RuleApplication>& applied) {
  NodeId id = next_id++;
  if (node.is_leaf()) return;
  if (!node.is_preterminal()) {
    std::vector<std::string> labels;
    labels.reserve(node.children.size());
    for (const auto& c : node.children) labels.push_back(c.label);
    for (std::size_t r = 0; r < rules.rules.size(); ++r) {
      const ReorderRule& rule = rules.rules[r];
      if (rule.source.parent != node.label) continue;
      if (auto binding = match_production(rule, labels)) {
        node.children = permute_children(rule, *binding, std::move(node.children));
        applied.push_back({id, r});
        break;
      }
    }
  }
  for (auto& child : node.children) reorder_node(child, rules, next_id, applied);
}

}  // namespace detail

// Single top-down pass. At each phrasal node the first matching rule in file
// order permutes the children, then the pass descends into the permuted
// children. Node ids in the trace are pre-order positions in the result.
inline ReorderResult reorder_tree(ConstituencyTree tree, const ReorderRuleSet& rules) {
  ReorderResult result;
  NodeId next = 0;
  detail::reorder_node(tree, rules, next, result.applied);
  result.tree = std::move(tree);
  return result;
}

inline RegeneratedSentence regenerate_sentence(const ConstituencyTree& tree, const std::vector<Token>& tokens) {
  RegeneratedSentence out;
  out.permutation = leaf_order(tree);
  std::vector<std::string> words;
  words.reserve(out.permutation.size());
  for (TokenIndex i : out.permutation) {
    if (i >= tokens.size()) throw Error(ErrorKind::InvariantViolation, "leaf index " + std::to_string(i) + " out of range");
    words.push_back(tokens[i].surface);
  }
  out.text = text::join(words, " ");
  return out;
}

}  // namespace preflect

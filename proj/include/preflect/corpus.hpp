#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "preflect/error.hpp"
#include "preflect/text.hpp"

namespace preflect {

using TokenIndex = std::size_t;

// Pre-order position of a node within a tree (root is 0, leaves counted).
using NodeId = std::size_t;

inline constexpr TokenIndex kNoToken = std::numeric_limits<TokenIndex>::max();

struct Token {
  TokenIndex index = 0;
  std::string surface;
  std::string lemma;
  std::string pos;

  bool operator==(const Token&) const = default;
};

// Internal nodes carry a phrase label or a POS tag; leaves carry the surface
// word in `label` and the sentence position in `token`.
struct ConstituencyTree {
  std::string label;
  std::vector<ConstituencyTree> children;
  TokenIndex token = kNoToken;

  static ConstituencyTree leaf(std::string word, TokenIndex index) {
    return ConstituencyTree{std::move(word), {}, index};
  }

  bool is_leaf() const { return children.empty(); }
  bool is_preterminal() const { return children.size() == 1 && children.front().is_leaf(); }

  bool operator==(const ConstituencyTree&) const = default;
};

struct DependencyEdge {
  std::string relation;
  std::optional<TokenIndex> head;  // empty for ROOT
  TokenIndex dependent = 0;

  bool is_root() const { return !head.has_value(); }
  bool operator==(const DependencyEdge&) const = default;
};

struct DependencyGraph {
  std::vector<DependencyEdge> edges;

  const DependencyEdge* incoming(TokenIndex dependent) const {
    for (const auto& e : edges) {
      if (e.dependent == dependent) return &e;
    }
    return nullptr;
  }

  std::optional<TokenIndex> root() const {
    for (const auto& e : edges) {
      if (e.is_root()) return e.dependent;
    }
    return std::nullopt;
  }

  bool operator==(const DependencyGraph&) const = default;
};

struct AnnotatedSentence {
  std::string id;
  std::vector<Token> tokens;
  ConstituencyTree tree;
  DependencyGraph deps;

  bool operator==(const AnnotatedSentence&) const = default;
};

// word|lemma|word-class|morphology; morphology atoms are joined by `_`.
// `surface` keeps the original casing of the word for display and is not
// part of the serialized form.
struct FactoredToken {
  std::string word;
  std::string lemma;
  std::string word_class;
  std::vector<std::string> morphology;
  std::string surface;

  bool operator==(const FactoredToken&) const = default;
};

// ---------------------------------------------------------------------------
// Trees

namespace detail {

struct PtbLexer {
  std::string_view text;
  std::size_t pos = 0;

  enum class Kind { Open, Close, Atom, End };

  Kind peek() {
    skip_space();
    if (pos >= text.size()) return Kind::End;
    if (text[pos] == '(') return Kind::Open;
    if (text[pos] == ')') return Kind::Close;
    return Kind::Atom;
  }

  void skip_space() {
    while (pos < text.size() && text::is_space(text[pos])) ++pos;
  }

  std::string atom() {
    skip_space();
    std::size_t start = pos;
    while (pos < text.size() && !text::is_space(text[pos]) && text[pos] != '(' && text[pos] != ')') ++pos;
    return std::string(text.substr(start, pos - start));
  }
};

inline ConstituencyTree parse_node(PtbLexer& lex, TokenIndex& next_token, std::size_t depth) {
  using Kind = PtbLexer::Kind;
  // caller has consumed '('
  ConstituencyTree node;
  if (lex.peek() == Kind::Atom) node.label = lex.atom();

  std::vector<std::string> atoms;
  for (;;) {
    Kind k = lex.peek();
    if (k == Kind::End) throw Error(ErrorKind::UnbalancedBrackets, "missing ')' at end of input");
    if (k == Kind::Close) {
      ++lex.pos;
      break;
    }
    if (k == Kind::Open) {
      ++lex.pos;
      node.children.push_back(parse_node(lex, next_token, depth + 1));
    } else {
      atoms.push_back(lex.atom());
    }
  }

  if (!atoms.empty()) {
    if (atoms.size() > 1 || !node.children.empty() || node.label.empty()) {
      throw Error(ErrorKind::LeafUnderNonPOSNode,
                  "terminal '" + atoms.front() + "' under node '" + node.label + "' that is not a POS node");
    }
    node.children.push_back(ConstituencyTree::leaf(std::move(atoms.front()), next_token++));
    return node;
  }
  if (node.children.empty()) {
    throw Error(ErrorKind::EmptyNode, node.label.empty() ? "empty brackets" : "node '" + node.label + "' has no children");
  }
  if (node.label.empty()) {
    // PTB files wrap each tree in an unlabeled root: "( (S ...) )"
    if (depth == 0 && node.children.size() == 1) return std::move(node.children.front());
    throw Error(ErrorKind::EmptyNode, "internal node without a label");
  }
  return node;
}

inline void serialize_into(const ConstituencyTree& node, std::string& out) {
  if (node.is_leaf()) {
    out += node.label;
    return;
  }
  out += '(';
  out += node.label;
  for (const auto& child : node.children) {
    out += ' ';
    serialize_into(child, out);
  }
  out += ')';
}

template <typename Fn>
void for_each_leaf(const ConstituencyTree& node, Fn&& fn) {
  if (node.is_leaf()) {
    fn(node);
    return;
  }
  for (const auto& child : node.children) for_each_leaf(child, fn);
}

}  // namespace detail

// Reads one bracketed tree. Leaves are numbered left to right from 0.
inline ConstituencyTree parse_ptb(std::string_view text) {
  detail::PtbLexer lex{text};
  using Kind = detail::PtbLexer::Kind;
  Kind k = lex.peek();
  if (k == Kind::End) throw Error(ErrorKind::EmptyNode, "empty tree text");
  if (k == Kind::Close) throw Error(ErrorKind::UnbalancedBrackets, "unexpected ')'");
  if (k == Kind::Atom) throw Error(ErrorKind::LeafUnderNonPOSNode, "terminal outside of any bracket");
  ++lex.pos;
  TokenIndex next = 0;
  ConstituencyTree tree = detail::parse_node(lex, next, 0);
  k = lex.peek();
  if (k == Kind::Close) throw Error(ErrorKind::UnbalancedBrackets, "unexpected ')' after tree");
  if (k != Kind::End) throw Error(ErrorKind::FormatError, "trailing input after tree");
  return tree;
}

inline std::string serialize_ptb(const ConstituencyTree& tree) {
  std::string out;
  detail::serialize_into(tree, out);
  return out;
}

inline std::vector<TokenIndex> leaf_order(const ConstituencyTree& tree) {
  std::vector<TokenIndex> out;
  detail::for_each_leaf(tree, [&](const ConstituencyTree& leaf) { out.push_back(leaf.token); });
  return out;
}

inline std::vector<std::string> leaf_words(const ConstituencyTree& tree) {
  std::vector<std::string> out;
  detail::for_each_leaf(tree, [&](const ConstituencyTree& leaf) { out.push_back(leaf.label); });
  return out;
}

struct Production {
  std::string parent;
  std::vector<std::string> children;
  NodeId node = 0;

  std::string to_string() const { return parent + " -> " + text::join(children, " "); }
};

namespace detail {

inline void collect_productions(const ConstituencyTree& node, NodeId& next_id, std::vector<Production>& out) {
  NodeId id = next_id++;
  if (node.is_leaf()) return;
  if (!node.is_preterminal()) {
    Production p{node.label, {}, id};
    for (const auto& child : node.children) p.children.push_back(child.label);
    out.push_back(std::move(p));
  }
  for (const auto& child : node.children) collect_productions(child, next_id, out);
}

}  // namespace detail

// Pre-order list of phrasal productions. Preterminal (POS -> word) nodes are
// lexical and are not reported; unary phrasal nodes such as NP -> PRP are.
inline std::vector<Production> extract_productions(const ConstituencyTree& tree) {
  std::vector<Production> out;
  NodeId next = 0;
  detail::collect_productions(tree, next, out);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

// Parsers emit bracket escapes in trees while tokens usually carry the raw
// character; both spellings denote the same token.
inline std::string_view unbracket(std::string_view word) {
  if (word == "-LRB-") return "(";
  if (word == "-RRB-") return ")";
  if (word == "-LSB-") return "[";
  if (word == "-RSB-") return "]";
  if (word == "-LCB-") return "{";
  if (word == "-RCB-") return "}";
  return word;
}

inline void check_tree_shape(const ConstituencyTree& node, const std::vector<Token>& tokens,
                             const std::string& id) {
  if (node.is_leaf()) return;
  for (const auto& child : node.children) {
    if (child.is_leaf()) {
      if (node.children.size() != 1) {
        throw Error(ErrorKind::InvariantViolation, "sentence " + id + ": leaf shares a parent with other nodes");
      }
      if (child.token >= tokens.size()) {
        throw Error(ErrorKind::InvariantViolation, "sentence " + id + ": leaf index out of range");
      }
      const Token& tok = tokens[child.token];
      if (node.label != tok.pos) {
        throw Error(ErrorKind::InvariantViolation, "sentence " + id + ": leaf " + std::to_string(child.token) +
                                                       " sits under '" + node.label + "' but its POS is '" +
                                                       tok.pos + "'");
      }
      if (unbracket(child.label) != unbracket(tok.surface)) {
        throw Error(ErrorKind::InvariantViolation, "sentence " + id + ": tree word '" + child.label +
                                                       "' does not match token '" + tok.surface + "'");
      }
    } else {
      check_tree_shape(child, tokens, id);
    }
  }
}

}  // namespace detail

// Throws InvariantViolation naming the sentence id on the first broken rule.
inline void validate(const AnnotatedSentence& s) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::InvariantViolation, "sentence " + s.id + ": " + why);
  };
  const std::size_t n = s.tokens.size();
  if (n == 0) fail("no tokens");
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = s.tokens[i];
    if (t.index != i) fail("token indices are not contiguous from 0");
    if (t.surface.empty() || t.lemma.empty() || t.pos.empty()) fail("token " + std::to_string(i) + " has an empty field");
    if (text::has_space(t.surface) || text::has_space(t.lemma) || text::has_space(t.pos)) {
      fail("token " + std::to_string(i) + " contains whitespace");
    }
    if (t.pos.find('|') != std::string::npos) fail("POS tag of token " + std::to_string(i) + " contains '|'");
  }

  auto order = leaf_order(s.tree);
  if (order.size() != n) {
    fail("tree yield has " + std::to_string(order.size()) + " leaves but sentence has " + std::to_string(n) + " tokens");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (order[i] != i) fail("tree leaves are not numbered left to right");
  }
  detail::check_tree_shape(s.tree, s.tokens, s.id);

  std::vector<bool> seen(n, false);
  std::size_t roots = 0;
  std::size_t max_dep = 0;
  for (const auto& e : s.deps.edges) {
    if (e.relation.empty() || text::has_space(e.relation)) fail("bad dependency relation name '" + e.relation + "'");
    if (e.dependent >= n) fail("dependent index " + std::to_string(e.dependent) + " out of range");
    if (e.head && *e.head >= n) fail("head index " + std::to_string(*e.head) + " out of range");
    if (e.head && *e.head == e.dependent) fail("self-loop on token " + std::to_string(e.dependent));
    if (seen[e.dependent]) fail("token " + std::to_string(e.dependent) + " has more than one head");
    seen[e.dependent] = true;
    if (e.is_root()) ++roots;
    max_dep = std::max(max_dep, e.dependent);
  }
  if (roots != 1) fail("expected exactly one ROOT edge, found " + std::to_string(roots));
  if (max_dep + 1 != n) fail("highest dependent index does not match token count");
}

// ---------------------------------------------------------------------------
// Factored tokens

inline std::string to_string(const FactoredToken& t) {
  std::vector<std::string> atoms;
  atoms.reserve(t.morphology.size());
  for (const auto& a : t.morphology) atoms.push_back(text::escape(a));
  return text::escape(t.word) + '|' + text::escape(t.lemma) + '|' + text::escape(t.word_class) + '|' +
         text::join(atoms, "_");
}

inline std::string to_line(const std::vector<FactoredToken>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i != 0) out += ' ';
    out += to_string(tokens[i]);
  }
  return out;
}

inline FactoredToken parse_factored(std::string_view field) {
  auto factors = text::split_unescaped(field, '|');
  if (factors.size() != 4) {
    throw Error(ErrorKind::FormatError, "factored token '" + std::string(field) + "' does not have 4 factors");
  }
  FactoredToken t;
  t.word = text::unescape(factors[0]);
  t.lemma = text::unescape(factors[1]);
  t.word_class = text::unescape(factors[2]);
  for (const auto& atom : text::split_unescaped(factors[3], '_')) {
    if (atom.empty()) throw Error(ErrorKind::FormatError, "empty morphology atom in '" + std::string(field) + "'");
    t.morphology.push_back(text::unescape(atom));
  }
  t.surface = t.word;
  return t;
}

inline std::vector<FactoredToken> parse_factored_line(std::string_view line) {
  std::vector<FactoredToken> out;
  for (const auto& field : text::split_ws(line)) out.push_back(parse_factored(field));
  return out;
}

}  // namespace preflect

#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "preflect/corpus.hpp"

namespace preflect {

enum class InputFormat { Jsonl, PtbConll };
enum class Strictness { SkipBad, Abort };

// One input sentence plus whatever earlier pipeline stages attached to it.
struct SentenceRecord {
  AnnotatedSentence sentence;
  std::optional<std::vector<TokenIndex>> permutation;
  std::optional<std::vector<FactoredToken>> factors;
  std::size_t line = 0;
};

struct ReadOptions {
  Strictness strictness = Strictness::Abort;
  // Called for every skipped record when strictness is SkipBad.
  std::function<void(const Error&)> on_skip;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::FormatError, std::string("missing field \"") + key + "\"", line);
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) throw Error(ErrorKind::FormatError, std::string("field \"") + key + "\" is not a string", line);
  return v.get<std::string>();
}

inline long long require_int(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_number_integer()) throw Error(ErrorKind::FormatError, std::string("field \"") + key + "\" is not an integer", line);
  return v.get<long long>();
}

inline std::vector<TokenIndex> index_list(const nlohmann::json& v, const char* key, std::size_t line) {
  if (!v.is_array()) throw Error(ErrorKind::FormatError, std::string("field \"") + key + "\" is not an array", line);
  std::vector<TokenIndex> out;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() < 0) {
      throw Error(ErrorKind::FormatError, std::string("field \"") + key + "\" holds a non-index value", line);
    }
    out.push_back(static_cast<TokenIndex>(x.get<long long>()));
  }
  return out;
}

inline SentenceRecord record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw Error(ErrorKind::FormatError, "record is not a JSON object", line);
  SentenceRecord rec;
  rec.line = line;
  AnnotatedSentence& s = rec.sentence;
  const auto& id = require(j, "id", line);
  s.id = id.is_string() ? id.get<std::string>() : id.dump();

  const auto& tokens = require(j, "tokens", line);
  if (!tokens.is_array()) throw Error(ErrorKind::FormatError, "\"tokens\" is not an array", line);
  for (const auto& t : tokens) {
    if (!t.is_object()) throw Error(ErrorKind::FormatError, "token is not an object", line);
    s.tokens.push_back(Token{s.tokens.size(), require_string(t, "surface", line), require_string(t, "lemma", line),
                             require_string(t, "pos", line)});
  }

  try {
    s.tree = parse_ptb(require_string(j, "parse", line));
  } catch (const Error& e) {
    throw Error(ErrorKind::FormatError, std::string("bad parse tree: ") + e.what(), line);
  }

  const auto& deps = require(j, "deps", line);
  if (!deps.is_array()) throw Error(ErrorKind::FormatError, "\"deps\" is not an array", line);
  for (const auto& d : deps) {
    if (!d.is_object()) throw Error(ErrorKind::FormatError, "dependency is not an object", line);
    DependencyEdge e;
    e.relation = require_string(d, "rel", line);
    long long head = require_int(d, "head", line);
    long long dep = require_int(d, "dep", line);
    if (head < -1 || dep < 0) throw Error(ErrorKind::FormatError, "negative dependency index", line);
    if (head >= 0) e.head = static_cast<TokenIndex>(head);
    e.dependent = static_cast<TokenIndex>(dep);
    s.deps.edges.push_back(std::move(e));
  }

  if (auto it = j.find("permutation"); it != j.end()) rec.permutation = index_list(*it, "permutation", line);
  if (auto it = j.find("factors"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorKind::FormatError, "\"factors\" is not an array", line);
    std::vector<FactoredToken> factors;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& f = (*it)[i];
      if (!f.is_string()) throw Error(ErrorKind::FormatError, "factored token is not a string", line);
      FactoredToken ft = parse_factored(f.get<std::string>());
      if (i < s.tokens.size()) ft.surface = s.tokens[i].surface;
      factors.push_back(std::move(ft));
    }
    rec.factors = std::move(factors);
  }
  return rec;
}

inline void check_record(const SentenceRecord& rec) {
  validate(rec.sentence);
  const std::size_t n = rec.sentence.tokens.size();
  if (rec.permutation) {
    std::vector<bool> seen(n, false);
    if (rec.permutation->size() != n) {
      throw Error(ErrorKind::InvariantViolation, "sentence " + rec.sentence.id + ": permutation length differs from token count");
    }
    for (TokenIndex i : *rec.permutation) {
      if (i >= n || seen[i]) throw Error(ErrorKind::InvariantViolation, "sentence " + rec.sentence.id + ": invalid permutation");
      seen[i] = true;
    }
  }
  if (rec.factors && rec.factors->size() != n) {
    throw Error(ErrorKind::InvariantViolation, "sentence " + rec.sentence.id + ": factor count differs from token count");
  }
}

}  // namespace detail

inline nlohmann::json to_json(const SentenceRecord& rec) {
  const AnnotatedSentence& s = rec.sentence;
  nlohmann::json j;
  j["id"] = s.id;
  j["tokens"] = nlohmann::json::array();
  for (const auto& t : s.tokens) j["tokens"].push_back({{"surface", t.surface}, {"lemma", t.lemma}, {"pos", t.pos}});
  j["parse"] = serialize_ptb(s.tree);
  j["deps"] = nlohmann::json::array();
  for (const auto& e : s.deps.edges) {
    j["deps"].push_back({{"rel", e.relation}, {"head", e.head ? static_cast<long long>(*e.head) : -1LL},
                         {"dep", static_cast<long long>(e.dependent)}});
  }
  if (rec.permutation) j["permutation"] = *rec.permutation;
  if (rec.factors) {
    j["factors"] = nlohmann::json::array();
    for (const auto& f : *rec.factors) j["factors"].push_back(to_string(f));
  }
  return j;
}

inline std::string to_jsonl_line(const SentenceRecord& rec) { return to_json(rec).dump(); }

// Streaming JSONL reader. Blank lines are ignored.
class JsonlReader {
 public:
  JsonlReader(std::istream& in, ReadOptions options = {}) : in_(in), options_(std::move(options)) {}

  std::optional<SentenceRecord> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (text::trim(line).empty()) continue;
      try {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorKind::FormatError, std::string("invalid JSON: ") + e.what(), line_no_);
        }
        SentenceRecord rec = detail::record_from_json(j, line_no_);
        detail::check_record(rec);
        return rec;
      } catch (const Error& e) {
        if (options_.strictness == Strictness::Abort) throw;
        if (options_.on_skip) options_.on_skip(e);
      }
    }
    return std::nullopt;
  }

 private:
  std::istream& in_;
  ReadOptions options_;
  std::size_t line_no_ = 0;
};

// Parallel bracketed-tree and CoNLL-X files. Sentence ids are 1-based
// ordinals. Columns used: ID, FORM, LEMMA, POSTAG (CPOSTAG when POSTAG is
// "_"), HEAD, DEPREL.
class PtbConllReader {
 public:
  PtbConllReader(std::istream& trees, std::istream& conll, ReadOptions options = {})
      : trees_(trees), conll_(conll), options_(std::move(options)) {}

  std::optional<SentenceRecord> next() {
    for (;;) {
      std::string tree_line;
      bool have_tree = false;
      while (std::getline(trees_, tree_line)) {
        ++tree_line_no_;
        if (!text::trim(tree_line).empty()) {
          have_tree = true;
          break;
        }
      }
      auto block = read_block();
      if (!have_tree && block.empty()) return std::nullopt;
      ++ordinal_;
      try {
        if (!have_tree) throw Error(ErrorKind::FormatError, "dependency block without a matching tree", block_start_);
        if (block.empty()) throw Error(ErrorKind::FormatError, "tree without a matching dependency block", tree_line_no_);
        SentenceRecord rec = build(tree_line, block);
        detail::check_record(rec);
        return rec;
      } catch (const Error& e) {
        if (options_.strictness == Strictness::Abort) throw;
        if (options_.on_skip) options_.on_skip(e);
      }
    }
  }

 private:
  std::vector<std::pair<std::size_t, std::string>> read_block() {
    std::vector<std::pair<std::size_t, std::string>> rows;
    std::string line;
    while (std::getline(conll_, line)) {
      ++conll_line_no_;
      if (text::trim(line).empty()) {
        if (rows.empty()) continue;
        break;
      }
      if (line.front() == '#') continue;
      if (rows.empty()) block_start_ = conll_line_no_;
      rows.emplace_back(conll_line_no_, line);
    }
    return rows;
  }

  SentenceRecord build(const std::string& tree_line, const std::vector<std::pair<std::size_t, std::string>>& rows) {
    SentenceRecord rec;
    rec.line = tree_line_no_;
    AnnotatedSentence& s = rec.sentence;
    s.id = std::to_string(ordinal_);
    try {
      s.tree = parse_ptb(tree_line);
    } catch (const Error& e) {
      throw Error(ErrorKind::FormatError, std::string("bad parse tree: ") + e.what(), tree_line_no_);
    }
    for (const auto& [line_no, row] : rows) {
      auto cols = text::split(row, '\t');
      if (cols.size() < 8) cols = text::split_ws(row);
      if (cols.size() < 8) throw Error(ErrorKind::FormatError, "expected 10 CoNLL columns", line_no);
      std::size_t id = 0;
      long long head = 0;
      try {
        id = std::stoul(cols[0]);
        head = std::stoll(cols[6]);
      } catch (const std::exception&) {
        throw Error(ErrorKind::FormatError, "non-numeric ID or HEAD column", line_no);
      }
      if (id != s.tokens.size() + 1) throw Error(ErrorKind::FormatError, "CoNLL IDs must run 1..n", line_no);
      if (head < 0) throw Error(ErrorKind::FormatError, "negative HEAD", line_no);
      std::string pos = cols[4] == "_" ? cols[3] : cols[4];
      std::string lemma = cols[2] == "_" ? cols[1] : cols[2];
      s.tokens.push_back(Token{id - 1, cols[1], lemma, pos});
      DependencyEdge e;
      e.relation = cols[7];
      if (head > 0) e.head = static_cast<TokenIndex>(head - 1);
      e.dependent = id - 1;
      s.deps.edges.push_back(std::move(e));
    }
    return rec;
  }

  std::istream& trees_;
  std::istream& conll_;
  ReadOptions options_;
  std::size_t tree_line_no_ = 0;
  std::size_t conll_line_no_ = 0;
  std::size_t block_start_ = 0;
  std::size_t ordinal_ = 0;
};

inline std::vector<AnnotatedSentence> read_sentences(std::istream& in, ReadOptions options = {}) {
  JsonlReader reader(in, std::move(options));
  std::vector<AnnotatedSentence> out;
  while (auto rec = reader.next()) out.push_back(std::move(rec->sentence));
  return out;
}

inline std::vector<AnnotatedSentence> read_sentences(std::istream& trees, std::istream& conll, ReadOptions options = {}) {
  PtbConllReader reader(trees, conll, std::move(options));
  std::vector<AnnotatedSentence> out;
  while (auto rec = reader.next()) out.push_back(std::move(rec->sentence));
  return out;
}

}  // namespace preflect

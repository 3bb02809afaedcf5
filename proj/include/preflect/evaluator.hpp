#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "preflect/corpus.hpp"
#include "preflect/error.hpp"
#include "preflect/text.hpp"

namespace preflect {

using Sentence = std::vector<std::string>;
using Corpus = std::vector<Sentence>;

// ---------------------------------------------------------------------------
// BLEU

enum class Smoothing { None, AddOne };

inline std::string_view to_string(Smoothing s) { return s == Smoothing::None ? "none" : "add1"; }

struct BleuOptions {
  std::size_t max_n = 4;
  Smoothing smoothing = Smoothing::None;
};

struct BleuReport {
  std::vector<std::uint64_t> matches;  // clipped n-gram matches, index n-1
  std::vector<std::uint64_t> totals;   // hypothesis n-grams, index n-1
  std::vector<double> precision;       // matches/totals, unsmoothed; 0 when totals == 0
  double brevity_penalty = 0.0;
  double cumulative = 0.0;
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;
  Smoothing smoothing = Smoothing::None;
};

namespace detail {

inline std::unordered_map<std::string, std::uint64_t> ngram_counts(const Sentence& s, std::size_t n) {
  std::unordered_map<std::string, std::uint64_t> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != 0) key += '\x1f';
      key += s[i + k];
    }
    ++counts[key];
  }
  return counts;
}

inline void check_corpora(const Corpus& hyps, const Corpus& refs) {
  if (hyps.size() != refs.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(hyps.size()) + " hypotheses vs " + std::to_string(refs.size()) + " references");
  }
  if (hyps.empty()) throw Error(ErrorKind::EmptyCorpus, "no segments to score");
}

}  // namespace detail

// Clipped n-gram matches of one segment against one reference.
inline std::uint64_t clipped_matches(const Sentence& hyp, const Sentence& ref, std::size_t n) {
  auto h = detail::ngram_counts(hyp, n);
  auto r = detail::ngram_counts(ref, n);
  std::uint64_t m = 0;
  for (const auto& [gram, count] : h) {
    if (auto it = r.find(gram); it != r.end()) m += std::min(count, it->second);
  }
  return m;
}

// Corpus-level BLEU with one reference per segment. The cumulative score is
// BP * exp(mean log p_n) over the orders that have at least one hypothesis
// n-gram; with AddOne smoothing p_n = (m+1)/(t+1) for n >= 2.
inline BleuReport bleu(const Corpus& hyps, const Corpus& refs, const BleuOptions& options = {}) {
  detail::check_corpora(hyps, refs);
  BleuReport r;
  r.smoothing = options.smoothing;
  r.matches.assign(options.max_n, 0);
  r.totals.assign(options.max_n, 0);
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    r.hyp_length += hyps[s].size();
    r.ref_length += refs[s].size();
    for (std::size_t n = 1; n <= options.max_n; ++n) {
      if (hyps[s].size() >= n) r.totals[n - 1] += hyps[s].size() - n + 1;
      r.matches[n - 1] += clipped_matches(hyps[s], refs[s], n);
    }
  }
  r.precision.resize(options.max_n);
  double log_sum = 0.0;
  std::size_t orders = 0;
  bool zero = false;
  for (std::size_t n = 1; n <= options.max_n; ++n) {
    const double m = static_cast<double>(r.matches[n - 1]);
    const double t = static_cast<double>(r.totals[n - 1]);
    r.precision[n - 1] = t > 0 ? m / t : 0.0;
    if (t == 0) continue;
    const double add = (options.smoothing == Smoothing::AddOne && n >= 2) ? 1.0 : 0.0;
    const double p = (m + add) / (t + add);
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
    ++orders;
  }
  if (r.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_length < r.ref_length) {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  } else {
    r.brevity_penalty = 1.0;
  }
  r.cumulative = (zero || orders == 0) ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(orders));
  return r;
}

// ---------------------------------------------------------------------------
// METEOR (exact unigram matching only)

enum class MatchMode { Surface, Lemma };

inline std::string_view to_string(MatchMode m) { return m == MatchMode::Surface ? "surface" : "lemma"; }

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  bool exhaustive = true;  // false if the search budget ran out before proving minimality
};

namespace detail {

class ChunkSearch {
 public:
  ChunkSearch(const Sentence& hyp, const Sentence& ref, std::size_t budget)
      : hyp_(hyp), ref_(ref), budget_(budget), used_(ref.size(), false) {
    std::map<std::string_view, std::size_t> hc, rc;
    for (const auto& w : hyp) ++hc[w];
    for (const auto& w : ref) ++rc[w];
    for (const auto& [w, c] : hc) {
      std::size_t r = rc.count(w) ? rc[w] : 0;
      skips_[w] = c - std::min(c, r);
      max_matches_ += std::min(c, r);
    }
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      std::vector<std::size_t> js;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (ref[j] == hyp[i]) js.push_back(j);
      }
      candidates_.push_back(std::move(js));
    }
  }

  Alignment run() {
    best_ = max_matches_ + 1;
    search(0, kNone, 0);
    Alignment a;
    a.matches = max_matches_;
    a.chunks = max_matches_ == 0 ? 0 : best_;
    a.exhaustive = !exhausted_;
    return a;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // prev: reference position aligned to hyp position i-1, or kNone.
  void search(std::size_t i, std::size_t prev, std::size_t chunks) {
    if (chunks >= best_) return;
    if (i == hyp_.size()) {
      best_ = chunks;
      return;
    }
    if (expansions_++ >= budget_ && best_ <= max_matches_) {
      exhausted_ = true;
      return;
    }
    const std::string_view word = hyp_[i];
    // continuing the current chunk first gives a good incumbent early
    if (prev != kNone && prev + 1 < ref_.size() && !used_[prev + 1] && ref_[prev + 1] == hyp_[i]) {
      used_[prev + 1] = true;
      search(i + 1, prev + 1, chunks);
      used_[prev + 1] = false;
    }
    for (std::size_t j : candidates_[i]) {
      if (used_[j] || (prev != kNone && j == prev + 1)) continue;
      used_[j] = true;
      search(i + 1, j, chunks + 1);
      used_[j] = false;
    }
    auto& skip = skips_[word];
    if (skip > 0) {
      --skip;
      search(i + 1, kNone, chunks);
      ++skip;
    }
  }

  const Sentence& hyp_;
  const Sentence& ref_;
  std::size_t budget_;
  std::vector<bool> used_;
  std::vector<std::vector<std::size_t>> candidates_;
  std::map<std::string_view, std::size_t> skips_;
  std::size_t max_matches_ = 0;
  std::size_t best_ = 0;
  std::size_t expansions_ = 0;
  bool exhausted_ = false;
};

}  // namespace detail

// Maximum number of exact unigram matches, and among alignments reaching it
// the fewest chunks (runs adjacent in both hypothesis and reference).
// Branch and bound; `budget` caps search nodes on pathological inputs.
inline Alignment align_unigrams(const Sentence& hyp, const Sentence& ref, std::size_t budget = 2'000'000) {
  return detail::ChunkSearch(hyp, ref, budget).run();
}

struct MeteorReport {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_mean = 0.0;
  double fragmentation_penalty = 0.0;
  double score = 0.0;
  MatchMode match_mode = MatchMode::Surface;
  bool exhaustive = true;
};

inline MeteorReport meteor_from_counts(std::size_t matches, std::size_t chunks, std::size_t hyp_length,
                                       std::size_t ref_length, MatchMode mode = MatchMode::Surface) {
  MeteorReport r;
  r.matches = matches;
  r.chunks = chunks;
  r.hyp_length = hyp_length;
  r.ref_length = ref_length;
  r.match_mode = mode;
  if (matches == 0) return r;
  const double m = static_cast<double>(matches);
  r.precision = m / static_cast<double>(hyp_length);
  r.recall = m / static_cast<double>(ref_length);
  r.f_mean = 10.0 * r.precision * r.recall / (r.recall + 9.0 * r.precision);
  const double frag = static_cast<double>(chunks) / m;
  r.fragmentation_penalty = 0.5 * frag * frag * frag;
  r.score = r.f_mean * (1.0 - r.fragmentation_penalty);
  return r;
}

// Corpus score: matches, lengths and chunks are summed over segments before
// the formula is applied. Zero matches score 0.
inline MeteorReport meteor_lite(const Corpus& hyps, const Corpus& refs, MatchMode mode = MatchMode::Surface) {
  detail::check_corpora(hyps, refs);
  std::size_t matches = 0, chunks = 0, hyp_len = 0, ref_len = 0;
  bool exhaustive = true;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    Alignment a = align_unigrams(hyps[s], refs[s]);
    matches += a.matches;
    chunks += a.chunks;
    hyp_len += hyps[s].size();
    ref_len += refs[s].size();
    exhaustive = exhaustive && a.exhaustive;
  }
  MeteorReport r = meteor_from_counts(matches, chunks, hyp_len, ref_len, mode);
  r.exhaustive = exhaustive;
  return r;
}

// ---------------------------------------------------------------------------
// Corpus statistics

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  double mean_length = 0.0;
  std::vector<std::size_t> vocabulary;  // distinct values per factor index

  bool operator==(const CorpusStats&) const = default;
};

// Lines are whitespace-tokenized; each token is split into factors on
// unescaped `|`. Plain text has a single factor.
inline CorpusStats corpus_stats(const std::vector<std::string>& lines) {
  CorpusStats st;
  std::vector<std::set<std::string>> vocab;
  for (const auto& line : lines) {
    ++st.sentences;
    for (const auto& tok : text::split_ws(line)) {
      ++st.tokens;
      auto factors = text::split_unescaped(tok, '|');
      if (vocab.size() < factors.size()) vocab.resize(factors.size());
      for (std::size_t k = 0; k < factors.size(); ++k) vocab[k].insert(factors[k]);
    }
  }
  st.mean_length = st.sentences == 0 ? 0.0 : static_cast<double>(st.tokens) / static_cast<double>(st.sentences);
  for (const auto& v : vocab) st.vocabulary.push_back(v.size());
  return st;
}

inline CorpusStats corpus_stats(const std::vector<std::vector<FactoredToken>>& corpus) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& s : corpus) lines.push_back(to_line(s));
  return corpus_stats(lines);
}

// Whitespace tokenization; with `factor` set, keeps only that factor of
// every token.
inline Sentence tokenize_for_scoring(std::string_view line, std::optional<std::size_t> factor = std::nullopt) {
  Sentence out;
  for (auto& tok : text::split_ws(line)) {
    if (!factor) {
      out.push_back(std::move(tok));
      continue;
    }
    auto factors = text::split_unescaped(tok, '|');
    if (*factor >= factors.size()) {
      throw Error(ErrorKind::FormatError, "token '" + tok + "' has no factor " + std::to_string(*factor));
    }
    out.push_back(text::unescape(factors[*factor]));
  }
  return out;
}

}  // namespace preflect

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "preflect/compounder.hpp"
#include "preflect/corpus.hpp"
#include "preflect/factorizer.hpp"
#include "preflect/io.hpp"
#include "preflect/reorder.hpp"

namespace preflect {

enum class Stage { Reorder, Factor, Compound };
enum class OutputFormat { Jsonl, Factored, Plain };

struct PipelineConfig {
  std::vector<Stage> stages;  // subset of reorder -> factor -> compound, in that order
  std::optional<ReorderRuleSet> reorder_rules;
  std::optional<CompoundRuleSet> compound_rules;
  PngLexicon png;
  FactorizerOptions factorizer;
  OutputFormat output = OutputFormat::Factored;
  Strictness strictness = Strictness::Abort;
  std::size_t workers = 1;

  bool has(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

  // Throws FormatError describing the first inconsistency.
  void check() const {
    if (stages.empty()) throw Error(ErrorKind::FormatError, "no pipeline stage enabled");
    for (std::size_t i = 1; i < stages.size(); ++i) {
      if (static_cast<int>(stages[i - 1]) >= static_cast<int>(stages[i])) {
        throw Error(ErrorKind::FormatError, "stages must run in the order reorder, factor, compound");
      }
    }
    if (has(Stage::Reorder) && !reorder_rules) throw Error(ErrorKind::FormatError, "reorder stage needs a rule file");
    if (has(Stage::Compound) && !compound_rules) throw Error(ErrorKind::FormatError, "compound stage needs a rule file");
    if (has(Stage::Compound) && output == OutputFormat::Jsonl) {
      throw Error(ErrorKind::FormatError, "compounded sentences cannot be written as JSONL records");
    }
    if (!has(Stage::Factor) && !has(Stage::Compound) && output == OutputFormat::Factored) {
      throw Error(ErrorKind::FormatError, "factored output needs the factor stage");
    }
  }
};

struct SentenceOutcome {
  std::string id;
  std::string line;  // one output line, without newline
  std::vector<Deletion> deletions;
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
  std::size_t reorder_fired = 0;
  std::size_t folds = 0;
};

inline std::vector<TokenIndex> identity_permutation(std::size_t n) {
  std::vector<TokenIndex> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

// Runs the configured stages on one record. Throws Error on data problems.
inline SentenceOutcome process_record(SentenceRecord rec, const PipelineConfig& config) {
  const AnnotatedSentence& s = rec.sentence;
  SentenceOutcome out;
  out.id = s.id;
  out.tokens_in = s.tokens.size();

  std::optional<std::string> regenerated;
  if (config.has(Stage::Reorder)) {
    ReorderResult reordered = reorder_tree(s.tree, *config.reorder_rules);
    RegeneratedSentence regen = regenerate_sentence(reordered.tree, s.tokens);
    out.reorder_fired = reordered.applied.size();
    rec.permutation = std::move(regen.permutation);
    regenerated = std::move(regen.text);
  }
  if (config.has(Stage::Factor)) {
    rec.factors = factorize_sentence(s, config.factorizer);
  }

  const std::vector<TokenIndex> permutation = rec.permutation ? *rec.permutation : identity_permutation(s.tokens.size());
  std::vector<FactoredToken> final_tokens;
  if (config.has(Stage::Compound)) {
    if (!rec.factors) throw Error(ErrorKind::FormatError, "sentence " + s.id + ": compound stage needs factored input", rec.line);
    CompoundResult compounded = compound_sentence(*rec.factors, s, *config.compound_rules, config.png);
    out.folds = compounded.folds;
    final_tokens = integrate(compounded.tokens(), permutation, compounded.deletions);
    out.deletions = std::move(compounded.deletions);
  } else if (rec.factors) {
    final_tokens = integrate(*rec.factors, permutation, {});
  }

  switch (config.output) {
    case OutputFormat::Jsonl:
      out.line = to_jsonl_line(rec);
      out.tokens_out = s.tokens.size();
      break;
    case OutputFormat::Factored:
      out.line = to_line(final_tokens);
      out.tokens_out = final_tokens.size();
      break;
    case OutputFormat::Plain:
      if (rec.factors || config.has(Stage::Compound)) {
        std::vector<std::string> words;
        for (const auto& t : final_tokens) words.push_back(t.surface);
        out.line = text::join(words, " ");
        out.tokens_out = final_tokens.size();
      } else {
        if (!regenerated) {
          std::vector<std::string> words;
          for (TokenIndex i : permutation) words.push_back(s.tokens[i].surface);
          regenerated = text::join(words, " ");
        }
        out.line = *regenerated;
        out.tokens_out = s.tokens.size();
      }
      break;
  }
  return out;
}

// Applies `fn` to every item on up to `workers` threads and returns results
// in input order. The first exception (by item position) is rethrown.
template <typename In, typename Fn>
auto parallel_map(std::vector<In>& items, std::size_t workers, Fn fn) {
  using Out = decltype(fn(items.front()));
  std::vector<std::optional<Out>> results(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        results[i].emplace(fn(items[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, items.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return std::make_pair(std::move(results), std::move(errors));
}

struct RunSummary {
  std::size_t sentences = 0;
  std::size_t skipped = 0;
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
  std::size_t reorder_fired = 0;
  std::size_t folds = 0;
  std::size_t deletions = 0;
};

inline nlohmann::json trace_entry(const std::string& id, const Deletion& d) {
  return {{"id", id}, {"original_index", d.deleted}, {"target_index", d.target}, {"atom", d.atom}, {"rule", d.rule}};
}

// Streams records from `next` through the pipeline in batches; output order
// equals input order for any worker count. Data errors are reported on
// `diag` and skipped, or rethrown when strictness is Abort.
inline RunSummary run_pipeline(const std::function<std::optional<SentenceRecord>()>& next, const PipelineConfig& config,
                               std::ostream& out, std::ostream& diag, std::ostream* trace = nullptr,
                               std::size_t batch_size = 256) {
  config.check();
  RunSummary summary;
  std::vector<SentenceRecord> batch;
  auto flush = [&] {
    auto [results, errors] = parallel_map(batch, config.workers,
                                          [&](const SentenceRecord& r) { return process_record(r, config); });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (errors[i]) {
        try {
          std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
          if (config.strictness == Strictness::Abort) throw;
          diag << "skipped sentence " << batch[i].sentence.id << ": " << e.what() << '\n';
          ++summary.skipped;
          continue;
        }
      }
      const SentenceOutcome& o = *results[i];
      out << o.line << '\n';
      ++summary.sentences;
      summary.tokens_in += o.tokens_in;
      summary.tokens_out += o.tokens_out;
      summary.reorder_fired += o.reorder_fired;
      summary.folds += o.folds;
      summary.deletions += o.deletions.size();
      if (trace) {
        for (const auto& d : o.deletions) *trace << trace_entry(o.id, d).dump() << '\n';
      }
    }
    batch.clear();
  };
  while (auto rec = next()) {
    batch.push_back(std::move(*rec));
    if (batch.size() >= batch_size) flush();
  }
  if (!batch.empty()) flush();
  return summary;
}

}  // namespace preflect

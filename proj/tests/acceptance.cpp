// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "properties.hpp"

using namespace preflect;
namespace pt = preflect::testing;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << id << " " << title << ": " << detail << std::endl;
}

std::vector<std::string> productions_of(const ConstituencyTree& t) {
  std::vector<std::string> out;
  for (const auto& p : extract_productions(t)) out.push_back(p.to_string());
  return out;
}

void criterion_worked_example() {
  ReorderRuleSet rules = parse_ruleset(pt::read_file(pt::data_path("rules/sample.rr")));
  std::istringstream in(pt::read_file(pt::data_path("fixtures/worked_example.jsonl")));
  std::vector<AnnotatedSentence> sentences = read_sentences(in);
  const AnnotatedSentence& s = sentences.at(0);
  const std::string tree_text = serialize_ptb(s.tree);

  std::string text = regenerate_sentence(reorder_tree(s.tree, rules).tree, s.tokens).text;
  const std::string expected = "I my home to vegetables bought";

  constexpr int kRuns = 2000;
  std::size_t sink = 0;
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < kRuns; ++i) {
    ConstituencyTree tree = parse_ptb(tree_text);
    sink += regenerate_sentence(reorder_tree(std::move(tree), rules).tree, s.tokens).text.size();
  }
  double per_sentence_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / kRuns;

  std::ostringstream detail;
  detail << "\"" << text << "\"; " << per_sentence_ms * 1000.0 << " us/sentence (parse+reorder+regenerate)";
  report(1, text == expected && per_sentence_ms < 1.0 && sink > 0, "worked-example reordering", detail.str());
}

void criterion_fixture_pairs() {
  ReorderRuleSet rules = parse_ruleset(pt::read_file(pt::data_path("rules/sample.rr")));
  auto fixtures = pt::read_json_lines(pt::data_path("fixtures/reorder_pairs.jsonl"));
  std::istringstream in(pt::read_file(pt::data_path("fixtures/reorder_pairs.jsonl")));
  auto sentences = read_sentences(in);
  bool ok = fixtures.size() == 5 && sentences.size() == 5;
  std::string detail;
  for (std::size_t i = 0; ok && i < sentences.size(); ++i) {
    const auto& fx = fixtures[i];
    ReorderResult r = reorder_tree(sentences[i].tree, rules);
    std::string got = regenerate_sentence(r.tree, sentences[i].tokens).text;
    bool row = got == fx["expected"].get<std::string>() &&
               productions_of(sentences[i].tree) == fx["productions"].get<std::vector<std::string>>() &&
               productions_of(r.tree) == fx["reordered_productions"].get<std::vector<std::string>>();
    std::string published = fx["published"].get<std::string>();
    // Only a trailing period the source sentence lacks may separate the two.
    bool period_rule = published == got || (published == got + "." && fx.contains("note"));
    ok = ok && row && period_rule;
    detail += (i ? "; " : "") + sentences[i].id + (row && period_rule ? " ok" : " MISMATCH \"" + got + "\"");
  }
  report(2, ok, "fixture sentence pairs", detail);
}

void criterion_factors() {
  const std::vector<std::string> expected{"i|i|PRP|PRP_nsubj",  "bought|buy|V|VBD",     "vegetables|vegetable|N|NNS_dobj",
                                          "to|to|PRE|TO_prep", "my|my|PRP|PRP$_poss", "home|home|N|NN_pobj"};
  std::istringstream in(pt::read_file(pt::data_path("fixtures/worked_example.jsonl")));
  auto factors = factorize_sentence(read_sentences(in).at(0));
  std::vector<std::string> got;
  for (const auto& f : factors) got.push_back(to_string(f));
  report(3, got == expected, "worked-example factors", text::join(got, " "));
}

void criterion_bleu() {
  std::mt19937 rng(20240);
  std::size_t corpora = 0, mismatches = 0;
  double worst_identity = 0.0;
  for (; corpora < 200; ++corpora) {
    std::size_t n_sent = 1 + rng() % 5;
    Corpus h, r;
    for (std::size_t s = 0; s < n_sent; ++s) {
      h.push_back(pt::random_words(rng, 8, 5));
      r.push_back(pt::random_words(rng, 8, 5));
    }
    BleuReport got = bleu(h, r);
    for (std::size_t n = 1; n <= 4; ++n) {
      std::uint64_t m = 0, t = 0;
      for (std::size_t s = 0; s < n_sent; ++s) {
        m += pt::oracle_clipped(h[s], r[s], n);
        t += pt::all_ngrams(h[s], n).size();
      }
      // Integer counts equal means the rational precisions m/t are equal.
      if (got.matches[n - 1] != m || got.totals[n - 1] != t) ++mismatches;
    }
    if (std::abs(got.cumulative - pt::oracle_bleu(h, r)) > 1e-12) ++mismatches;
    Corpus c = h;
    c.push_back(pt::random_words(rng, 8, 5, 1));
    worst_identity = std::max(worst_identity, std::abs(bleu(c, c).cumulative - 1.0));
  }
  std::ostringstream detail;
  detail << corpora << " corpora, " << mismatches << " precision mismatches, max |BLEU(c,c)-1| = " << worst_identity;
  report(4, mismatches == 0 && worst_identity < 1e-12, "BLEU oracle equivalence", detail.str());
}

void criterion_meteor() {
  std::mt19937 rng(31337);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    auto h = pt::random_words(rng, 6, 4);
    auto r = pt::random_words(rng, 6, 4);
    Alignment a = align_unigrams(h, r);
    pt::OracleAlignment o = pt::oracle_min_chunks(h, r);
    if (a.matches != o.matches || a.chunks != o.chunks) ++mismatches;
  }
  double three = meteor_lite({{"the", "cat", "sat"}}, {{"the", "cat", "sat"}}).score;
  double one = meteor_lite({{"cat"}}, {{"cat"}}).score;
  bool fixtures = std::abs(three - 0.9814814814814815) < 1e-9 && one == 0.5;
  std::ostringstream detail;
  detail.precision(12);
  detail << "200 pairs, " << mismatches << " chunk mismatches; 3-token identity " << three << ", 1-token identity "
         << one;
  report(5, mismatches == 0 && fixtures, "METEOR-lite oracle equivalence", detail.str());
}

void criterion_properties() {
  constexpr std::size_t kCases = 1000;
  std::vector<std::pair<std::string, pt::PropertyResult>> results;
  results.emplace_back("token multiset", pt::check_reorder_preserves_tokens(kCases));
  results.emplace_back("mapping bijectivity", pt::check_mapping_bijectivity(kCases));
  results.emplace_back("closed-set round trip", pt::check_involution_twice(kCases));
  auto c = pt::check_compounding(kCases);
  results.emplace_back("conservation", c.conservation);
  results.emplace_back("content words", c.content_words);
  results.emplace_back("compound order", c.order);
  results.emplace_back("compound idempotence", c.idempotence);
  results.emplace_back("BLEU oracle", pt::check_bleu_oracle(kCases));
  results.emplace_back("METEOR oracle", pt::check_meteor_oracle(kCases));
  results.emplace_back("worker determinism", pt::check_worker_determinism(kCases));

  bool ok = true;
  std::string detail;
  for (const auto& [name, r] : results) {
    ok = ok && r.ok(kCases);
    detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(r.cases - r.failures) + "/" +
              std::to_string(r.cases);
    if (r.failures) detail += " (first: " + r.first_failure + ")";
  }
  report(6, ok, "property suites", detail);
}

void criterion_demo() {
  PipelineConfig config;
  config.stages = {Stage::Reorder, Stage::Factor, Stage::Compound};
  config.reorder_rules = parse_ruleset(pt::read_file(pt::data_path("rules/sample.rr")));
  config.compound_rules = parse_compound_rules(pt::read_file(pt::data_path("rules/default.cr")));
  std::istringstream in(pt::read_file(pt::data_path("fixtures/worked_example.jsonl")));
  JsonlReader reader(in);
  std::ostringstream out, diag;
  RunSummary s = run_pipeline([&] { return reader.next(); }, config, out, diag);
  std::string line = out.str();
  if (!line.empty() && line.back() == '\n') line.pop_back();
  const std::string expected =
      "i|i|PRP|PRP_nsubj my|my|PRP|PRP$_poss home|home|N|NN_pobj_to vegetables|vegetable|N|NNS_dobj "
      "bought|buy|V|VBD_1s";
  std::cout << "     demo output: " << line << "\n";
  std::cout << "     trained-system BLEU/METEOR tables and the 180-rule reordering accuracy need an unavailable "
               "corpus, trainer, generator and rule file; not reproduced\n";
  report(7, line == expected && s.tokens_in == 6 && s.tokens_out == 5, "end-to-end length reduction demo",
         std::to_string(s.tokens_in) + " -> " + std::to_string(s.tokens_out) + " tokens");
}

}  // namespace

int main() {
  auto guard = [](void (*fn)(), int id) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, "exception", e.what());
    }
  };
  guard(criterion_worked_example, 1);
  guard(criterion_fixture_pairs, 2);
  guard(criterion_factors, 3);
  guard(criterion_bleu, 4);
  guard(criterion_meteor, 5);
  guard(criterion_properties, 6);
  guard(criterion_demo, 7);
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}

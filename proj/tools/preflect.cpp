// preflect: source-side preprocessing for factored English -> Tamil SMT.
//
//   preflect preprocess --in corpus.jsonl --reorder rules.rr --compound rules.cr
//   preflect reorder --in corpus.jsonl --rules rules.rr --out plain
//   preflect score bleu --hyp out.txt --ref ref.txt
//
// Data goes to stdout, diagnostics to stderr.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "preflect/compounder.hpp"
#include "preflect/evaluator.hpp"
#include "preflect/io.hpp"
#include "preflect/pipeline.hpp"
#include "preflect/reorder.hpp"

namespace {

using namespace preflect;

constexpr int kDataError = 1;
constexpr int kConfigError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

ReorderRuleSet load_reorder_rules(const std::string& path) {
  try {
    return parse_ruleset(read_file(path), path);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

CompoundRuleSet load_compound_rules(const std::string& path) {
  try {
    return parse_compound_rules(read_file(path), path);
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Options shared by the sentence-processing subcommands.
struct InputOptions {
  std::string in = "-";
  std::string format = "jsonl";
  std::string conll;
  std::string strict = "abort";
  std::string trace;
  std::string png;
  std::string out;
  std::size_t workers = 1;
  bool root_atom = false;
};

void add_input_options(CLI::App* cmd, InputOptions& o, const std::string& default_out,
                       const std::vector<std::string>& outs) {
  o.out = default_out;
  cmd->add_option("--in", o.in, "input file ('-' for stdin); the tree file for ptbconll")->capture_default_str();
  cmd->add_option("--format", o.format, "input format")->check(CLI::IsMember({"jsonl", "ptbconll"}))->capture_default_str();
  cmd->add_option("--conll", o.conll, "CoNLL dependency file (ptbconll format)");
  cmd->add_option("--out", o.out, "output format")->check(CLI::IsMember(outs))->capture_default_str();
  cmd->add_option("--strict", o.strict, "on bad sentences")->check(CLI::IsMember({"skip-bad", "abort"}))->capture_default_str();
  cmd->add_option("--workers", o.workers, "worker threads (PREFLECT_WORKERS overrides)")->check(CLI::PositiveNumber)->capture_default_str();
}

OutputFormat output_format(const std::string& name) {
  if (name == "jsonl") return OutputFormat::Jsonl;
  if (name == "plain") return OutputFormat::Plain;
  return OutputFormat::Factored;
}

std::size_t worker_count(std::size_t flag) {
  if (const char* env = std::getenv("PREFLECT_WORKERS")) {
    try {
      long long n = std::stoll(env);
      if (n < 1) throw std::invalid_argument("non-positive");
      return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      throw ConfigError(std::string("PREFLECT_WORKERS must be a positive integer, got '") + env + "'");
    }
  }
  return flag;
}

int run_stages(const InputOptions& o, PipelineConfig config) {
  config.output = output_format(o.out);
  config.strictness = o.strict == "abort" ? Strictness::Abort : Strictness::SkipBad;
  config.workers = worker_count(o.workers);
  config.factorizer.root_atom_for_singleton = o.root_atom;
  if (!o.png.empty()) {
    try {
      config.png = PngLexicon::parse(read_file(o.png));
    } catch (const Error& e) {
      throw ConfigError(o.png + ": " + e.what());
    }
  }
  try {
    config.check();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  std::size_t unknown_subjects = 0;
  config.png.on_unknown = [&](const Token&) { ++unknown_subjects; };

  std::size_t read_skipped = 0;
  ReadOptions read_options;
  read_options.strictness = config.strictness;
  read_options.on_skip = [&](const Error& e) {
    ++read_skipped;
    std::cerr << "skipped input: " << e.what() << '\n';
  };

  std::unique_ptr<std::istream> file_in, conll_in;
  std::istream* in = &std::cin;
  if (o.in != "-") {
    file_in = std::make_unique<std::ifstream>(o.in);
    if (!*file_in) throw ConfigError("cannot open " + o.in);
    in = file_in.get();
  }
  std::function<std::optional<SentenceRecord>()> next;
  std::unique_ptr<JsonlReader> jsonl;
  std::unique_ptr<PtbConllReader> ptbconll;
  if (o.format == "jsonl") {
    jsonl = std::make_unique<JsonlReader>(*in, read_options);
    next = [&] { return jsonl->next(); };
  } else {
    if (o.conll.empty()) throw ConfigError("--format ptbconll needs --conll");
    conll_in = std::make_unique<std::ifstream>(o.conll);
    if (!*conll_in) throw ConfigError("cannot open " + o.conll);
    ptbconll = std::make_unique<PtbConllReader>(*in, *conll_in, read_options);
    next = [&] { return ptbconll->next(); };
  }

  std::unique_ptr<std::ofstream> trace;
  if (!o.trace.empty()) {
    trace = std::make_unique<std::ofstream>(o.trace);
    if (!*trace) throw ConfigError("cannot write " + o.trace);
  }

  RunSummary summary = run_pipeline(next, config, std::cout, std::cerr, trace.get());
  std::cout.flush();
  std::cerr << "sentences: " << summary.sentences << "  skipped: " << summary.skipped + read_skipped
            << "  tokens in: " << summary.tokens_in << "  tokens out: " << summary.tokens_out
            << "  reorder rules fired: " << summary.reorder_fired << "  folds: " << summary.folds
            << "  deletions: " << summary.deletions << '\n';
  if (unknown_subjects != 0) std::cerr << "warning: " << unknown_subjects << " subjects fell back to the default PNG atom\n";
  return 0;
}

void print_fraction(const std::string& key, double value) {
  std::cout << key << '\t' << std::fixed << std::setprecision(6) << value << '\t' << std::setprecision(2)
            << value * 100.0 << '\n';
}

std::pair<Corpus, Corpus> load_scoring_pair(const std::string& hyp, const std::string& ref, int factor) {
  std::optional<std::size_t> k;
  if (factor >= 0) k = static_cast<std::size_t>(factor);
  Corpus h, r;
  for (const auto& line : read_lines(hyp)) h.push_back(tokenize_for_scoring(line, k));
  for (const auto& line : read_lines(ref)) r.push_back(tokenize_for_scoring(line, k));
  return {std::move(h), std::move(r)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-side reordering, factorization and compounding for factored SMT"};
  app.require_subcommand(1);

  // preprocess
  InputOptions pre;
  std::string pre_reorder, pre_compound;
  auto* preprocess = app.add_subcommand("preprocess", "reorder -> factor -> compound -> integrate");
  add_input_options(preprocess, pre, "factored", {"factored", "plain", "jsonl"});
  preprocess->add_option("--reorder", pre_reorder, "reordering rule file");
  preprocess->add_option("--compound", pre_compound, "compounding rule file");
  preprocess->add_option("--png", pre.png, "PNG lexicon file (built-in default otherwise)");
  preprocess->add_option("--trace", pre.trace, "write the deletion trace as JSONL");
  preprocess->add_flag("--root-atom", pre.root_atom, "add a 'root' atom to one-token sentences");

  // reorder
  InputOptions reo;
  std::string reo_rules;
  auto* reorder = app.add_subcommand("reorder", "apply reordering rules");
  add_input_options(reorder, reo, "jsonl", {"jsonl", "plain"});
  reorder->add_option("--rules", reo_rules, "reordering rule file")->required();

  // factor
  InputOptions fac;
  auto* factor = app.add_subcommand("factor", "four-factor representation");
  add_input_options(factor, fac, "jsonl", {"jsonl", "factored", "plain"});
  factor->add_flag("--root-atom", fac.root_atom, "add a 'root' atom to one-token sentences");

  // compound
  InputOptions com;
  std::string com_rules;
  auto* compound = app.add_subcommand("compound", "fold function words into morphology and integrate");
  add_input_options(compound, com, "factored", {"factored", "plain"});
  compound->add_option("--rules", com_rules, "compounding rule file")->required();
  compound->add_option("--png", com.png, "PNG lexicon file (built-in default otherwise)");
  compound->add_option("--trace", com.trace, "write the deletion trace as JSONL");

  // score
  std::string hyp_path, ref_path, smooth = "none", mode = "surface";
  int score_factor = -1;
  std::size_t max_n = 4;
  auto* score = app.add_subcommand("score", "BLEU or METEOR against a reference");
  score->require_subcommand(1);
  auto* score_bleu = score->add_subcommand("bleu", "corpus BLEU");
  auto* score_meteor = score->add_subcommand("meteor", "exact-match METEOR");
  for (auto* s : {score_bleu, score_meteor}) {
    s->add_option("--hyp", hyp_path, "hypothesis file, one sentence per line")->required();
    s->add_option("--ref", ref_path, "reference file, one sentence per line")->required();
    s->add_option("--factor", score_factor, "score factor K of factored tokens (0-based)")->check(CLI::NonNegativeNumber);
  }
  score_bleu->add_option("--smooth", smooth, "smoothing for n >= 2")->check(CLI::IsMember({"none", "add1"}))->capture_default_str();
  score_bleu->add_option("--max-n", max_n, "highest n-gram order")->check(CLI::Range(1, 9))->capture_default_str();
  score_meteor->add_option("--mode", mode, "label for what is matched")->check(CLI::IsMember({"surface", "lemma"}))->capture_default_str();

  // stats
  std::string stats_in = "-";
  auto* stats = app.add_subcommand("stats", "sentence, token and per-factor vocabulary counts");
  stats->add_option("--in", stats_in, "corpus file, one sentence per line")->capture_default_str();

  // validate-rules
  std::string val_reorder, val_compound;
  auto* validate_rules = app.add_subcommand("validate-rules", "load rule files and print the normalized rules");
  validate_rules->add_option("--reorder", val_reorder, "reordering rule file");
  validate_rules->add_option("--compound", val_compound, "compounding rule file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*preprocess) {
      PipelineConfig config;
      if (!pre_reorder.empty()) {
        config.stages.push_back(Stage::Reorder);
        config.reorder_rules = load_reorder_rules(pre_reorder);
      }
      config.stages.push_back(Stage::Factor);
      if (!pre_compound.empty()) {
        config.stages.push_back(Stage::Compound);
        config.compound_rules = load_compound_rules(pre_compound);
      }
      return run_stages(pre, std::move(config));
    }
    if (*reorder) {
      PipelineConfig config;
      config.stages = {Stage::Reorder};
      config.reorder_rules = load_reorder_rules(reo_rules);
      return run_stages(reo, std::move(config));
    }
    if (*factor) {
      PipelineConfig config;
      config.stages = {Stage::Factor};
      return run_stages(fac, std::move(config));
    }
    if (*compound) {
      PipelineConfig config;
      config.stages = {Stage::Compound};
      config.compound_rules = load_compound_rules(com_rules);
      return run_stages(com, std::move(config));
    }
    if (*score_bleu) {
      auto [h, r] = load_scoring_pair(hyp_path, ref_path, score_factor);
      BleuOptions options;
      options.max_n = max_n;
      options.smoothing = smooth == "add1" ? Smoothing::AddOne : Smoothing::None;
      BleuReport rep = bleu(h, r, options);
      std::cout << "smoothing\t" << to_string(rep.smoothing) << '\n';
      print_fraction("bleu", rep.cumulative);
      for (std::size_t n = 1; n <= rep.precision.size(); ++n) {
        print_fraction("bleu-" + std::to_string(n), rep.precision[n - 1]);
      }
      print_fraction("brevity_penalty", rep.brevity_penalty);
      std::cout << "hyp_length\t" << rep.hyp_length << "\nref_length\t" << rep.ref_length << '\n';
      return 0;
    }
    if (*score_meteor) {
      auto [h, r] = load_scoring_pair(hyp_path, ref_path, score_factor);
      MeteorReport rep = meteor_lite(h, r, mode == "lemma" ? MatchMode::Lemma : MatchMode::Surface);
      std::cout << "mode\t" << to_string(rep.match_mode) << '\n';
      print_fraction("meteor", rep.score);
      print_fraction("precision", rep.precision);
      print_fraction("recall", rep.recall);
      print_fraction("f_mean", rep.f_mean);
      print_fraction("fragmentation_penalty", rep.fragmentation_penalty);
      std::cout << "matches\t" << rep.matches << "\nchunks\t" << rep.chunks << '\n';
      if (!rep.exhaustive) std::cerr << "warning: chunk search budget exhausted; chunk count may not be minimal\n";
      return 0;
    }
    if (*stats) {
      CorpusStats st = corpus_stats(read_lines(stats_in));
      std::cout << "sentences\t" << st.sentences << "\ntokens\t" << st.tokens << "\nmean_length\t" << std::fixed
                << std::setprecision(4) << st.mean_length << '\n';
      for (std::size_t k = 0; k < st.vocabulary.size(); ++k) {
        std::cout << "vocabulary_factor_" << k << '\t' << st.vocabulary[k] << '\n';
      }
      return 0;
    }
    if (*validate_rules) {
      if (val_reorder.empty() && val_compound.empty()) throw ConfigError("give --reorder and/or --compound");
      if (!val_reorder.empty()) {
        ReorderRuleSet rules = load_reorder_rules(val_reorder);
        for (const auto& r : rules.rules) std::cout << r.to_string() << '\n';
        std::cerr << val_reorder << ": " << rules.size() << " reordering rules OK\n";
      }
      if (!val_compound.empty()) {
        CompoundRuleSet rules = load_compound_rules(val_compound);
        for (const auto& rel : rules.inverted_relations) std::cout << "%invert " << rel << '\n';
        for (const auto& r : rules.rules) std::cout << r.to_string() << '\n';
        std::cerr << val_compound << ": " << rules.rules.size() << " compounding rules OK\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "preflect: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "preflect: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}

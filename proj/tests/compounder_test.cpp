#include <gtest/gtest.h>

#include "preflect/compounder.hpp"
#include "preflect/factorizer.hpp"
#include "support.hpp"

using namespace preflect;
namespace pt = preflect::testing;

namespace {

CompoundRuleSet default_rules() { return parse_compound_rules(pt::read_file(pt::data_path("rules/default.cr"))); }

std::vector<std::string> strings(const std::vector<FactoredToken>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(to_string(t));
  return out;
}

ErrorKind rules_error(const std::string& text) {
  try {
    parse_compound_rules(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorKind::FormatError;
}

AnnotatedSentence will_have_played() {
  return pt::make_sentence("aux",
                           {{{"He", "he", "PRP"}}, {{"will", "will", "MD"}}, {{"have", "have", "VB"}},
                            {{"played", "play", "VBN"}}},
                           "(S (NP (PRP He)) (VP (MD will) (VP (VB have) (VP (VBN played)))))",
                           {{"nsubj", 3, 0}, {"aux", 3, 1}, {"aux", 3, 2}, {"root", -1, 3}});
}

}  // namespace

TEST(ExtractPng, PronounsAndTags) {
  EXPECT_EQ(extract_png(Token{0, "I", "I", "PRP"}), "1s");
  EXPECT_EQ(extract_png(Token{0, "She", "she", "PRP"}), "3sf");
  EXPECT_EQ(extract_png(Token{0, "they", "they", "PRP"}), "3p");
  EXPECT_EQ(extract_png(Token{0, "you", "you", "PRP"}), "2s");
  EXPECT_EQ(extract_png(Token{0, "cats", "cat", "NNS"}), "3p");
  EXPECT_EQ(extract_png(Token{0, "Arthi", "Arthi", "NNP"}), "3s");
}

TEST(ExtractPng, FallbackIsReported) {
  PngLexicon lex;
  int unknown = 0;
  lex.on_unknown = [&](const Token&) { ++unknown; };
  EXPECT_EQ(lex.lookup(Token{0, "this", "this", "DT"}), "3s");
  EXPECT_EQ(unknown, 1);
}

TEST(PngLexicon, ParseOverridesDefaults) {
  PngLexicon lex = PngLexicon::parse("// custom\nyou 2p\n@NN 3sn\n@default 3p\n");
  EXPECT_EQ(lex.lookup(Token{0, "You", "you", "PRP"}), "2p");
  EXPECT_EQ(lex.lookup(Token{0, "dog", "dog", "NN"}), "3sn");
  EXPECT_EQ(lex.lookup(Token{0, "this", "this", "DT"}), "3p");
  EXPECT_EQ(lex.lookup(Token{0, "I", "I", "PRP"}), "1s");
  EXPECT_THROW(PngLexicon::parse("you 4x\n"), Error);
  EXPECT_THROW(PngLexicon::parse("you\n"), Error);
}

TEST(PngLexicon, ShippedFileMatchesDefaults) {
  PngLexicon shipped = PngLexicon::parse(pt::read_file(pt::data_path("lexicon/png.lex")));
  EXPECT_EQ(shipped.words(), PngLexicon().words());
}

TEST(ParseCompoundRules, DefaultFile) {
  CompoundRuleSet rs = default_rules();
  ASSERT_EQ(rs.rules.size(), 5u);
  EXPECT_EQ(rs.inverted_relations, std::vector<std::string>{"pobj"});
  EXPECT_EQ(rs.rules[0].to_string(), "R-PREP: pobj dep_pos=IN,TO -> HEAD FOLD_SURFACE delete");
  EXPECT_EQ(rs.rules[3].action, FoldAction::Png);
  EXPECT_FALSE(rs.rules[3].delete_dependent);
}

TEST(ParseCompoundRules, Errors) {
  EXPECT_EQ(rules_error("R1 pobj -> HEAD FOLD_SURFACE"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: pobj -> UP FOLD_SURFACE"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: pobj -> HEAD FOLD_WORD"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: pobj -> HEAD FOLD_SURFACE remove"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: pobj dep_pos=IN -> HEAD FOLD_SURFACE\nR1: aux -> HEAD FOLD_TAG"),
            ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: nsubj dep_pos=PRP -> HEAD FOLD_PNG delete"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: pobj -> HEAD FOLD_SURFACE delete"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: dobj dep_pos=NN -> HEAD FOLD_SURFACE delete"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("%reverse pobj"), ErrorKind::BadCompoundRule);
  EXPECT_EQ(rules_error("R1: det dep_pos=DT -> HEAD FOLD_SURFACE delete\n"
                        "R2: amod head_pos=DT -> HEAD FOLD_TAG"),
            ErrorKind::DanglingTarget);
}

TEST(ParseCompoundRules, AuxiliaryMayDeleteVerbs) {
  EXPECT_NO_THROW(parse_compound_rules("R1: aux dep_pos=VB -> HEAD FOLD_SURFACE delete"));
}

TEST(Compound, WorkedExample) {
  auto s = pt::worked_example();
  CompoundResult r = compound_sentence(factorize_sentence(s), s, default_rules());
  EXPECT_EQ(strings(r.tokens()),
            (std::vector<std::string>{"i|i|PRP|PRP_nsubj", "bought|buy|V|VBD_1s", "vegetables|vegetable|N|NNS_dobj",
                                      "my|my|PRP|PRP$_poss", "home|home|N|NN_pobj_to"}));
  ASSERT_EQ(r.deletions.size(), 1u);
  EXPECT_EQ(r.deletions[0], (Deletion{3, 5, "to", "R-PREP"}));
  EXPECT_EQ(r.folds, 2u);
}

TEST(Compound, PrepositionOnly) {
  auto s = pt::worked_example();
  CompoundRuleSet rs = parse_compound_rules("%invert pobj\nR-PREP: pobj dep_pos=TO,IN -> HEAD FOLD_SURFACE delete\n");
  CompoundResult r = compound_sentence(factorize_sentence(s), s, rs);
  EXPECT_EQ(to_line(r.tokens()),
            "i|i|PRP|PRP_nsubj bought|buy|V|VBD vegetables|vegetable|N|NNS_dobj my|my|PRP|PRP$_poss "
            "home|home|N|NN_pobj_to");
}

TEST(Compound, AuxiliariesFoldInSentenceOrder) {
  auto s = will_have_played();
  CompoundResult r = compound_sentence(factorize_sentence(s), s, default_rules());
  EXPECT_EQ(to_line(r.tokens()), "he|he|PRP|PRP_nsubj played|play|V|VBN_3sm_will_have");
  EXPECT_EQ(r.deletions.size(), 2u);
}

TEST(Compound, EmptyRuleSetIsIdentity) {
  auto s = pt::worked_example();
  auto f = factorize_sentence(s);
  CompoundResult r = compound_sentence(f, s, CompoundRuleSet{});
  EXPECT_EQ(strings(r.tokens()), strings(f));
  EXPECT_TRUE(r.deletions.empty());
}

TEST(Compound, SecondPassIsNoOp) {
  auto s = will_have_played();
  CompoundResult first = compound_sentence(factorize_sentence(s), s, default_rules());
  CompoundResult second = compound(first.state, default_rules());
  EXPECT_EQ(strings(second.tokens()), strings(first.tokens()));
  EXPECT_TRUE(second.deletions.empty());
}

TEST(Compound, HeadOfHeadFallsThroughAtRoot) {
  auto s = pt::worked_example();
  CompoundRuleSet rs = parse_compound_rules(
      "R-UP: nsubj -> HEAD_OF_HEAD FOLD_TAG\n"
      "R-HERE: nsubj -> HEAD FOLD_TAG\n"
      "R-POSS: poss -> HEAD_OF_HEAD FOLD_TAG\n");
  CompoundResult r = compound_sentence(factorize_sentence(s), s, rs);
  // bought is the root, so R-UP cannot fire and R-HERE does; home's head is to.
  EXPECT_EQ(to_line(r.tokens()),
            "i|i|PRP|PRP_nsubj bought|buy|V|VBD_PRP vegetables|vegetable|N|NNS_dobj to|to|PRE|TO_prep_PRP$ "
            "my|my|PRP|PRP$_poss home|home|N|NN_pobj");
}

TEST(Compound, RuntimeDanglingTarget) {
  auto s = pt::worked_example();
  // Deletes "to" while another rule folds onto it through the un-inverted pobj edge.
  CompoundRuleSet rs = parse_compound_rules(
      "R-DEL: prep dep_pos=TO -> HEAD FOLD_SURFACE delete\n"
      "R-ON: pobj -> HEAD FOLD_TAG\n");
  try {
    compound_sentence(factorize_sentence(s), s, rs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingTarget);
  }
}

TEST(Compound, MisalignedFactorsAreRejected) {
  auto s = pt::worked_example();
  auto f = factorize_sentence(s);
  f.pop_back();
  try {
    compound_sentence(f, s, default_rules());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(Integrate, AppliesPermutationToSurvivors) {
  auto s = pt::worked_example();
  CompoundResult r = compound_sentence(factorize_sentence(s), s, default_rules());
  auto out = integrate(r.tokens(), {0, 4, 5, 3, 2, 1}, r.deletions);
  std::vector<std::string> words;
  for (const auto& t : out) words.push_back(t.surface);
  EXPECT_EQ(text::join(words, " "), "I my home vegetables bought");
}

TEST(Integrate, RejectsBadInput) {
  auto s = pt::worked_example();
  CompoundResult r = compound_sentence(factorize_sentence(s), s, default_rules());
  auto kind = [&](const std::vector<TokenIndex>& perm, const std::vector<Deletion>& dels) {
    try {
      integrate(r.tokens(), perm, dels);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::FormatError;
  };
  EXPECT_EQ(kind({0, 1, 2, 3, 4, 4}, r.deletions), ErrorKind::PermutationMismatch);
  EXPECT_EQ(kind({0, 1, 2, 3, 4}, r.deletions), ErrorKind::PermutationMismatch);
  EXPECT_EQ(kind({0, 1, 2, 3, 4, 5}, {}), ErrorKind::PermutationMismatch);
}

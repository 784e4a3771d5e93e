#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fnmt/corpus.hpp"
#include "fnmt/error.hpp"
#include "fnmt/morphology.hpp"

using namespace fnmt;
using namespace fnmt::morph;

namespace {

MorphLexicon from_text(const std::string& text) {
  std::istringstream in(text);
  return MorphLexicon::parse(in, "fixture");
}

MorphLexicon french() { return MorphLexicon::load(FNMT_TEST_DATA_DIR "/french_lexicon.tsv"); }

}  // namespace

TEST(FactorTag, CanonicalFiveSymbols) {
  FactorTag t = FactorTag::parse("vP3#s");
  EXPECT_EQ(t.pos(), 'v');
  EXPECT_EQ(t.slot(FactorTag::kTense), 'P');
  EXPECT_EQ(t.slot(FactorTag::kPerson), '3');
  EXPECT_EQ(t.slot(FactorTag::kGender), '#');
  EXPECT_EQ(t.number(), 's');
  EXPECT_EQ(t.str(), "vP3#s");
  EXPECT_EQ(FactorTag::irrelevant().str(), "#####");
}

TEST(FactorTag, RejectsWrongLengthOrSymbols) {
  EXPECT_FALSE(FactorTag::try_parse("vP3#"));
  EXPECT_FALSE(FactorTag::try_parse("vP3#ss"));
  EXPECT_FALSE(FactorTag::try_parse("vP 3s"));
  EXPECT_THROW(FactorTag::parse(""), ParseError);
}

TEST(FactorTag, DeclaredSchemaIsClosed) {
  TagSchema schema({SlotSpec{"pos", "nv"}, {"tense", "P"}, {"person", "3"}, {"gender", "mf"},
                    {"number", "sp"}});
  EXPECT_TRUE(schema.try_parse("vP3#s"));
  EXPECT_TRUE(schema.try_parse("#####"));
  EXPECT_FALSE(schema.try_parse("vP2#s"));
  EXPECT_FALSE(schema.try_parse("aP3#s"));
}

TEST(FactorTag, ParseRenderRoundTripOverAlphabets) {
  const std::string alphabet = "nvP3#sm";
  for (char a : alphabet)
    for (char b : alphabet)
      for (char c : alphabet) {
        const std::string text = {a, b, c, '#', b};
        EXPECT_EQ(FactorTag::parse(text).str(), text);
        EXPECT_EQ(FactorTag::parse(FactorTag::parse(text).str()), FactorTag::parse(text));
      }
}

TEST(LoadLexicon, SingleEntry) {
  auto lex = from_text("devient\tdevenir\tvP3#s\n");
  EXPECT_EQ(lex.size(), 1u);
  EXPECT_FALSE(lex.schema().declared());
}

TEST(LoadLexicon, EmptyFileIsValid) {
  auto lex = from_text("");
  EXPECT_TRUE(lex.empty());
}

TEST(LoadLexicon, ConflictingGenerativeEntriesListLines) {
  try {
    from_text("actualisée\tactualiser\tvKf#s\nfoo\tbar\tn##fs\nactualisee\tactualiser\tvKf#s\n");
    FAIL() << "expected ConsistencyError";
  } catch (const ConsistencyError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  }
}

TEST(LoadLexicon, MalformedLinesNameTheLine) {
  try {
    from_text("devient\tdevenir\tvP3#s\nbroken line\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("fixture:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(from_text("a\tb\tvP3\n"), ParseError);
  EXPECT_THROW(from_text("a\tb\tvP3#s\tmany\n"), ParseError);
  EXPECT_THROW(from_text("#slot pos nv\n"), ParseError);  // needs five slots
  EXPECT_THROW(from_text("#slot a n\n#slot b P\n#slot c 3\n#slot d m\n#slot e s\nx\ty\tvP3#s\n"),
               ParseError);  // v is not a declared POS
  EXPECT_THROW(MorphLexicon::load("/nonexistent/lexicon.tsv"), IoError);
}

TEST(LoadLexicon, DuplicateIdenticalTriplesCollapse) {
  auto lex = from_text("devient\tdevenir\tvP3#s\ndevient\tdevenir\tvP3#s\n");
  EXPECT_EQ(lex.size(), 1u);
}

TEST(Factorize, PaperExample) {
  auto lex = french();
  auto a = lex.factorize("devient");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->lemma, "devenir");
  EXPECT_EQ(a->tag.str(), "vP3#s");
  EXPECT_FALSE(lex.factorize("inconnu"));
}

TEST(Reconstruct, PaperExamples) {
  auto lex = french();
  EXPECT_EQ(lex.reconstruct("devenir", FactorTag::parse("vP3#s")), "devient");
  EXPECT_EQ(lex.reconstruct("actualiser", FactorTag::parse("vK#fs")), "actualisée");
}

TEST(Reconstruct, FallbackChain) {
  auto lex = french();
  // (devenir, imperfect 3sg) is absent: POS+number agreement picks the most
  // frequent singular verb form.
  auto r = lex.reconstruct_traced("devenir", FactorTag::parse("vI3#s"));
  EXPECT_EQ(r.via, Generation::kPosAndNumber);
  EXPECT_EQ(r.word, "devient");
  // Plural verb forms of devenir do not exist: any form, most frequent.
  r = lex.reconstruct_traced("devenir", FactorTag::parse("vP3#p"));
  EXPECT_EQ(r.via, Generation::kAnyForm);
  EXPECT_EQ(r.word, "devient");
  // Among plural participles of actualiser the most frequent wins.
  r = lex.reconstruct_traced("actualiser", FactorTag::parse("vI3#p"));
  EXPECT_EQ(r.via, Generation::kPosAndNumber);
  EXPECT_EQ(r.word, "actualisés");
  r = lex.reconstruct_traced("inconnu", FactorTag::parse("n##ms"));
  EXPECT_EQ(r.via, Generation::kLemmaItself);
  EXPECT_EQ(r.word, "inconnu");
}

TEST(Reconstruct, FrequencyTieBreaksLexicographically) {
  auto lex = from_text("zeta\tx\tn##ms\nalpha\tx\tn##fs\n");
  EXPECT_EQ(lex.reconstruct("x", FactorTag::parse("n##mp")), "alpha");
}

TEST(RoundTrip, FrenchFixture) {
  auto lex = french();
  for (const auto& e : lex.entries()) {
    auto a = lex.factorize(e.word);
    ASSERT_TRUE(a) << e.word;
    EXPECT_EQ(lex.reconstruct(a->lemma, a->tag), e.word);
  }
}

TEST(RoundTrip, GeneratedLexicon) {
  corpus::SyntheticLanguageSpec spec;
  spec.lemma_count = 300;
  spec.train_sentences = 50;
  spec.valid_sentences = 5;
  spec.test_sentences = 5;
  auto data = corpus::generate_synthetic(spec);
  ASSERT_GT(data.lexicon.size(), 1000u);
  for (const auto& e : data.lexicon.entries()) {
    auto a = data.lexicon.factorize(e.word);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->lemma, e.lemma);
    EXPECT_EQ(a->tag, e.tag);
    EXPECT_EQ(data.lexicon.reconstruct(a->lemma, a->tag), e.word);
  }
}

TEST(GeneratableWords, ShortlistExpandsVocabulary) {
  auto lex = french();
  std::set<std::string> lemmas;
  for (const auto& e : lex.entries()) lemmas.insert(e.lemma);
  std::vector<std::string> shortlist;
  for (const auto& l : lemmas) {
    shortlist.push_back(l);
    EXPECT_GE(lex.generatable_words(shortlist).size(), shortlist.size());
  }
  EXPECT_EQ(lex.generatable_words({"version"}), (std::vector<std::string>{"version", "versions"}));
  EXPECT_EQ(lex.generatable_words({"?"}), (std::vector<std::string>{"?"}));
}

TEST(FactorizeCorpus, LengthsAndOovPolicy) {
  auto lex = french();
  std::vector<Sentence> corpus = {{"la", "version", "devient"}, {"la", "lignée", "xyz", "."}};
  FactorizeReport report;
  auto out = factorize_corpus(corpus, lex, OovPolicy::kPassThrough, &report);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].lemmas, (std::vector<std::string>{"le", "version", "devenir"}));
  EXPECT_EQ(out[0].tags.size(), 3u);
  EXPECT_EQ(out[1].lemmas[2], "xyz");
  EXPECT_EQ(out[1].tags[2].str(), "#####");
  EXPECT_EQ(out[1].lemmas[3], ".");
  EXPECT_EQ(report.tokens, 7u);
  EXPECT_EQ(report.oov_tokens, 2u);
  EXPECT_EQ(format_factored(out[0]), "le|d##fs version|n##fs devenir|vP3#s");
  EXPECT_THROW(factorize_corpus(corpus, lex, OovPolicy::kReject), DataError);
}

TEST(FactorizeCorpus, SyntheticRoundTripSweep) {
  corpus::SyntheticLanguageSpec spec;
  spec.lemma_count = 80;
  spec.train_sentences = 200;
  auto data = corpus::generate_synthetic(spec);
  auto factored = factorize_corpus(data.train.target, data.lexicon);
  for (std::size_t i = 0; i < factored.size(); ++i) {
    ASSERT_EQ(factored[i].lemmas.size(), data.train.target[i].size());
    ASSERT_EQ(factored[i].tags.size(), factored[i].lemmas.size());
    EXPECT_EQ(reconstruct_sentence(factored[i], data.lexicon), data.train.target[i]);
  }
}

TEST(FactoredFormat, ParsesAtLastBar) {
  auto s = parse_factored("a|b|n##fs de|p####");
  EXPECT_EQ(s.lemmas, (std::vector<std::string>{"a|b", "de"}));
  EXPECT_EQ(format_factored(s), "a|b|n##fs de|p####");
  EXPECT_THROW(parse_factored("nobar"), ParseError);
  EXPECT_THROW(parse_factored("x|toolong"), ParseError);
}

TEST(Lexicon, FingerprintIgnoresOrder) {
  auto a = from_text("a\tx\tn##ms\nb\tx\tn##fs\n");
  auto b = from_text("b\tx\tn##fs\na\tx\tn##ms\n");
  auto c = from_text("a\tx\tn##ms\n");
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
  auto round = from_text(french().to_tsv());
  EXPECT_EQ(round.fingerprint(), french().fingerprint());
  EXPECT_TRUE(round.schema().declared());
}

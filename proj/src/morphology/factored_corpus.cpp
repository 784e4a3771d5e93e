#include <sstream>

#include "fnmt/error.hpp"
#include "fnmt/morphology.hpp"

namespace fnmt::morph {

std::string FactorizeReport::to_text() const {
  std::ostringstream out;
  out << "sentences: " << sentences << '\n'
      << "tokens: " << tokens << '\n'
      << "oov_tokens: " << oov_tokens << '\n';
  return out.str();
}

FactoredSentence factorize_sentence(const Sentence& words, const MorphLexicon& lexicon,
                                    OovPolicy policy, std::size_t* oov_count) {
  FactoredSentence out;
  out.lemmas.reserve(words.size());
  out.tags.reserve(words.size());
  for (const auto& w : words) {
    if (auto a = lexicon.factorize(w)) {
      out.lemmas.push_back(a->lemma);
      out.tags.push_back(a->tag);
      continue;
    }
    if (policy == OovPolicy::kReject) throw DataError("word '" + w + "' is not in the lexicon");
    if (oov_count) ++*oov_count;
    out.lemmas.push_back(w);
    out.tags.push_back(FactorTag::irrelevant());
  }
  return out;
}

std::vector<FactoredSentence> factorize_corpus(const std::vector<Sentence>& corpus,
                                               const MorphLexicon& lexicon, OovPolicy policy,
                                               FactorizeReport* report) {
  std::vector<FactoredSentence> out;
  out.reserve(corpus.size());
  std::size_t oov = 0, tokens = 0;
  for (const auto& s : corpus) {
    out.push_back(factorize_sentence(s, lexicon, policy, &oov));
    tokens += s.size();
  }
  if (report) *report = FactorizeReport{corpus.size(), tokens, oov};
  return out;
}

Sentence reconstruct_sentence(const FactoredSentence& sentence, const MorphLexicon& lexicon) {
  Sentence words;
  words.reserve(sentence.lemmas.size());
  for (std::size_t i = 0; i < sentence.lemmas.size(); ++i) {
    words.push_back(lexicon.reconstruct(sentence.lemmas[i], sentence.tags[i]));
  }
  return words;
}

std::string format_factored(const FactoredSentence& sentence) {
  std::string out;
  for (std::size_t i = 0; i < sentence.lemmas.size(); ++i) {
    if (i) out += ' ';
    out += sentence.lemmas[i];
    out += '|';
    out += sentence.tags[i].str();
  }
  return out;
}

FactoredSentence parse_factored(std::string_view line, const TagSchema& schema) {
  FactoredSentence out;
  for (const auto& token : split_tokens(line)) {
    const auto bar = token.rfind('|');
    if (bar == std::string::npos || bar == 0) {
      throw ParseError("factored token '" + token + "' is not lemma|tag");
    }
    out.lemmas.push_back(token.substr(0, bar));
    out.tags.push_back(schema.parse(std::string_view(token).substr(bar + 1)));
  }
  return out;
}

std::vector<FactoredSentence> read_factored_corpus(const std::filesystem::path& path,
                                                   const TagSchema& schema) {
  std::vector<FactoredSentence> corpus;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    try {
      corpus.push_back(parse_factored(line, schema));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace fnmt::morph

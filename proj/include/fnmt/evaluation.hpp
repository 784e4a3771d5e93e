#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "fnmt/checkpoint.hpp"
#include "fnmt/morphology.hpp"
#include "fnmt/text_io.hpp"

namespace fnmt::eval {

struct BleuStats {
  std::array<std::size_t, 4> matches{};  // clipped n-gram matches, n = 1..4
  std::array<std::size_t, 4> totals{};   // hypothesis n-grams
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  double precision(std::size_t n, bool smooth = false) const;  // n in 1..4
  double brevity_penalty() const;
  double score(bool smooth = false) const;  // percentage
};

// Corpus statistics over aligned sentences. Throws ContractError on an empty
// corpus or differing sentence counts.
BleuStats bleu_stats(const std::vector<Sentence>& hypotheses,
                     const std::vector<Sentence>& references);

// Corpus BLEU (4-gram, brevity penalty) as a percentage. `smooth` adds one
// to the numerator and denominator of the 2..4-gram precisions.
double bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
            bool smooth = false);

std::size_t count_oov(const std::vector<Sentence>& hypotheses);

// Percentage of corpus tokens contained in `vocabulary`. Throws
// ContractError when the vocabulary is empty or the corpus has no tokens.
double coverage(const std::vector<Sentence>& corpus,
                const std::unordered_set<std::string>& vocabulary);

// Words an output layer can produce: the shortlist itself for word-level
// models, every form the lexicon generates from the lemma shortlist otherwise.
std::unordered_set<std::string> effective_vocabulary(const model::Checkpoint& checkpoint,
                                                     const morph::MorphLexicon* lexicon);

// Hypothesis lemmas re-inflected with the reference tag at the same
// position (hypothesis tag past the end of the reference), scored against
// the reconstructed references.
std::vector<Sentence> oracle_words(const std::vector<morph::FactoredSentence>& hypotheses,
                                   const std::vector<morph::FactoredSentence>& references,
                                   const morph::MorphLexicon& lexicon);
double oracle_word_bleu(const std::vector<morph::FactoredSentence>& hypotheses,
                        const std::vector<morph::FactoredSentence>& references,
                        const morph::MorphLexicon& lexicon, bool smooth = false);

struct EvalReport {
  double bleu_word = 0.0;
  std::optional<double> bleu_lemma;
  std::optional<double> bleu_factors;
  std::size_t oov_count = 0;
  std::optional<double> coverage;
  std::optional<double> oracle_bleu_word;

  // Aligned `key: value` lines.
  std::string to_text() const;
  // One JSON object.
  std::string to_json() const;
};

struct EvalInputs {
  const std::vector<Sentence>* hypotheses = nullptr;
  const std::vector<Sentence>* references = nullptr;
  // Lemma/factor streams of the hypotheses and references.
  const std::vector<morph::FactoredSentence>* hypothesis_factors = nullptr;
  const std::vector<morph::FactoredSentence>* reference_factors = nullptr;
  const morph::MorphLexicon* lexicon = nullptr;
  const std::unordered_set<std::string>* vocabulary = nullptr;
  bool smooth = false;
};

// Throws DataError naming both counts when the inputs are not aligned.
EvalReport evaluate(const EvalInputs& inputs);

}  // namespace fnmt::eval

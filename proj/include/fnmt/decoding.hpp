#pragma once

#include <span>
#include <string>
#include <vector>

#include "fnmt/checkpoint.hpp"
#include "fnmt/model.hpp"
#include "fnmt/morphology.hpp"

namespace fnmt::decoding {

struct BeamConfig {
  std::size_t beam_size = 12;
  // Candidates taken from each head before the cross product; 0 means
  // beam_size.
  std::size_t per_head = 0;
  std::size_t max_length = 100;
  // Rank finished hypotheses by score / length instead of raw score.
  bool normalize = true;

  std::size_t candidates() const { return per_head == 0 ? beam_size : per_head; }
  void validate() const;
};

/// Parallel lemma and factor ids; a finished hypothesis ends with the EOS
/// lemma (and the factor scored alongside it).
struct Hypothesis {
  std::vector<int> lemmas;
  std::vector<int> factors;
  double score = 0.0;  // Σ log p(lemma) + log p(factor)
  bool finished = false;

  std::size_t length() const { return lemmas.size(); }
  double ranking_score(bool normalize) const;
  // Ids without the trailing EOS position.
  std::vector<int> output_lemmas() const;
  std::vector<int> output_factors() const;
};

// Better hypothesis first: higher ranking score, then lexicographically
// smaller (lemmas, factors).
bool ranks_before(const Hypothesis& a, const Hypothesis& b, bool normalize);

struct BeamResult {
  std::vector<Hypothesis> hypotheses;  // best first
  // No hypothesis finished; `hypotheses` holds the best unfinished ones.
  bool unfinished = false;

  const Hypothesis& best() const { return hypotheses.front(); }
};

// Source ids as produced by encode_sentence (EOS included). Throws
// ContractError on an empty source.
Hypothesis greedy_decode(const model::Model& model, std::span<const int> source,
                         std::size_t max_length = 100);
BeamResult beam_decode(const model::Model& model, std::span<const int> source,
                       const BeamConfig& config);

// Joint log-probability of a (lemma, factor) sequence under teacher forcing.
double score_sequence(const model::Model& model, std::span<const int> source,
                      std::span<const int> lemmas, std::span<const int> factors);

struct Translation {
  Sentence words;
  morph::FactoredSentence factored;  // lemma and tag per output word
  double score = 0.0;
  bool unfinished = false;
  // Surface words of every returned hypothesis, best first.
  std::vector<std::pair<double, Sentence>> nbest;
};

// Beam search followed by word reconstruction; an empty source yields an
// empty translation. Word-level checkpoints emit
// their lemma stream directly; `lexicon` may then be null.
Translation translate(const model::Checkpoint& checkpoint, const Sentence& source,
                      const morph::MorphLexicon* lexicon, const BeamConfig& config);

// Translates every sentence, optionally over `workers` threads; results are
// in input order and independent of the worker count.
std::vector<Translation> translate_corpus(const model::Checkpoint& checkpoint,
                                          const std::vector<Sentence>& source,
                                          const morph::MorphLexicon* lexicon,
                                          const BeamConfig& config, std::size_t workers = 1);

// `index ||| score ||| words` lines.
std::string format_nbest(const std::vector<Translation>& translations);

}  // namespace fnmt::decoding

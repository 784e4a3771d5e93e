#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fnmt/morphology.hpp"
#include "fnmt/text_io.hpp"

namespace fnmt::corpus {

inline constexpr int kUnk = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr std::size_t kReserved = 3;
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

/// Token <-> index bijection over the reserved tokens followed by a
/// frequency-ranked shortlist.
class Vocabulary {
 public:
  Vocabulary();

  // Keeps the `shortlist` most frequent tokens, ties broken lexicographically.
  static Vocabulary build(const std::vector<Sentence>& corpus, std::size_t shortlist);
  // Every distinct token (closed classes such as factor tags).
  static Vocabulary build_full(const std::vector<Sentence>& corpus);
  // Rebuilds from the non-reserved tokens in index order.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t shortlist_size() const { return tokens_.size() - kReserved; }
  bool contains(std::string_view token) const;
  int index(std::string_view token) const;  // kUnk when absent
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  // Non-reserved tokens in index order.
  std::vector<std::string> shortlist() const;
  std::uint64_t fingerprint() const;

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Token ids followed by EOS. Throws ContractError on an empty sentence.
std::vector<int> encode_sentence(const Sentence& tokens, const Vocabulary& vocab);
// Tokens up to (excluding) the first EOS.
Sentence decode_ids(const std::vector<int>& ids, const Vocabulary& vocab);

/// Row-major id matrix with a prefix-style 0/1 mask, one row per sentence.
struct IndexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> ids;
  std::vector<double> mask;

  int at(std::size_t r, std::size_t c) const { return ids[r * cols + c]; }
  double mask_at(std::size_t r, std::size_t c) const { return mask[r * cols + c]; }
  std::vector<int> column(std::size_t c) const;
  std::vector<double> mask_column(std::size_t c) const;
  std::size_t length(std::size_t r) const;
};

struct Batch {
  IndexMatrix source;
  IndexMatrix lemmas;
  IndexMatrix factors;  // same shape and mask as lemmas
  std::vector<std::size_t> sentence_ids;

  std::size_t size() const { return source.rows; }
  double target_tokens() const;
};

// Pads to the longest sequence with EOS ids under a zero mask.
IndexMatrix pad_sequences(const std::vector<std::vector<int>>& sequences);

struct ParallelExample {
  Sentence source;
  morph::FactoredSentence target;
};

struct TargetVocabularies {
  const Vocabulary* lemmas = nullptr;
  // nullptr selects a single-class factor stream (every factor id 0).
  const Vocabulary* factors = nullptr;
};

struct DropReport {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t dropped_too_long = 0;
  std::size_t dropped_empty = 0;
  std::size_t max_len = 0;

  std::string to_text() const;
};

struct BatchPlan {
  std::vector<Batch> batches;
  DropReport report;
};

// Drops pairs where either side exceeds max_len tokens, sorts by length and
// slices into batches of at most batch_size.
BatchPlan make_batches(const std::vector<ParallelExample>& corpus, const Vocabulary& source_vocab,
                       const TargetVocabularies& target, std::size_t batch_size,
                       std::size_t max_len);

Batch make_batch(const std::vector<ParallelExample>& examples,
                 const std::vector<std::size_t>& members, const Vocabulary& source_vocab,
                 const TargetVocabularies& target);

// ---------------------------------------------------------------------------
// Synthetic toy language

struct SyntheticLanguageSpec {
  std::size_t lemma_count = 200;
  std::array<morph::SlotSpec, morph::kSlotCount> slots{{
      {"pos", "nva"},
      {"tense", "PIF"},
      {"person", "123"},
      {"gender", "mf"},
      {"number", "sp"},
  }};
  // POS symbols inflecting for tense and person; the others inflect for gender.
  std::string verbal_pos = "v";
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  std::size_t train_sentences = 1000;
  std::size_t valid_sentences = 100;
  std::size_t test_sentences = 100;
  // Lemma frequencies follow rank^-zipf_exponent.
  double zipf_exponent = 1.0;
  // Share of (lemma, tag) pairs never used in training sentences.
  double held_out_fraction = 0.15;
  std::uint64_t seed = 1;
};

struct ParallelText {
  std::vector<Sentence> source;
  std::vector<Sentence> target;
};

struct SyntheticData {
  ParallelText train;
  ParallelText valid;
  ParallelText test;
  morph::MorphLexicon lexicon;
};

SyntheticData generate_synthetic(const SyntheticLanguageSpec& spec);

// Pairs source sentences with factorized targets. Throws DataError when the
// sides have different sentence counts.
std::vector<ParallelExample> make_parallel(const std::vector<Sentence>& source,
                                           const std::vector<Sentence>& target_words,
                                           const morph::MorphLexicon& lexicon);
// Word-level targets: each word is its own "lemma" with an all-'#' tag.
std::vector<ParallelExample> make_parallel_words(const std::vector<Sentence>& source,
                                                 const std::vector<Sentence>& target_words);

}  // namespace fnmt::corpus

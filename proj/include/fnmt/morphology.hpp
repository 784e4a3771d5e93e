#pragma once

// Word <-> (lemma, factor tag) conversion backed by a lexicon of triples.
//
// Lexicon TSV:
//   #slot <name> <alphabet>          optional, five lines, in slot order
//   word<TAB>lemma<TAB>tag[<TAB>frequency]
//
// Factored corpus: one sentence per line, tokens `lemma|tag`.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fnmt/text_io.hpp"

namespace fnmt::morph {

inline constexpr std::size_t kSlotCount = 5;
inline constexpr char kIrrelevant = '#';

/// Positional grammatical tag: POS, tense, person, gender, number.
class FactorTag {
 public:
  enum Slot : std::size_t { kPos = 0, kTense, kPerson, kGender, kNumber };

  FactorTag() { symbols_.fill(kIrrelevant); }
  explicit FactorTag(std::array<char, kSlotCount> symbols) : symbols_(symbols) {}

  /// Accepts exactly five printable, non-space ASCII symbols.
  static std::optional<FactorTag> try_parse(std::string_view text);
  /// As try_parse, throwing ParseError.
  static FactorTag parse(std::string_view text);
  static FactorTag irrelevant() { return FactorTag(); }

  char slot(std::size_t i) const { return symbols_.at(i); }
  char pos() const { return symbols_[kPos]; }
  char number() const { return symbols_[kNumber]; }
  std::string str() const { return std::string(symbols_.begin(), symbols_.end()); }

  auto operator<=>(const FactorTag&) const = default;

 private:
  std::array<char, kSlotCount> symbols_;
};

struct SlotSpec {
  std::string name;
  std::string alphabet;  // '#' is always accepted in addition
};

/// Closed per-slot alphabets. The default schema accepts any printable
/// symbol in every slot; a lexicon header narrows it.
class TagSchema {
 public:
  TagSchema() = default;
  explicit TagSchema(std::array<SlotSpec, kSlotCount> slots);

  bool declared() const { return declared_; }
  const std::array<SlotSpec, kSlotCount>& slots() const { return slots_; }
  bool accepts(const FactorTag& tag) const;
  std::optional<FactorTag> try_parse(std::string_view text) const;
  FactorTag parse(std::string_view text) const;

 private:
  std::array<SlotSpec, kSlotCount> slots_{};
  bool declared_ = false;
};

struct LexEntry {
  std::string word;
  std::string lemma;
  FactorTag tag;
  double frequency = 0.0;
};

struct Analysis {
  std::string lemma;
  FactorTag tag;

  bool operator==(const Analysis&) const = default;
};

/// Which step of the generation fallback chain produced a word.
enum class Generation {
  kExact,          // (lemma, tag) listed
  kPosAndNumber,   // same lemma, tag agreeing on POS and number
  kAnyForm,        // same lemma, any tag
  kLemmaItself,    // lemma unknown to the lexicon
};

struct Reconstruction {
  std::string word;
  Generation via;
};

class MorphLexicon {
 public:
  MorphLexicon() = default;

  static MorphLexicon load(const std::filesystem::path& path);
  // `origin` names the source in diagnostics.
  static MorphLexicon parse(std::istream& in, std::string_view origin = "<lexicon>");
  static MorphLexicon from_entries(std::vector<LexEntry> entries, TagSchema schema = {});

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<LexEntry>& entries() const { return entries_; }
  const TagSchema& schema() const { return schema_; }

  std::optional<Analysis> factorize(std::string_view word) const;
  std::string reconstruct(std::string_view lemma, const FactorTag& tag) const {
    return reconstruct_traced(lemma, tag).word;
  }
  Reconstruction reconstruct_traced(std::string_view lemma, const FactorTag& tag) const;

  bool has_lemma(std::string_view lemma) const;
  // Every surface form listed for the lemma, in lexicon order.
  std::vector<std::string> forms_of(std::string_view lemma) const;
  // Distinct words generatable from a set of lemmas. Lemmas without
  // entries contribute themselves (the last fallback step).
  std::vector<std::string> generatable_words(const std::vector<std::string>& lemmas) const;

  // Order-independent content hash; identifies the lexicon in checkpoints.
  std::uint64_t fingerprint() const;
  std::string to_tsv() const;

 private:
  void build_indexes(const std::vector<std::size_t>& line_numbers);
  const LexEntry* best_of(std::string_view lemma, const FactorTag* pos_number) const;

  std::vector<LexEntry> entries_;
  TagSchema schema_;
  std::unordered_map<std::string, std::size_t> by_word_;
  std::map<std::pair<std::string, FactorTag>, std::size_t> by_lemma_tag_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_lemma_;
};

struct FactoredSentence {
  std::vector<std::string> lemmas;
  std::vector<FactorTag> tags;
};

enum class OovPolicy {
  kPassThrough,  // lemma = the word, tag = all '#'
  kReject,       // DataError on the first unknown word
};

struct FactorizeReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t oov_tokens = 0;

  std::string to_text() const;
};

FactoredSentence factorize_sentence(const Sentence& words, const MorphLexicon& lexicon,
                                    OovPolicy policy = OovPolicy::kPassThrough,
                                    std::size_t* oov_count = nullptr);
std::vector<FactoredSentence> factorize_corpus(const std::vector<Sentence>& corpus,
                                               const MorphLexicon& lexicon,
                                               OovPolicy policy = OovPolicy::kPassThrough,
                                               FactorizeReport* report = nullptr);
Sentence reconstruct_sentence(const FactoredSentence& sentence, const MorphLexicon& lexicon);

std::string format_factored(const FactoredSentence& sentence);
// Splits each token at its last '|'.
FactoredSentence parse_factored(std::string_view line, const TagSchema& schema = {});
std::vector<FactoredSentence> read_factored_corpus(const std::filesystem::path& path,
                                                   const TagSchema& schema = {});

}  // namespace fnmt::morph

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fnmt/error.hpp"
#include "fnmt/morphology.hpp"

namespace fnmt::morph {

namespace {

bool printable(char c) { return c > ' ' && c < 127; }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string at_line(std::string_view origin, std::size_t line) {
  return std::string(origin) + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::optional<FactorTag> FactorTag::try_parse(std::string_view text) {
  if (text.size() != kSlotCount) return std::nullopt;
  std::array<char, kSlotCount> symbols{};
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    if (!printable(text[i])) return std::nullopt;
    symbols[i] = text[i];
  }
  return FactorTag(symbols);
}

FactorTag FactorTag::parse(std::string_view text) {
  if (auto tag = try_parse(text)) return *tag;
  throw ParseError("invalid factor tag '" + std::string(text) + "' (expected " +
                   std::to_string(kSlotCount) + " symbols)");
}

TagSchema::TagSchema(std::array<SlotSpec, kSlotCount> slots)
    : slots_(std::move(slots)), declared_(true) {}

bool TagSchema::accepts(const FactorTag& tag) const {
  if (!declared_) return true;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    const char c = tag.slot(i);
    if (c != kIrrelevant && slots_[i].alphabet.find(c) == std::string::npos) return false;
  }
  return true;
}

std::optional<FactorTag> TagSchema::try_parse(std::string_view text) const {
  auto tag = FactorTag::try_parse(text);
  if (tag && !accepts(*tag)) return std::nullopt;
  return tag;
}

FactorTag TagSchema::parse(std::string_view text) const {
  if (auto tag = try_parse(text)) return *tag;
  throw ParseError("factor tag '" + std::string(text) + "' is not in the declared slot alphabets");
}

MorphLexicon MorphLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  return parse(in, path.string());
}

MorphLexicon MorphLexicon::parse(std::istream& in, std::string_view origin) {
  std::vector<SlotSpec> slots;
  std::vector<std::pair<LexEntry, std::size_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#slot", 0) == 0 && (line.size() == 5 || line[5] == ' ' || line[5] == '\t')) {
      if (!raw.empty()) {
        throw ParseError(at_line(origin, line_no) + "#slot header after data lines");
      }
      Sentence parts = split_tokens(line);
      if (parts.size() != 3) {
        throw ParseError(at_line(origin, line_no) + "expected '#slot <name> <alphabet>'");
      }
      slots.push_back(SlotSpec{parts[1], parts[2]});
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(at_line(origin, line_no) + "expected word<TAB>lemma<TAB>tag[<TAB>frequency]");
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(at_line(origin, line_no) + "empty word or lemma");
    }
    auto tag = FactorTag::try_parse(fields[2]);
    if (!tag) {
      throw ParseError(at_line(origin, line_no) + "invalid factor tag '" + std::string(fields[2]) + "'");
    }
    LexEntry entry{std::string(fields[0]), std::string(fields[1]), *tag, 0.0};
    if (fields.size() == 4) {
      const std::string freq(fields[3]);
      char* end = nullptr;
      entry.frequency = std::strtod(freq.c_str(), &end);
      if (freq.empty() || *end != '\0' || !std::isfinite(entry.frequency) || entry.frequency < 0) {
        throw ParseError(at_line(origin, line_no) + "invalid frequency '" + freq + "'");
      }
    }
    raw.emplace_back(std::move(entry), line_no);
  }
  if (in.bad()) throw IoError("read failure on " + std::string(origin));

  TagSchema schema;
  if (!slots.empty()) {
    if (slots.size() != kSlotCount) {
      throw ParseError(std::string(origin) + ": expected " + std::to_string(kSlotCount) +
                       " #slot lines, found " + std::to_string(slots.size()));
    }
    std::array<SlotSpec, kSlotCount> arr;
    std::copy(slots.begin(), slots.end(), arr.begin());
    schema = TagSchema(std::move(arr));
  }
  MorphLexicon lex;
  lex.schema_ = schema;
  std::vector<std::size_t> line_numbers;
  for (auto& [entry, no] : raw) {
    if (!schema.accepts(entry.tag)) {
      throw ParseError(at_line(origin, no) + "tag '" + entry.tag.str() +
                       "' is outside the declared slot alphabets");
    }
    lex.entries_.push_back(std::move(entry));
    line_numbers.push_back(no);
  }
  lex.build_indexes(line_numbers);
  return lex;
}

MorphLexicon MorphLexicon::from_entries(std::vector<LexEntry> entries, TagSchema schema) {
  MorphLexicon lex;
  lex.schema_ = std::move(schema);
  std::vector<std::size_t> numbers;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!lex.schema_.accepts(entries[i].tag)) {
      throw ParseError("entry " + std::to_string(i + 1) + ": tag '" + entries[i].tag.str() +
                       "' is outside the declared slot alphabets");
    }
    numbers.push_back(i + 1);
  }
  lex.entries_ = std::move(entries);
  lex.build_indexes(numbers);
  return lex;
}

void MorphLexicon::build_indexes(const std::vector<std::size_t>& line_numbers) {
  // Identical triples collapse to their first occurrence.
  std::vector<LexEntry> kept;
  std::vector<std::size_t> kept_lines;
  std::string conflicts;
  std::size_t conflict_count = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    auto key = std::make_pair(e.lemma, e.tag);
    auto it = by_lemma_tag_.find(key);
    if (it != by_lemma_tag_.end()) {
      const LexEntry& prior = kept[it->second];
      if (prior.word != e.word) {
        if (conflict_count++ < 20) {
          conflicts += "\n  (" + e.lemma + ", " + e.tag.str() + ") -> '" + prior.word +
                       "' at line " + std::to_string(kept_lines[it->second]) + ", '" + e.word +
                       "' at line " + std::to_string(line_numbers[i]);
        }
      }
      continue;
    }
    by_lemma_tag_.emplace(std::move(key), kept.size());
    kept_lines.push_back(line_numbers[i]);
    kept.push_back(std::move(e));
  }
  if (conflict_count > 0) {
    throw ConsistencyError(std::to_string(conflict_count) +
                           " (lemma, tag) pair(s) map to several words:" + conflicts);
  }
  entries_ = std::move(kept);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    by_lemma_[e.lemma].push_back(i);
    // An ambiguous word keeps its most frequent analysis, then the earliest.
    auto [it, inserted] = by_word_.emplace(e.word, i);
    if (!inserted && entries_[it->second].frequency < e.frequency) it->second = i;
  }
}

std::optional<Analysis> MorphLexicon::factorize(std::string_view word) const {
  auto it = by_word_.find(std::string(word));
  if (it == by_word_.end()) return std::nullopt;
  const auto& e = entries_[it->second];
  return Analysis{e.lemma, e.tag};
}

const LexEntry* MorphLexicon::best_of(std::string_view lemma, const FactorTag* pos_number) const {
  auto it = by_lemma_.find(std::string(lemma));
  if (it == by_lemma_.end()) return nullptr;
  const LexEntry* best = nullptr;
  for (std::size_t idx : it->second) {
    const auto& e = entries_[idx];
    if (pos_number &&
        (e.tag.pos() != pos_number->pos() || e.tag.number() != pos_number->number())) {
      continue;
    }
    if (!best || e.frequency > best->frequency ||
        (e.frequency == best->frequency && e.word < best->word)) {
      best = &e;
    }
  }
  return best;
}

Reconstruction MorphLexicon::reconstruct_traced(std::string_view lemma, const FactorTag& tag) const {
  auto exact = by_lemma_tag_.find(std::make_pair(std::string(lemma), tag));
  if (exact != by_lemma_tag_.end()) return {entries_[exact->second].word, Generation::kExact};
  if (const LexEntry* e = best_of(lemma, &tag)) return {e->word, Generation::kPosAndNumber};
  if (const LexEntry* e = best_of(lemma, nullptr)) return {e->word, Generation::kAnyForm};
  return {std::string(lemma), Generation::kLemmaItself};
}

bool MorphLexicon::has_lemma(std::string_view lemma) const {
  return by_lemma_.count(std::string(lemma)) > 0;
}

std::vector<std::string> MorphLexicon::forms_of(std::string_view lemma) const {
  std::vector<std::string> out;
  auto it = by_lemma_.find(std::string(lemma));
  if (it == by_lemma_.end()) return out;
  for (std::size_t idx : it->second) out.push_back(entries_[idx].word);
  return out;
}

std::vector<std::string> MorphLexicon::generatable_words(
    const std::vector<std::string>& lemmas) const {
  std::set<std::string> words;
  for (const auto& lemma : lemmas) {
    auto it = by_lemma_.find(lemma);
    if (it == by_lemma_.end()) {
      words.insert(lemma);
      continue;
    }
    for (std::size_t idx : it->second) words.insert(entries_[idx].word);
  }
  return {words.begin(), words.end()};
}

std::uint64_t MorphLexicon::fingerprint() const {
  std::vector<std::string> rows;
  rows.reserve(entries_.size());
  for (const auto& e : entries_) rows.push_back(e.word + '\t' + e.lemma + '\t' + e.tag.str());
  std::sort(rows.begin(), rows.end());
  Fingerprint fp;
  for (const auto& r : rows) {
    fp.add(r);
    fp.add_separator();
  }
  return fp.value();
}

std::string MorphLexicon::to_tsv() const {
  std::ostringstream out;
  if (schema_.declared()) {
    for (const auto& s : schema_.slots()) out << "#slot " << s.name << ' ' << s.alphabet << '\n';
  }
  for (const auto& e : entries_) {
    out << e.word << '\t' << e.lemma << '\t' << e.tag.str();
    if (e.frequency != 0.0) out << '\t' << e.frequency;
    out << '\n';
  }
  return out.str();
}

}  // namespace fnmt::morph

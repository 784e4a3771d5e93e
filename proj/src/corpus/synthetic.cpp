#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fnmt/corpus.hpp"
#include "fnmt/error.hpp"
#include "fnmt/random.hpp"

namespace fnmt::corpus {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string syllables(Rng& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += kConsonants[rng.index(kConsonants.size())];
    out += kVowels[rng.index(kVowels.size())];
  }
  return out;
}

// Every (slot, symbol) pair gets its own two-letter ending. Lemmas have a
// fixed length, so word = lemma + endings decomposes uniquely.
class Inflector {
 public:
  explicit Inflector(const std::array<morph::SlotSpec, morph::kSlotCount>& slots) {
    std::size_t k = 0;
    for (std::size_t s = 1; s < morph::kSlotCount; ++s) {
      for (char c : slots[s].alphabet) {
        std::string chunk;
        chunk += kVowels[k % kVowels.size()];
        chunk += kConsonants[(k / kVowels.size()) % kConsonants.size()];
        endings_[{s, c}] = chunk;
        ++k;
      }
    }
    if (k > kVowels.size() * kConsonants.size()) {
      throw ConfigError("synthetic language: too many slot symbols for distinct endings");
    }
  }

  std::string inflect(const std::string& lemma, const morph::FactorTag& tag) const {
    std::string word = lemma;
    for (std::size_t s = 1; s < morph::kSlotCount; ++s) {
      if (tag.slot(s) != morph::kIrrelevant) word += endings_.at({s, tag.slot(s)});
    }
    return word;
  }

 private:
  std::map<std::pair<std::size_t, char>, std::string> endings_;
};

struct LemmaInfo {
  std::string target;
  std::string source;
  std::vector<morph::FactorTag> tags;
  std::vector<bool> held_out;  // parallel to tags
};

std::vector<morph::FactorTag> tags_for(char pos, bool verbal,
                                       const std::array<morph::SlotSpec, morph::kSlotCount>& slots) {
  std::vector<morph::FactorTag> out;
  const std::string& numbers = slots[morph::FactorTag::kNumber].alphabet;
  if (verbal) {
    for (char t : slots[morph::FactorTag::kTense].alphabet)
      for (char p : slots[morph::FactorTag::kPerson].alphabet)
        for (char n : numbers) out.push_back(morph::FactorTag({pos, t, p, morph::kIrrelevant, n}));
  } else {
    for (char g : slots[morph::FactorTag::kGender].alphabet)
      for (char n : numbers)
        out.push_back(morph::FactorTag({pos, morph::kIrrelevant, morph::kIrrelevant, g, n}));
  }
  return out;
}

class SentenceSampler {
 public:
  SentenceSampler(const SyntheticLanguageSpec& spec, const std::vector<LemmaInfo>& lemmas,
                  const Inflector& inflector)
      : spec_(spec), lemmas_(lemmas), inflector_(inflector) {
    double total = 0.0;
    for (std::size_t r = 0; r < lemmas.size(); ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
      cumulative_.push_back(total);
    }
    for (double& c : cumulative_) c /= total;
  }

  std::size_t draw_lemma(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  }

  std::size_t draw_tag(Rng& rng, std::size_t lemma, bool allow_held_out) const {
    const auto& info = lemmas_[lemma];
    std::vector<std::size_t> options;
    for (std::size_t t = 0; t < info.tags.size(); ++t) {
      if (allow_held_out || !info.held_out[t]) options.push_back(t);
    }
    return options[rng.index(options.size())];
  }

  void emit(std::size_t lemma, std::size_t tag, Sentence& source, Sentence& target) const {
    const auto& info = lemmas_[lemma];
    source.push_back(info.source);
    source.push_back("+" + info.tags[tag].str());
    target.push_back(inflector_.inflect(info.target, info.tags[tag]));
  }

  std::size_t draw_length(Rng& rng) const {
    return spec_.min_length + rng.index(spec_.max_length - spec_.min_length + 1);
  }

 private:
  const SyntheticLanguageSpec& spec_;
  const std::vector<LemmaInfo>& lemmas_;
  const Inflector& inflector_;
  std::vector<double> cumulative_;
};

}  // namespace

SyntheticData generate_synthetic(const SyntheticLanguageSpec& spec) {
  if (spec.lemma_count < 1) throw ConfigError("synthetic language needs at least one lemma");
  if (spec.min_length < 1 || spec.max_length < spec.min_length) {
    throw ConfigError("synthetic language: invalid sentence length range");
  }
  if (spec.slots[morph::FactorTag::kPos].alphabet.empty() ||
      spec.slots[morph::FactorTag::kNumber].alphabet.empty()) {
    throw ConfigError("synthetic language: pos and number alphabets must be nonempty");
  }
  Rng rng(spec.seed);
  const Inflector inflector(spec.slots);
  const std::string& pos_alphabet = spec.slots[morph::FactorTag::kPos].alphabet;

  std::vector<LemmaInfo> lemmas;
  std::set<std::string> seen_target, seen_source;
  while (lemmas.size() < spec.lemma_count) {
    LemmaInfo info;
    info.target = syllables(rng, 3);
    info.source = syllables(rng, 2) + kConsonants[rng.index(kConsonants.size())];
    if (seen_target.count(info.target) || seen_source.count(info.source)) continue;
    seen_target.insert(info.target);
    seen_source.insert(info.source);
    const char pos = pos_alphabet[rng.index(pos_alphabet.size())];
    const bool verbal = spec.verbal_pos.find(pos) != std::string::npos;
    info.tags = tags_for(pos, verbal, spec.slots);
    if (info.tags.empty()) throw ConfigError("synthetic language: a POS has no inflections");
    info.held_out.resize(info.tags.size());
    bool any_allowed = false;
    for (std::size_t t = 0; t < info.tags.size(); ++t) {
      info.held_out[t] = rng.uniform() < spec.held_out_fraction;
      any_allowed = any_allowed || !info.held_out[t];
    }
    if (!any_allowed) info.held_out[0] = false;
    lemmas.push_back(std::move(info));
  }

  const SentenceSampler sampler(spec, lemmas, inflector);
  SyntheticData data;

  auto generate = [&](std::size_t count, bool allow_held_out, ParallelText& out) {
    for (std::size_t i = 0; i < count; ++i) {
      Sentence src, tgt;
      const std::size_t len = sampler.draw_length(rng);
      for (std::size_t p = 0; p < len; ++p) {
        const std::size_t l = sampler.draw_lemma(rng);
        sampler.emit(l, sampler.draw_tag(rng, l, allow_held_out), src, tgt);
      }
      out.source.push_back(std::move(src));
      out.target.push_back(std::move(tgt));
    }
  };

  generate(spec.train_sentences, false, data.train);
  generate(spec.valid_sentences, false, data.valid);

  // Held-out forms of lemmas that training did use.
  std::set<std::size_t> trained_lemmas;
  {
    std::set<std::string> train_words;
    for (const auto& s : data.train.target) train_words.insert(s.begin(), s.end());
    for (std::size_t l = 0; l < lemmas.size(); ++l) {
      for (std::size_t t = 0; t < lemmas[l].tags.size(); ++t) {
        if (train_words.count(inflector.inflect(lemmas[l].target, lemmas[l].tags[t]))) {
          trained_lemmas.insert(l);
          break;
        }
      }
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> unseen_forms;
  for (std::size_t l : trained_lemmas) {
    for (std::size_t t = 0; t < lemmas[l].tags.size(); ++t) {
      if (lemmas[l].held_out[t]) unseen_forms.emplace_back(l, t);
    }
  }

  for (std::size_t i = 0; i < spec.test_sentences; ++i) {
    Sentence src, tgt;
    const std::size_t len = sampler.draw_length(rng);
    const std::size_t forced = unseen_forms.empty() ? len : rng.index(len);
    for (std::size_t p = 0; p < len; ++p) {
      if (p == forced) {
        const auto [l, t] = unseen_forms[rng.index(unseen_forms.size())];
        sampler.emit(l, t, src, tgt);
      } else {
        const std::size_t l = sampler.draw_lemma(rng);
        sampler.emit(l, sampler.draw_tag(rng, l, true), src, tgt);
      }
    }
    data.test.source.push_back(std::move(src));
    data.test.target.push_back(std::move(tgt));
  }

  std::map<std::string, double> train_counts;
  for (const auto& s : data.train.target)
    for (const auto& w : s) train_counts[w] += 1.0;
  std::vector<morph::LexEntry> entries;
  for (const auto& info : lemmas) {
    for (const auto& tag : info.tags) {
      std::string word = inflector.inflect(info.target, tag);
      auto it = train_counts.find(word);
      const double freq = it == train_counts.end() ? 0.0 : it->second;
      entries.push_back({std::move(word), info.target, tag, freq});
    }
  }
  data.lexicon = morph::MorphLexicon::from_entries(std::move(entries), morph::TagSchema(spec.slots));
  return data;
}

}  // namespace fnmt::corpus

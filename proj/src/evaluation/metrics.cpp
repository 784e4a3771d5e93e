#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "fnmt/corpus.hpp"
#include "fnmt/error.hpp"
#include "fnmt/evaluation.hpp"

namespace fnmt::eval {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Sentence& s, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++out[std::vector<std::string>(s.begin() + i, s.begin() + i + n)];
  }
  return out;
}

std::vector<Sentence> words_of_tags(const std::vector<morph::FactoredSentence>& corpus) {
  std::vector<Sentence> out;
  for (const auto& s : corpus) {
    Sentence tags;
    for (const auto& t : s.tags) tags.push_back(t.str());
    out.push_back(std::move(tags));
  }
  return out;
}

std::vector<Sentence> lemmas_of(const std::vector<morph::FactoredSentence>& corpus) {
  std::vector<Sentence> out;
  for (const auto& s : corpus) out.push_back(s.lemmas);
  return out;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void require_aligned(std::size_t a, std::size_t b, const char* what_a, const char* what_b) {
  if (a != b) {
    throw DataError(std::string(what_a) + " has " + std::to_string(a) + " sentences but " +
                    what_b + " has " + std::to_string(b));
  }
}

}  // namespace

double BleuStats::precision(std::size_t n, bool smooth) const {
  const double m = static_cast<double>(matches[n - 1]);
  const double t = static_cast<double>(totals[n - 1]);
  if (smooth && n > 1) return (m + 1.0) / (t + 1.0);
  return t == 0.0 ? 0.0 : m / t;
}

double BleuStats::brevity_penalty() const {
  if (hyp_length == 0) return 0.0;
  if (hyp_length >= ref_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
}

double BleuStats::score(bool smooth) const {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const double p = precision(n, smooth);
    if (p <= 0.0) return 0.0;
    log_sum += std::log(p);
  }
  return 100.0 * brevity_penalty() * std::exp(log_sum / 4.0);
}

BleuStats bleu_stats(const std::vector<Sentence>& hypotheses,
                     const std::vector<Sentence>& references) {
  if (hypotheses.empty()) throw ContractError("BLEU of an empty corpus");
  if (hypotheses.size() != references.size()) {
    throw ContractError("BLEU needs one reference per hypothesis (" +
                        std::to_string(hypotheses.size()) + " vs " +
                        std::to_string(references.size()) + ")");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& h = hypotheses[i];
    const auto& r = references[i];
    stats.hyp_length += h.size();
    stats.ref_length += r.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hc = ngrams(h, n);
      const auto rc = ngrams(r, n);
      for (const auto& [gram, count] : hc) {
        auto it = rc.find(gram);
        if (it != rc.end()) stats.matches[n - 1] += std::min(count, it->second);
        stats.totals[n - 1] += count;
      }
    }
  }
  return stats;
}

double bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
            bool smooth) {
  return bleu_stats(hypotheses, references).score(smooth);
}

std::size_t count_oov(const std::vector<Sentence>& hypotheses) {
  std::size_t n = 0;
  for (const auto& s : hypotheses) n += std::ranges::count(s, std::string(corpus::kUnkToken));
  return n;
}

double coverage(const std::vector<Sentence>& corpus,
                const std::unordered_set<std::string>& vocabulary) {
  if (vocabulary.empty()) throw ContractError("coverage: empty vocabulary");
  std::size_t total = 0, covered = 0;
  for (const auto& s : corpus) {
    for (const auto& w : s) {
      ++total;
      covered += vocabulary.count(w);
    }
  }
  if (total == 0) throw ContractError("coverage: corpus has no tokens");
  return 100.0 * static_cast<double>(covered) / static_cast<double>(total);
}

std::unordered_set<std::string> effective_vocabulary(const model::Checkpoint& checkpoint,
                                                     const morph::MorphLexicon* lexicon) {
  const auto shortlist = checkpoint.lemma_vocab.shortlist();
  if (checkpoint.word_level) return {shortlist.begin(), shortlist.end()};
  if (lexicon == nullptr) throw ContractError("effective_vocabulary: factored model needs a lexicon");
  const auto words = lexicon->generatable_words(shortlist);
  return {words.begin(), words.end()};
}

std::vector<Sentence> oracle_words(const std::vector<morph::FactoredSentence>& hypotheses,
                                   const std::vector<morph::FactoredSentence>& references,
                                   const morph::MorphLexicon& lexicon) {
  if (hypotheses.size() != references.size()) {
    throw ContractError("oracle: hypothesis and reference counts differ");
  }
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& h = hypotheses[i];
    const auto& r = references[i];
    Sentence words;
    for (std::size_t t = 0; t < h.lemmas.size(); ++t) {
      if (h.lemmas[t] == corpus::kUnkToken) {
        words.push_back(h.lemmas[t]);
        continue;
      }
      const auto& tag = t < r.tags.size() ? r.tags[t] : h.tags[t];
      words.push_back(lexicon.reconstruct(h.lemmas[t], tag));
    }
    out.push_back(std::move(words));
  }
  return out;
}

double oracle_word_bleu(const std::vector<morph::FactoredSentence>& hypotheses,
                        const std::vector<morph::FactoredSentence>& references,
                        const morph::MorphLexicon& lexicon, bool smooth) {
  std::vector<Sentence> refs;
  for (const auto& r : references) refs.push_back(morph::reconstruct_sentence(r, lexicon));
  return bleu(oracle_words(hypotheses, references, lexicon), refs, smooth);
}

std::string EvalReport::to_text() const {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("bleu_word", percent(bleu_word));
  if (bleu_lemma) rows.emplace_back("bleu_lemma", percent(*bleu_lemma));
  if (bleu_factors) rows.emplace_back("bleu_factors", percent(*bleu_factors));
  rows.emplace_back("oov_count", std::to_string(oov_count));
  if (coverage) rows.emplace_back("coverage", percent(*coverage));
  if (oracle_bleu_word) rows.emplace_back("oracle_bleu_word", percent(*oracle_bleu_word));
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : rows) out += k + ":" + std::string(width - k.size() + 1, ' ') + v + "\n";
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["bleu_word"] = bleu_word;
  j["bleu_lemma"] = bleu_lemma ? nlohmann::ordered_json(*bleu_lemma) : nullptr;
  j["bleu_factors"] = bleu_factors ? nlohmann::ordered_json(*bleu_factors) : nullptr;
  j["oov_count"] = oov_count;
  j["coverage"] = coverage ? nlohmann::ordered_json(*coverage) : nullptr;
  j["oracle_bleu_word"] = oracle_bleu_word ? nlohmann::ordered_json(*oracle_bleu_word) : nullptr;
  return j.dump() + "\n";
}

EvalReport evaluate(const EvalInputs& in) {
  if (!in.hypotheses || !in.references) throw ContractError("evaluate: missing corpora");
  const auto& hyps = *in.hypotheses;
  const auto& refs = *in.references;
  require_aligned(hyps.size(), refs.size(), "hypothesis file", "reference file");
  if (hyps.empty()) throw DataError("nothing to evaluate: the hypothesis file is empty");
  EvalReport r;
  r.bleu_word = bleu(hyps, refs, in.smooth);
  r.oov_count = count_oov(hyps);
  if (in.vocabulary) r.coverage = coverage(refs, *in.vocabulary);
  if (in.hypothesis_factors && in.reference_factors) {
    require_aligned(in.hypothesis_factors->size(), hyps.size(), "hypothesis factor stream",
                    "hypothesis file");
    require_aligned(in.reference_factors->size(), refs.size(), "reference factor stream",
                    "reference file");
    r.bleu_lemma = bleu(lemmas_of(*in.hypothesis_factors), lemmas_of(*in.reference_factors), in.smooth);
    r.bleu_factors =
        bleu(words_of_tags(*in.hypothesis_factors), words_of_tags(*in.reference_factors), in.smooth);
    if (in.lexicon) {
      r.oracle_bleu_word =
          oracle_word_bleu(*in.hypothesis_factors, *in.reference_factors, *in.lexicon, in.smooth);
    }
  }
  return r;
}

}  // namespace fnmt::eval

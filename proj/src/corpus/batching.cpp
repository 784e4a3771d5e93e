#include <algorithm>
#include <numeric>
#include <sstream>

#include "fnmt/corpus.hpp"
#include "fnmt/error.hpp"

namespace fnmt::corpus {

std::vector<int> IndexMatrix::column(std::size_t c) const {
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
  return out;
}

std::vector<double> IndexMatrix::mask_column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = mask_at(r, c);
  return out;
}

std::size_t IndexMatrix::length(std::size_t r) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cols; ++c) n += mask_at(r, c) != 0.0;
  return n;
}

double Batch::target_tokens() const {
  double n = 0.0;
  for (double m : lemmas.mask) n += m;
  return n;
}

IndexMatrix pad_sequences(const std::vector<std::vector<int>>& sequences) {
  IndexMatrix m;
  m.rows = sequences.size();
  for (const auto& s : sequences) m.cols = std::max(m.cols, s.size());
  m.ids.assign(m.rows * m.cols, kEos);
  m.mask.assign(m.rows * m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < sequences[r].size(); ++c) {
      m.ids[r * m.cols + c] = sequences[r][c];
      m.mask[r * m.cols + c] = 1.0;
    }
  }
  return m;
}

std::string DropReport::to_text() const {
  std::ostringstream out;
  out << "total: " << total << '\n'
      << "kept: " << kept << '\n'
      << "dropped_too_long: " << dropped_too_long << '\n'
      << "dropped_empty: " << dropped_empty << '\n'
      << "max_len: " << max_len << '\n';
  return out.str();
}

Batch make_batch(const std::vector<ParallelExample>& examples,
                 const std::vector<std::size_t>& members, const Vocabulary& source_vocab,
                 const TargetVocabularies& target) {
  if (!target.lemmas) throw ContractError("make_batch: lemma vocabulary required");
  std::vector<std::vector<int>> src, lem, fac;
  for (std::size_t i : members) {
    const auto& ex = examples.at(i);
    if (ex.target.lemmas.size() != ex.target.tags.size()) {
      throw DataError("lemma and factor streams differ in length for sentence " +
                      std::to_string(i + 1));
    }
    src.push_back(encode_sentence(ex.source, source_vocab));
    lem.push_back(encode_sentence(ex.target.lemmas, *target.lemmas));
    if (target.factors) {
      Sentence tags;
      for (const auto& t : ex.target.tags) tags.push_back(t.str());
      fac.push_back(encode_sentence(tags, *target.factors));
    } else {
      fac.emplace_back(lem.back().size(), 0);
    }
  }
  Batch b;
  b.source = pad_sequences(src);
  b.lemmas = pad_sequences(lem);
  b.factors = pad_sequences(fac);
  if (!target.factors) std::fill(b.factors.ids.begin(), b.factors.ids.end(), 0);
  b.sentence_ids = members;
  return b;
}

BatchPlan make_batches(const std::vector<ParallelExample>& corpus, const Vocabulary& source_vocab,
                       const TargetVocabularies& target, std::size_t batch_size,
                       std::size_t max_len) {
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  BatchPlan plan;
  plan.report.total = corpus.size();
  plan.report.max_len = max_len;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& ex = corpus[i];
    if (ex.source.empty() || ex.target.lemmas.empty()) {
      ++plan.report.dropped_empty;
    } else if (ex.source.size() > max_len || ex.target.lemmas.size() > max_len) {
      ++plan.report.dropped_too_long;
    } else {
      kept.push_back(i);
    }
  }
  plan.report.kept = kept.size();
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = corpus[a];
    const auto& y = corpus[b];
    if (x.target.lemmas.size() != y.target.lemmas.size())
      return x.target.lemmas.size() < y.target.lemmas.size();
    return x.source.size() < y.source.size();
  });
  for (std::size_t begin = 0; begin < kept.size(); begin += batch_size) {
    const std::size_t end = std::min(kept.size(), begin + batch_size);
    std::vector<std::size_t> members(kept.begin() + begin, kept.begin() + end);
    plan.batches.push_back(make_batch(corpus, members, source_vocab, target));
  }
  return plan;
}

std::vector<ParallelExample> make_parallel(const std::vector<Sentence>& source,
                                           const std::vector<Sentence>& target_words,
                                           const morph::MorphLexicon& lexicon) {
  if (source.size() != target_words.size()) {
    throw DataError("source has " + std::to_string(source.size()) + " sentences but target has " +
                    std::to_string(target_words.size()));
  }
  std::vector<ParallelExample> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    out.push_back({source[i], morph::factorize_sentence(target_words[i], lexicon)});
  }
  return out;
}

std::vector<ParallelExample> make_parallel_words(const std::vector<Sentence>& source,
                                                 const std::vector<Sentence>& target_words) {
  if (source.size() != target_words.size()) {
    throw DataError("source has " + std::to_string(source.size()) + " sentences but target has " +
                    std::to_string(target_words.size()));
  }
  std::vector<ParallelExample> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    morph::FactoredSentence t;
    t.lemmas = target_words[i];
    t.tags.assign(t.lemmas.size(), morph::FactorTag::irrelevant());
    out.push_back({source[i], std::move(t)});
  }
  return out;
}

}  // namespace fnmt::corpus

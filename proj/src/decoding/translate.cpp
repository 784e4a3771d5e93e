#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "fnmt/decoding.hpp"
#include "fnmt/error.hpp"

namespace fnmt::decoding {

namespace {

struct Surface {
  Sentence words;
  morph::FactoredSentence factored;
};

Surface realize(const model::Checkpoint& ck, const Hypothesis& hyp,
                const morph::MorphLexicon* lexicon) {
  Surface out;
  const auto lemmas = hyp.output_lemmas();
  const auto factors = hyp.output_factors();
  for (std::size_t i = 0; i < lemmas.size(); ++i) {
    const std::string& lemma = ck.lemma_vocab.token(lemmas[i]);
    morph::FactorTag tag = morph::FactorTag::irrelevant();
    if (!ck.word_level && factors[i] >= static_cast<int>(corpus::kReserved)) {
      tag = morph::FactorTag::parse(ck.factor_vocab.token(factors[i]));
    }
    out.factored.lemmas.push_back(lemma);
    out.factored.tags.push_back(tag);
    if (ck.word_level || lemmas[i] < static_cast<int>(corpus::kReserved)) {
      // Reserved ids (UNK in particular) are emitted literally.
      out.words.push_back(lemma);
    } else {
      out.words.push_back(lexicon->reconstruct(lemma, tag));
    }
  }
  return out;
}

}  // namespace

Translation translate(const model::Checkpoint& checkpoint, const Sentence& source,
                      const morph::MorphLexicon* lexicon, const BeamConfig& config) {
  if (!checkpoint.word_level && lexicon == nullptr) {
    throw ContractError("translate: a factored model needs a lexicon");
  }
  if (source.empty()) return Translation{};
  const auto ids = corpus::encode_sentence(source, checkpoint.source_vocab);
  const auto model = checkpoint.model();
  const auto result = beam_decode(model, ids, config);
  Translation t;
  t.unfinished = result.unfinished;
  t.score = result.best().score;
  auto best = realize(checkpoint, result.best(), lexicon);
  t.words = std::move(best.words);
  t.factored = std::move(best.factored);
  for (const auto& h : result.hypotheses) {
    t.nbest.emplace_back(h.score, realize(checkpoint, h, lexicon).words);
  }
  return t;
}

std::vector<Translation> translate_corpus(const model::Checkpoint& checkpoint,
                                          const std::vector<Sentence>& source,
                                          const morph::MorphLexicon* lexicon,
                                          const BeamConfig& config, std::size_t workers) {
  std::vector<Translation> out(source.size());
  workers = std::max<std::size_t>(1, std::min(workers, source.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < source.size(); ++i) {
      out[i] = translate(checkpoint, source[i], lexicon, config);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < source.size(); i = next++) {
        try {
          out[i] = translate(checkpoint, source[i], lexicon, config);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string format_nbest(const std::vector<Translation>& translations) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < translations.size(); ++i) {
    for (const auto& [score, words] : translations[i].nbest) {
      std::snprintf(buf, sizeof buf, "%.6f", score);
      out += std::to_string(i) + " ||| " + buf + " ||| " + join_tokens(words) + "\n";
    }
  }
  return out;
}

}  // namespace fnmt::decoding

#include "fnmt/pipeline.hpp"

#include "fnmt/error.hpp"
#include "fnmt/evaluation.hpp"

namespace fnmt::pipeline {

PreparedTraining prepare_training(const corpus::ParallelText& train,
                                  const morph::MorphLexicon* lexicon,
                                  const training::TrainConfig& config) {
  config.validate();
  if (train.source.empty()) throw DataError("the training corpus is empty");
  const bool word_level = lexicon == nullptr;
  const auto examples = word_level ? corpus::make_parallel_words(train.source, train.target)
                                   : corpus::make_parallel(train.source, train.target, *lexicon);
  std::vector<Sentence> lemmas, tags;
  for (const auto& e : examples) {
    lemmas.push_back(e.target.lemmas);
    Sentence t;
    for (const auto& tag : e.target.tags) t.push_back(tag.str());
    tags.push_back(std::move(t));
  }

  PreparedTraining out;
  auto& ck = out.initial;
  ck.word_level = word_level;
  ck.source_vocab = corpus::Vocabulary::build(train.source, config.source_shortlist);
  ck.lemma_vocab = corpus::Vocabulary::build(lemmas, config.lemma_shortlist);
  if (!word_level) {
    ck.factor_vocab = corpus::Vocabulary::build_full(tags);
    ck.lexicon_hash = hex64(lexicon->fingerprint());
  }
  ck.config.emb_dim = config.emb_dim;
  ck.config.hid_dim = config.hid_dim;
  ck.config.src_vocab = ck.source_vocab.size();
  ck.config.lemma_vocab = ck.lemma_vocab.size();
  ck.config.factor_vocab = word_level ? 1 : ck.factor_vocab.size();
  ck.config.feedback = word_level ? model::FeedbackMode::kLemma : config.feedback;
  ck.config.dependency = word_level ? false : config.dependency;
  ck.config.factor_weight = word_level ? 0.0 : config.factor_weight;
  ck.params = model::init_params(ck.config, config.seed);

  corpus::TargetVocabularies targets{&ck.lemma_vocab, word_level ? nullptr : &ck.factor_vocab};
  auto plan = corpus::make_batches(examples, ck.source_vocab, targets, config.batch_size,
                                   config.max_len);
  if (plan.batches.empty()) {
    throw DataError("every training pair was dropped (max_len " + std::to_string(config.max_len) +
                    ")");
  }
  out.batches = std::move(plan.batches);
  out.report = plan.report;
  return out;
}

decoding::BeamConfig beam_config(const training::TrainConfig& config) {
  decoding::BeamConfig b;
  b.beam_size = config.beam_size;
  b.per_head = config.per_head_candidates;
  b.max_length = config.max_output_len;
  return b;
}

std::vector<Sentence> translate_words(const model::Checkpoint& checkpoint,
                                      const std::vector<Sentence>& source,
                                      const morph::MorphLexicon* lexicon,
                                      const decoding::BeamConfig& beam, std::size_t workers) {
  std::vector<Sentence> out;
  for (auto& t : decoding::translate_corpus(checkpoint, source, lexicon, beam, workers)) {
    out.push_back(std::move(t.words));
  }
  return out;
}

std::function<double(const model::Model&)> bleu_validator(const model::Checkpoint& shape,
                                                          const corpus::ParallelText& valid,
                                                          const morph::MorphLexicon* lexicon,
                                                          const decoding::BeamConfig& beam,
                                                          std::size_t workers) {
  if (valid.source.empty()) throw DataError("the validation corpus is empty");
  if (valid.source.size() != valid.target.size()) {
    throw DataError("validation source has " + std::to_string(valid.source.size()) +
                    " sentences but the target has " + std::to_string(valid.target.size()));
  }
  return [shape, valid, lexicon, beam, workers](const model::Model& m) {
    model::Checkpoint ck = shape;
    ck.config = m.config;
    ck.params = m.params;
    return eval::bleu(translate_words(ck, valid.source, lexicon, beam, workers), valid.target);
  };
}

}  // namespace fnmt::pipeline

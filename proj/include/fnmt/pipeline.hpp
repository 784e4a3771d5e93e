#pragma once

// Glue between corpora on disk and the training/decoding modules.

#include <functional>

#include "fnmt/checkpoint.hpp"
#include "fnmt/corpus.hpp"
#include "fnmt/decoding.hpp"
#include "fnmt/morphology.hpp"
#include "fnmt/training.hpp"

namespace fnmt::pipeline {

struct PreparedTraining {
  model::Checkpoint initial;
  std::vector<corpus::Batch> batches;
  corpus::DropReport report;
};

// Builds vocabularies, initial parameters and batches. A null lexicon trains
// a word-level model: a single factor class and no factor loss.
PreparedTraining prepare_training(const corpus::ParallelText& train,
                                  const morph::MorphLexicon* lexicon,
                                  const training::TrainConfig& config);

decoding::BeamConfig beam_config(const training::TrainConfig& config);

// Word BLEU of beam translations of `valid` under the model being trained.
std::function<double(const model::Model&)> bleu_validator(const model::Checkpoint& shape,
                                                          const corpus::ParallelText& valid,
                                                          const morph::MorphLexicon* lexicon,
                                                          const decoding::BeamConfig& beam,
                                                          std::size_t workers = 1);

// Translations of `source` as word sentences.
std::vector<Sentence> translate_words(const model::Checkpoint& checkpoint,
                                      const std::vector<Sentence>& source,
                                      const morph::MorphLexicon* lexicon,
                                      const decoding::BeamConfig& beam, std::size_t workers = 1);

}  // namespace fnmt::pipeline

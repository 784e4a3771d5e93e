#pragma once

// Small random models and batches shared by the test suites.

#include <vector>

#include "fnmt/corpus.hpp"
#include "fnmt/model.hpp"
#include "fnmt/random.hpp"

namespace fnmt::testing {

// Every entry (biases included) drawn from uniform(-scale, scale), so no
// gradient path is trivially zero.
inline model::Model random_model(const model::ModelConfig& config, std::uint64_t seed,
                                 double scale = 0.5) {
  model::Model m{config, model::init_params(config, seed)};
  Rng rng(seed ^ 0x5bd1e995u);
  for (auto t : m.params.tensors()) {
    for (double& v : t.mutable_values()) v = rng.uniform(-scale, scale);
  }
  return m;
}

inline model::ModelConfig tiny_config(std::size_t emb, std::size_t hid, std::size_t v_src,
                                      std::size_t v_lem, std::size_t v_fac) {
  model::ModelConfig c;
  c.emb_dim = emb;
  c.hid_dim = hid;
  c.src_vocab = v_src;
  c.lemma_vocab = v_lem;
  c.factor_vocab = v_fac;
  return c;
}

// Random ids in [lo, hi) for each requested length, followed by EOS.
inline corpus::IndexMatrix random_ids(Rng& rng, const std::vector<std::size_t>& lengths, int lo,
                                      int hi) {
  std::vector<std::vector<int>> seqs;
  for (auto n : lengths) {
    std::vector<int> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(lo + static_cast<int>(rng.index(hi - lo)));
    seqs.push_back(s);
  }
  return corpus::pad_sequences(seqs);
}

inline corpus::Batch random_batch(const model::ModelConfig& c, std::uint64_t seed,
                                  const std::vector<std::size_t>& src_lengths,
                                  const std::vector<std::size_t>& tgt_lengths) {
  Rng rng(seed);
  corpus::Batch b;
  b.source = random_ids(rng, src_lengths, corpus::kReserved, static_cast<int>(c.src_vocab));
  b.lemmas = random_ids(rng, tgt_lengths, corpus::kReserved, static_cast<int>(c.lemma_vocab));
  if (c.factor_vocab > corpus::kReserved) {
    b.factors = random_ids(rng, tgt_lengths, corpus::kReserved, static_cast<int>(c.factor_vocab));
  } else {
    b.factors = b.lemmas;
    for (auto& id : b.factors.ids) id = 0;
  }
  for (std::size_t i = 0; i < src_lengths.size(); ++i) b.sentence_ids.push_back(i);
  return b;
}

}  // namespace fnmt::testing

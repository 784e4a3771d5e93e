#include <algorithm>
#include <cmath>
#include <numeric>

#include "fnmt/decoding.hpp"
#include "fnmt/error.hpp"

namespace fnmt::decoding {

namespace {

using corpus::kEos;

// Ids of the `m` largest entries of a row, best first, ties to lower id.
std::vector<int> top_ids(std::span<const double> row, std::size_t m) {
  std::vector<int> ids(row.size());
  std::iota(ids.begin(), ids.end(), 0);
  m = std::min(m, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(m), ids.end(),
                    [&](int a, int b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  ids.resize(m);
  return ids;
}

std::span<const double> row_of(const Tensor& t, std::size_t r) {
  return t.values().subspan(r * t.cols(), t.cols());
}

struct Live {
  Hypothesis hyp;
  std::size_t state_row = 0;  // row of the decoder state it continues from
};

struct Candidate {
  Hypothesis hyp;
  std::size_t parent = 0;
};

}  // namespace

void BeamConfig::validate() const {
  if (beam_size < 1) throw ConfigError("beam size must be at least 1");
  if (max_length < 1) throw ConfigError("maximum output length must be at least 1");
}

double Hypothesis::ranking_score(bool normalize) const {
  if (!normalize || lemmas.empty()) return score;
  return score / static_cast<double>(lemmas.size());
}

std::vector<int> Hypothesis::output_lemmas() const {
  auto out = lemmas;
  if (finished && !out.empty()) out.pop_back();
  return out;
}

std::vector<int> Hypothesis::output_factors() const {
  auto out = factors;
  if (finished && !out.empty()) out.pop_back();
  return out;
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b, bool normalize) {
  const double sa = a.ranking_score(normalize), sb = b.ranking_score(normalize);
  if (sa != sb) return sa > sb;
  if (a.lemmas != b.lemmas) return a.lemmas < b.lemmas;
  return a.factors < b.factors;
}

Hypothesis greedy_decode(const model::Model& model, std::span<const int> source,
                         std::size_t max_length) {
  if (source.empty()) throw ContractError("greedy_decode: empty source sentence");
  auto enc = model::encode(model, source);
  Tensor hidden = model::initial_state(model, enc);
  Tensor feedback = model::start_feedback(model, 1);
  Hypothesis hyp;
  for (std::size_t t = 0; t < max_length; ++t) {
    auto step = model::decode_step(model, hidden, feedback, enc);
    Tensor lemma_lp = log_softmax(step.lemma_logits);
    const int lemma = top_ids(row_of(lemma_lp, 0), 1).front();
    const std::vector<int> chosen = {lemma};
    Tensor factor_lp = log_softmax(model.config.dependency
                                       ? model::factor_logits(model, step.readout, chosen)
                                       : step.factor_logits);
    const int factor = top_ids(row_of(factor_lp, 0), 1).front();
    hyp.lemmas.push_back(lemma);
    hyp.factors.push_back(factor);
    hyp.score += lemma_lp.values()[lemma] + factor_lp.values()[factor];
    if (lemma == kEos) {
      hyp.finished = true;
      break;
    }
    hidden = step.hidden;
    feedback = model::feedback_embed(model, chosen, std::vector<int>{factor});
  }
  return hyp;
}

BeamResult beam_decode(const model::Model& model, std::span<const int> source,
                       const BeamConfig& config) {
  config.validate();
  if (source.empty()) throw ContractError("beam_decode: empty source sentence");
  const std::size_t k = config.beam_size;
  const std::size_t m = config.candidates();
  const bool normalize = config.normalize;
  auto by_rank = [normalize](const Hypothesis& a, const Hypothesis& b) {
    return ranks_before(a, b, normalize);
  };
  // Pruning compares raw scores; normalization only orders finished output.
  auto by_score = [](const Candidate& a, const Candidate& b) {
    return ranks_before(a.hyp, b.hyp, false);
  };

  const auto enc_one = model::encode(model, source);
  Tensor hidden = model::initial_state(model, enc_one);
  Tensor feedback = model::start_feedback(model, 1);
  std::vector<Live> live = {Live{}};
  std::vector<Hypothesis> completed;

  for (std::size_t t = 0; t < config.max_length && !live.empty(); ++t) {
    const std::size_t n = live.size();
    const auto enc = n == 1 ? enc_one : enc_one.tile(n);
    auto step = model::decode_step(model, hidden, feedback, enc);
    Tensor lemma_lp = log_softmax(step.lemma_logits);

    std::vector<std::vector<int>> lemma_top(n);
    for (std::size_t r = 0; r < n; ++r) lemma_top[r] = top_ids(row_of(lemma_lp, r), m);

    // Factor log-probabilities: one row per hypothesis, or one row per
    // (hypothesis, candidate lemma) under the dependency model.
    Tensor factor_lp;
    if (model.config.dependency) {
      std::vector<int> rows, lemmas;
      for (std::size_t r = 0; r < n; ++r) {
        for (int l : lemma_top[r]) {
          rows.push_back(static_cast<int>(r));
          lemmas.push_back(l);
        }
      }
      factor_lp = log_softmax(model::factor_logits(model, gather_rows(step.readout, rows), lemmas));
    } else {
      factor_lp = log_softmax(step.factor_logits);
    }

    std::vector<Candidate> pool;
    std::size_t dep_row = 0;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<Candidate> mine;
      const auto& base = live[r].hyp;
      std::vector<int> shared_factors;
      if (!model.config.dependency) shared_factors = top_ids(row_of(factor_lp, r), m);
      for (int l : lemma_top[r]) {
        const std::size_t frow = model.config.dependency ? dep_row++ : r;
        const auto fl = row_of(factor_lp, frow);
        const auto factors = model.config.dependency ? top_ids(fl, m) : shared_factors;
        const double lp = row_of(lemma_lp, r)[l];
        for (int f : factors) {
          Candidate c{base, r};
          c.hyp.lemmas.push_back(l);
          c.hyp.factors.push_back(f);
          c.hyp.score += lp + fl[f];
          c.hyp.finished = l == kEos;
          mine.push_back(std::move(c));
        }
      }
      const std::size_t keep = std::min(k, mine.size());
      std::partial_sort(mine.begin(), mine.begin() + static_cast<std::ptrdiff_t>(keep), mine.end(),
                        by_score);
      mine.resize(keep);
      for (auto& c : mine) pool.push_back(std::move(c));
    }

    const std::size_t room = k - completed.size();
    const std::size_t keep = std::min(room, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                      by_score);
    pool.resize(keep);

    std::vector<Live> next;
    std::vector<int> parents, lemmas, factors;
    for (auto& c : pool) {
      if (c.hyp.finished) {
        completed.push_back(std::move(c.hyp));
        continue;
      }
      parents.push_back(static_cast<int>(c.parent));
      lemmas.push_back(c.hyp.lemmas.back());
      factors.push_back(c.hyp.factors.back());
      next.push_back(Live{std::move(c.hyp), next.size()});
    }
    if (completed.size() >= k) next.clear();
    if (!next.empty()) {
      hidden = gather_rows(step.hidden, parents);
      feedback = model::feedback_embed(model, lemmas, factors);
    }
    live = std::move(next);
  }

  BeamResult result;
  if (!completed.empty()) {
    result.hypotheses = std::move(completed);
  } else {
    result.unfinished = true;
    for (auto& l : live) result.hypotheses.push_back(std::move(l.hyp));
  }
  std::sort(result.hypotheses.begin(), result.hypotheses.end(), by_rank);
  return result;
}

double score_sequence(const model::Model& model, std::span<const int> source,
                      std::span<const int> lemmas, std::span<const int> factors) {
  if (lemmas.size() != factors.size()) {
    throw ContractError("score_sequence: lemma and factor sequences differ in length");
  }
  auto enc = model::encode(model, source);
  Tensor hidden = model::initial_state(model, enc);
  Tensor feedback = model::start_feedback(model, 1);
  double total = 0.0;
  for (std::size_t t = 0; t < lemmas.size(); ++t) {
    const std::vector<int> l = {lemmas[t]}, f = {factors[t]};
    auto step = model::decode_step(model, hidden, feedback, enc, l);
    total += log_softmax(step.lemma_logits).values()[lemmas[t]];
    total += log_softmax(step.factor_logits).values()[factors[t]];
    hidden = step.hidden;
    feedback = model::feedback_embed(model, l, f);
  }
  return total;
}

}  // namespace fnmt::decoding

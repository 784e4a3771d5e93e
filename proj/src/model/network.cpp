#include "fnmt/error.hpp"
#include "fnmt/model.hpp"

namespace fnmt::model {

namespace {

Tensor column_tensor(const std::vector<double>& values) {
  return Tensor({values.size(), 1}, values);
}

// z·h + (1 − z)·candidate, with the input projections precomputed.
Tensor gru_step(const GruParams& p, const Tensor& x_gates, const Tensor& x_cand, const Tensor& h) {
  const std::size_t hid = h.cols();
  Tensor gates = sigmoid(add_bias(add(x_gates, matmul(h, p.u_gates)), p.b_gates));
  Tensor reset = slice_cols(gates, 0, hid);
  Tensor update = slice_cols(gates, hid, hid);
  Tensor cand = tanh(add_bias(add(x_cand, mul(reset, matmul(h, p.u_cand))), p.b_cand));
  return add(cand, mul(update, sub(h, cand)));
}

Tensor gru_step(const GruParams& p, const Tensor& x, const Tensor& h) {
  return gru_step(p, matmul(x, p.w_gates), matmul(x, p.w_cand), h);
}

std::vector<Tensor> run_direction(const GruParams& p, const std::vector<Tensor>& embedded,
                                  const corpus::IndexMatrix& source, std::size_t hid,
                                  bool reverse) {
  const std::size_t len = embedded.size();
  std::vector<Tensor> states(len);
  Tensor h = Tensor::zeros({source.rows, hid});
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    Tensor next = gru_step(p, embedded[t], h);
    // Padded positions carry the previous state through unchanged.
    h = add(h, scale_rows(sub(next, h), column_tensor(source.mask_column(t))));
    states[t] = h;
  }
  return states;
}

}  // namespace

EncoderOutput encode(const Model& model, const corpus::IndexMatrix& source) {
  if (source.rows == 0 || source.cols == 0) throw ContractError("encode: empty source batch");
  const auto& p = model.params;
  const std::size_t hid = model.config.hid_dim;
  std::vector<Tensor> embedded;
  for (std::size_t t = 0; t < source.cols; ++t) {
    embedded.push_back(gather_rows(p.src_embed, source.column(t)));
  }
  auto fwd = run_direction(p.enc_forward, embedded, source, hid, false);
  auto bwd = run_direction(p.enc_backward, embedded, source, hid, true);
  EncoderOutput out;
  out.batch = source.rows;
  out.length = source.cols;
  out.mask = source.mask;
  for (std::size_t t = 0; t < source.cols; ++t) {
    out.annotations.push_back(concat_cols({fwd[t], bwd[t]}));
    out.keys.push_back(add_bias(matmul(out.annotations.back(), p.att_u), p.att_b));
  }
  return out;
}

EncoderOutput encode(const Model& model, std::span<const int> source) {
  if (source.empty()) throw ContractError("encode: empty source sentence");
  return encode(model, corpus::pad_sequences({std::vector<int>(source.begin(), source.end())}));
}

EncoderOutput EncoderOutput::tile(std::size_t rows) const {
  const std::vector<int> zeros(rows, 0);
  EncoderOutput out;
  out.batch = rows;
  out.length = length;
  for (const auto& a : annotations) out.annotations.push_back(gather_rows(a, zeros));
  for (const auto& k : keys) out.keys.push_back(gather_rows(k, zeros));
  out.mask.reserve(rows * length);
  for (std::size_t r = 0; r < rows; ++r) out.mask.insert(out.mask.end(), mask.begin(), mask.begin() + length);
  return out;
}

Attention attend(const Model& model, const Tensor& query, const EncoderOutput& enc) {
  if (enc.length == 0) throw ContractError("attend: empty encoder output");
  const auto& p = model.params;
  Tensor projected = matmul(query, p.att_w);
  std::vector<Tensor> scores;
  scores.reserve(enc.length);
  for (const auto& key : enc.keys) scores.push_back(matmul(tanh(add(projected, key)), p.att_v));
  Attention out;
  out.weights = masked_softmax(concat_cols(scores), enc.mask);
  for (std::size_t i = 0; i < enc.length; ++i) {
    Tensor part = scale_rows(enc.annotations[i], slice_cols(out.weights, i, 1));
    out.context = i == 0 ? part : add(out.context, part);
  }
  return out;
}

Tensor initial_state(const Model& model, const EncoderOutput& enc) {
  const auto& p = model.params;
  Tensor total;
  std::vector<double> inv_len(enc.batch, 0.0);
  for (std::size_t i = 0; i < enc.length; ++i) {
    std::vector<double> m(enc.batch);
    for (std::size_t r = 0; r < enc.batch; ++r) {
      m[r] = enc.mask[r * enc.length + i];
      inv_len[r] += m[r];
    }
    Tensor part = scale_rows(enc.annotations[i], column_tensor(m));
    total = i == 0 ? part : add(total, part);
  }
  for (double& v : inv_len) v = 1.0 / v;
  Tensor mean = scale_rows(total, column_tensor(inv_len));
  return tanh(add_bias(matmul(mean, p.init_w), p.init_b));
}

Tensor feedback_embed(const Model& model, std::span<const int> lemmas, std::span<const int> factors) {
  const auto& p = model.params;
  Tensor lemma = gather_rows(p.lemma_embed, lemmas);
  switch (model.config.feedback) {
    case FeedbackMode::kLemma:
      return lemma;
    case FeedbackMode::kSum:
      return add(lemma, gather_rows(p.factor_embed, factors));
    case FeedbackMode::kLinear:
      return add(matmul(lemma, p.feedback_w_lemma),
                 matmul(gather_rows(p.factor_embed, factors), p.feedback_w_factor));
    case FeedbackMode::kTanh:
      return tanh(add(matmul(lemma, p.feedback_w_lemma),
                      matmul(gather_rows(p.factor_embed, factors), p.feedback_w_factor)));
  }
  throw ConfigError("unknown feedback mode");
}

Tensor start_feedback(const Model& model, std::size_t batch) {
  return Tensor::zeros({batch, model.config.emb_dim});
}

Tensor factor_logits(const Model& model, const Tensor& readout, std::span<const int> lemmas) {
  const auto& p = model.params;
  Tensor input = readout;
  if (model.config.dependency) {
    if (lemmas.size() != readout.rows()) {
      throw ContractError("dependency model needs one lemma per readout row");
    }
    input = add(readout, matmul(gather_rows(p.lemma_embed, lemmas), p.dep_transform));
  }
  return add_bias(matmul(input, p.factor_w), p.factor_b);
}

StepOutput decode_step(const Model& model, const Tensor& prev_hidden, const Tensor& feedback,
                       const EncoderOutput& enc, std::span<const int> factor_lemmas) {
  const auto& p = model.params;
  StepOutput out;
  Tensor proposal = gru_step(p.dec_gru1, feedback, prev_hidden);
  out.attention = attend(model, proposal, enc);
  out.hidden = gru_step(p.dec_gru2, out.attention.context, proposal);
  out.readout = concat_cols({out.hidden, out.attention.context, feedback});
  out.lemma_logits = add_bias(matmul(out.readout, p.lemma_w), p.lemma_b);
  if (!model.config.dependency || !factor_lemmas.empty()) {
    out.factor_logits = factor_logits(model, out.readout, factor_lemmas);
  }
  return out;
}

Tensor sequence_loss(const Model& model, const corpus::Batch& batch) {
  const auto& lemmas = batch.lemmas;
  const auto& factors = batch.factors;
  if (lemmas.rows != batch.source.rows || factors.rows != lemmas.rows ||
      factors.cols != lemmas.cols || factors.mask != lemmas.mask) {
    throw ContractError("sequence_loss: lemma and factor streams must share shape and mask");
  }
  const double tokens = batch.target_tokens();
  if (tokens <= 0.0) throw ContractError("sequence_loss: batch has no target tokens");
  const double lambda = model.config.factor_weight;
  EncoderOutput enc = encode(model, batch.source);
  Tensor hidden = initial_state(model, enc);
  Tensor total;
  for (std::size_t t = 0; t < lemmas.cols; ++t) {
    const auto weights = lemmas.mask_column(t);
    const auto gold_lemmas = lemmas.column(t);
    const auto gold_factors = factors.column(t);
    Tensor feedback = t == 0 ? start_feedback(model, lemmas.rows)
                             : feedback_embed(model, lemmas.column(t - 1), factors.column(t - 1));
    StepOutput step = decode_step(model, hidden, feedback, enc,
                                  model.config.dependency ? std::span<const int>(gold_lemmas)
                                                          : std::span<const int>());
    Tensor term = pick_weighted_sum(log_softmax(step.lemma_logits), gold_lemmas, weights);
    if (lambda != 0.0) {
      term = add(term, scale(pick_weighted_sum(log_softmax(step.factor_logits), gold_factors,
                                               weights),
                             lambda));
    }
    total = t == 0 ? term : add(total, term);
    hidden = step.hidden;
  }
  return scale(total, -1.0 / tokens);
}

}  // namespace fnmt::model

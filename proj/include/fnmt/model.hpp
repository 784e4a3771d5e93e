#pragma once

// Factored attention encoder-decoder.
//
//   encoder   bidirectional GRU over source embeddings; annotation h_i is
//             [forward_i ‖ backward_i] (2·hid)
//   decoder   conditional GRU: s' = GRU1(feedback, s_prev), attention over
//             annotations queried by s', s = GRU2(context, s')
//   readout   r = [s ‖ context ‖ feedback]
//   heads     lemma logits = r·W_lemma + b_lemma
//             factor logits = (r [+ E_L[lemma]·T_dep]) · W_factor + b_factor
//
// All functions are batched: row r of every matrix belongs to sentence r.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnmt/corpus.hpp"
#include "fnmt/tensor.hpp"

namespace fnmt::model {

/// What the decoder receives about the previous output step.
enum class FeedbackMode {
  kLemma,   // E_L[y]
  kSum,     // E_L[y] + E_F[y]
  kLinear,  // E_L[y]·W_L + E_F[y]·W_F
  kTanh,    // tanh(E_L[y]·W_L + E_F[y]·W_F)
};

std::string_view to_string(FeedbackMode mode);
// Throws ConfigError on unknown names.
FeedbackMode parse_feedback_mode(std::string_view name);

struct ModelConfig {
  std::size_t emb_dim = 620;
  std::size_t hid_dim = 1000;
  std::size_t src_vocab = 0;
  std::size_t lemma_vocab = 0;
  std::size_t factor_vocab = 0;
  FeedbackMode feedback = FeedbackMode::kLemma;
  bool dependency = false;
  // Weight of the factor cross-entropy in the joint loss.
  double factor_weight = 1.0;

  std::size_t annotation_dim() const { return 2 * hid_dim; }
  std::size_t readout_dim() const { return hid_dim + annotation_dim() + emb_dim; }
  void validate() const;
};

struct GruParams {
  Tensor w_gates;  // [in × 2·hid]  reset | update
  Tensor u_gates;  // [hid × 2·hid]
  Tensor b_gates;  // [2·hid]
  Tensor w_cand;   // [in × hid]
  Tensor u_cand;   // [hid × hid]
  Tensor b_cand;   // [hid]
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct ModelParams {
  Tensor src_embed;  // [V_src × emb]
  GruParams enc_forward;
  GruParams enc_backward;
  Tensor init_w;  // [2·hid × hid]
  Tensor init_b;
  GruParams dec_gru1;  // input: feedback (emb)
  Tensor att_w;        // [hid × hid]
  Tensor att_u;        // [2·hid × hid]
  Tensor att_b;        // [hid]
  Tensor att_v;        // [hid × 1]
  GruParams dec_gru2;  // input: context (2·hid)
  Tensor lemma_w;      // [readout × V_lem]
  Tensor lemma_b;
  Tensor factor_w;  // [readout × V_fac]
  Tensor factor_b;
  Tensor lemma_embed;        // E_L [V_lem × emb]
  Tensor factor_embed;       // E_F [V_fac × emb]
  Tensor feedback_w_lemma;   // W_L [emb × emb]
  Tensor feedback_w_factor;  // W_F [emb × emb]
  Tensor dep_transform;      // T_dep [emb × readout]

  // Stable order; names are the checkpoint block names.
  std::vector<NamedTensor> named() const;
  std::vector<Tensor> tensors() const;
  // Deep copy.
  ModelParams clone() const;
};

// Expected shape of every parameter block.
std::vector<std::pair<std::string, Shape>> parameter_shapes(const ModelConfig& config);
// Throws DimensionError naming the first inconsistent block.
void validate_params(const ModelConfig& config, const ModelParams& params);

// Xavier-uniform matrices, zero biases; deterministic per seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);
// Builds parameters from named blocks (checkpoint loading).
ModelParams params_from_named(const ModelConfig& config, const std::vector<NamedTensor>& blocks);

struct Model {
  ModelConfig config;
  ModelParams params;

  void set_trainable(bool on) const;
};

struct EncoderOutput {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<Tensor> annotations;  // per position, [batch × 2·hid]
  std::vector<Tensor> keys;         // per position, annotations·U_att + b_att
  std::vector<double> mask;         // [batch × length] row-major

  // Repeats row 0 `rows` times (one sentence decoded with many hypotheses).
  EncoderOutput tile(std::size_t rows) const;
};

EncoderOutput encode(const Model& model, const corpus::IndexMatrix& source);
EncoderOutput encode(const Model& model, std::span<const int> source);

struct Attention {
  Tensor context;  // [batch × 2·hid]
  Tensor weights;  // [batch × length], zero on masked positions
};

Attention attend(const Model& model, const Tensor& query, const EncoderOutput& enc);

// Decoder state at step 0: tanh of the projected mean annotation.
Tensor initial_state(const Model& model, const EncoderOutput& enc);

Tensor feedback_embed(const Model& model, std::span<const int> lemmas, std::span<const int> factors);
// The feedback used before any output exists.
Tensor start_feedback(const Model& model, std::size_t batch);

struct StepOutput {
  Tensor hidden;
  Tensor readout;
  Tensor lemma_logits;
  // Defined unless the dependency model is on and no lemma was supplied.
  Tensor factor_logits;
  Attention attention;
};

// One conditional-GRU step. With the dependency model, `factor_lemmas`
// selects the lemma whose embedding conditions the factor head.
StepOutput decode_step(const Model& model, const Tensor& prev_hidden, const Tensor& feedback,
                       const EncoderOutput& enc, std::span<const int> factor_lemmas = {});

// Factor head on a readout; lemma ids are used only by the dependency model.
Tensor factor_logits(const Model& model, const Tensor& readout, std::span<const int> lemmas);

// Teacher-forced joint loss: mean over real target tokens of
// CE(lemma) + factor_weight · CE(factor).
Tensor sequence_loss(const Model& model, const corpus::Batch& batch);

}  // namespace fnmt::model

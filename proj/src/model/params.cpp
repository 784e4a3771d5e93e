#include <cmath>
#include <map>

#include "fnmt/error.hpp"
#include "fnmt/model.hpp"
#include "fnmt/random.hpp"

namespace fnmt::model {

namespace {

void add_gru(std::vector<NamedTensor>& out, const std::string& prefix, const GruParams& g) {
  out.push_back({prefix + ".w_gates", g.w_gates});
  out.push_back({prefix + ".u_gates", g.u_gates});
  out.push_back({prefix + ".b_gates", g.b_gates});
  out.push_back({prefix + ".w_cand", g.w_cand});
  out.push_back({prefix + ".u_cand", g.u_cand});
  out.push_back({prefix + ".b_cand", g.b_cand});
}

void gru_shapes(std::vector<std::pair<std::string, Shape>>& out, const std::string& prefix,
                std::size_t in, std::size_t hid) {
  out.emplace_back(prefix + ".w_gates", Shape{in, 2 * hid});
  out.emplace_back(prefix + ".u_gates", Shape{hid, 2 * hid});
  out.emplace_back(prefix + ".b_gates", Shape{2 * hid});
  out.emplace_back(prefix + ".w_cand", Shape{in, hid});
  out.emplace_back(prefix + ".u_cand", Shape{hid, hid});
  out.emplace_back(prefix + ".b_cand", Shape{hid});
}

GruParams gru_from(std::map<std::string, Tensor>& blocks, const std::string& prefix) {
  return GruParams{blocks.at(prefix + ".w_gates"), blocks.at(prefix + ".u_gates"),
                   blocks.at(prefix + ".b_gates"), blocks.at(prefix + ".w_cand"),
                   blocks.at(prefix + ".u_cand"),  blocks.at(prefix + ".b_cand")};
}

std::string shape_text(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out + "]";
}

}  // namespace

std::string_view to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::kLemma: return "lemma";
    case FeedbackMode::kSum: return "sum";
    case FeedbackMode::kLinear: return "linear";
    case FeedbackMode::kTanh: return "tanh";
  }
  return "lemma";
}

FeedbackMode parse_feedback_mode(std::string_view name) {
  if (name == "lemma") return FeedbackMode::kLemma;
  if (name == "sum") return FeedbackMode::kSum;
  if (name == "linear") return FeedbackMode::kLinear;
  if (name == "tanh") return FeedbackMode::kTanh;
  throw ConfigError("unknown feedback mode '" + std::string(name) +
                    "' (expected lemma, sum, linear or tanh)");
}

void ModelConfig::validate() const {
  if (emb_dim < 1 || hid_dim < 1) throw ConfigError("model dimensions must be positive");
  if (src_vocab < 1 || lemma_vocab < 1 || factor_vocab < 1) {
    throw ConfigError("vocabulary sizes must be positive");
  }
  if (!(factor_weight >= 0.0) || !std::isfinite(factor_weight)) {
    throw ConfigError("factor loss weight must be a finite nonnegative number");
  }
}

std::vector<NamedTensor> ModelParams::named() const {
  std::vector<NamedTensor> out;
  out.push_back({"src_embed", src_embed});
  add_gru(out, "enc_forward", enc_forward);
  add_gru(out, "enc_backward", enc_backward);
  out.push_back({"init_w", init_w});
  out.push_back({"init_b", init_b});
  add_gru(out, "dec_gru1", dec_gru1);
  out.push_back({"att_w", att_w});
  out.push_back({"att_u", att_u});
  out.push_back({"att_b", att_b});
  out.push_back({"att_v", att_v});
  add_gru(out, "dec_gru2", dec_gru2);
  out.push_back({"lemma_w", lemma_w});
  out.push_back({"lemma_b", lemma_b});
  out.push_back({"factor_w", factor_w});
  out.push_back({"factor_b", factor_b});
  out.push_back({"lemma_embed", lemma_embed});
  out.push_back({"factor_embed", factor_embed});
  out.push_back({"feedback_w_lemma", feedback_w_lemma});
  out.push_back({"feedback_w_factor", feedback_w_factor});
  out.push_back({"dep_transform", dep_transform});
  return out;
}

std::vector<Tensor> ModelParams::tensors() const {
  std::vector<Tensor> out;
  for (auto& n : named()) out.push_back(n.tensor);
  return out;
}

std::vector<std::pair<std::string, Shape>> parameter_shapes(const ModelConfig& c) {
  const std::size_t e = c.emb_dim, h = c.hid_dim, a = c.annotation_dim(), r = c.readout_dim();
  std::vector<std::pair<std::string, Shape>> out;
  out.emplace_back("src_embed", Shape{c.src_vocab, e});
  gru_shapes(out, "enc_forward", e, h);
  gru_shapes(out, "enc_backward", e, h);
  out.emplace_back("init_w", Shape{a, h});
  out.emplace_back("init_b", Shape{h});
  gru_shapes(out, "dec_gru1", e, h);
  out.emplace_back("att_w", Shape{h, h});
  out.emplace_back("att_u", Shape{a, h});
  out.emplace_back("att_b", Shape{h});
  out.emplace_back("att_v", Shape{h, 1});
  gru_shapes(out, "dec_gru2", a, h);
  out.emplace_back("lemma_w", Shape{r, c.lemma_vocab});
  out.emplace_back("lemma_b", Shape{c.lemma_vocab});
  out.emplace_back("factor_w", Shape{r, c.factor_vocab});
  out.emplace_back("factor_b", Shape{c.factor_vocab});
  out.emplace_back("lemma_embed", Shape{c.lemma_vocab, e});
  out.emplace_back("factor_embed", Shape{c.factor_vocab, e});
  out.emplace_back("feedback_w_lemma", Shape{e, e});
  out.emplace_back("feedback_w_factor", Shape{e, e});
  out.emplace_back("dep_transform", Shape{e, r});
  return out;
}

void validate_params(const ModelConfig& config, const ModelParams& params) {
  config.validate();
  const auto expected = parameter_shapes(config);
  const auto actual = params.named();
  if (expected.size() != actual.size()) throw DimensionError("parameter block count mismatch");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!actual[i].tensor.defined() || actual[i].tensor.shape() != expected[i].second) {
      throw DimensionError("parameter '" + expected[i].first + "' should be " +
                           shape_text(expected[i].second) + ", found " +
                           (actual[i].tensor.defined() ? shape_text(actual[i].tensor.shape())
                                                       : std::string("nothing")));
    }
  }
}

ModelParams params_from_named(const ModelConfig& config, const std::vector<NamedTensor>& blocks) {
  std::map<std::string, Tensor> by_name;
  for (const auto& b : blocks) {
    if (!by_name.emplace(b.name, b.tensor).second) {
      throw ConsistencyError("duplicate parameter block '" + b.name + "'");
    }
  }
  for (const auto& [name, shape] : parameter_shapes(config)) {
    if (!by_name.count(name)) throw ConsistencyError("missing parameter block '" + name + "'");
  }
  if (by_name.size() != parameter_shapes(config).size()) {
    throw ConsistencyError("unexpected extra parameter blocks");
  }
  ModelParams p;
  p.src_embed = by_name.at("src_embed");
  p.enc_forward = gru_from(by_name, "enc_forward");
  p.enc_backward = gru_from(by_name, "enc_backward");
  p.init_w = by_name.at("init_w");
  p.init_b = by_name.at("init_b");
  p.dec_gru1 = gru_from(by_name, "dec_gru1");
  p.att_w = by_name.at("att_w");
  p.att_u = by_name.at("att_u");
  p.att_b = by_name.at("att_b");
  p.att_v = by_name.at("att_v");
  p.dec_gru2 = gru_from(by_name, "dec_gru2");
  p.lemma_w = by_name.at("lemma_w");
  p.lemma_b = by_name.at("lemma_b");
  p.factor_w = by_name.at("factor_w");
  p.factor_b = by_name.at("factor_b");
  p.lemma_embed = by_name.at("lemma_embed");
  p.factor_embed = by_name.at("factor_embed");
  p.feedback_w_lemma = by_name.at("feedback_w_lemma");
  p.feedback_w_factor = by_name.at("feedback_w_factor");
  p.dep_transform = by_name.at("dep_transform");
  validate_params(config, p);
  return p;
}

ModelParams ModelParams::clone() const {
  std::vector<NamedTensor> copies;
  for (const auto& n : named()) copies.push_back({n.name, n.tensor.clone()});
  ModelParams p;
  // Shapes are already known to be consistent; rebuild by position.
  std::size_t i = 0;
  auto next = [&] { return copies[i++].tensor; };
  auto gru = [&] {
    GruParams g;
    g.w_gates = next();
    g.u_gates = next();
    g.b_gates = next();
    g.w_cand = next();
    g.u_cand = next();
    g.b_cand = next();
    return g;
  };
  p.src_embed = next();
  p.enc_forward = gru();
  p.enc_backward = gru();
  p.init_w = next();
  p.init_b = next();
  p.dec_gru1 = gru();
  p.att_w = next();
  p.att_u = next();
  p.att_b = next();
  p.att_v = next();
  p.dec_gru2 = gru();
  p.lemma_w = next();
  p.lemma_b = next();
  p.factor_w = next();
  p.factor_b = next();
  p.lemma_embed = next();
  p.factor_embed = next();
  p.feedback_w_lemma = next();
  p.feedback_w_factor = next();
  p.dep_transform = next();
  return p;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::vector<NamedTensor> blocks;
  for (const auto& [name, shape] : parameter_shapes(config)) {
    Tensor t = Tensor::zeros(shape);
    if (shape.size() == 2) {
      const double a = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (double& v : t.mutable_values()) v = rng.uniform(-a, a);
    }
    blocks.push_back({name, t});
  }
  return params_from_named(config, blocks);
}

void Model::set_trainable(bool on) const {
  for (auto t : params.tensors()) t.set_requires_grad(on);
}

}  // namespace fnmt::model

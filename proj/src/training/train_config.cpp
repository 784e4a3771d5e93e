#include <charconv>
#include <cmath>

#include "fnmt/error.hpp"
#include "fnmt/training.hpp"

namespace fnmt::training {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size() && std::isfinite(out)) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void TrainConfig::apply_desk_scale() {
  emb_dim = 32;
  hid_dim = 64;
  batch_size = 8;
  beam_size = 4;
}

void TrainConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(emb_dim, "emb_dim");
  positive(hid_dim, "hid_dim");
  positive(source_shortlist, "source_shortlist");
  positive(lemma_shortlist, "lemma_shortlist");
  positive(batch_size, "batch_size");
  positive(validation_interval, "validation_interval");
  positive(patience, "patience");
  positive(max_len, "max_len");
  positive(max_epochs, "max_epochs");
  positive(beam_size, "beam_size");
  positive(max_output_len, "max_output_len");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (!(factor_weight >= 0.0)) throw ConfigError("factor_weight must be nonnegative");
  if (stop_bleu < 0.0 || stop_bleu > 100.0) throw ConfigError("stop_bleu must lie in [0, 100]");
}

void TrainConfig::set(const std::string& key, const std::string& v) {
  if (key == "emb_dim") emb_dim = to_size(key, v);
  else if (key == "hid_dim") hid_dim = to_size(key, v);
  else if (key == "source_shortlist") source_shortlist = to_size(key, v);
  else if (key == "lemma_shortlist") lemma_shortlist = to_size(key, v);
  else if (key == "batch_size") batch_size = to_size(key, v);
  else if (key == "clip_norm") clip_norm = to_real(key, v);
  else if (key == "validation_interval") validation_interval = to_size(key, v);
  else if (key == "patience") patience = to_size(key, v);
  else if (key == "max_len") max_len = to_size(key, v);
  else if (key == "max_epochs") max_epochs = to_size(key, v);
  else if (key == "warmup_epochs") warmup_epochs = to_size(key, v);
  else if (key == "stop_bleu") stop_bleu = to_real(key, v);
  else if (key == "beam_size") beam_size = to_size(key, v);
  else if (key == "per_head_candidates") per_head_candidates = to_size(key, v);
  else if (key == "max_output_len") max_output_len = to_size(key, v);
  else if (key == "feedback") feedback = model::parse_feedback_mode(v);
  else if (key == "dependency") dependency = to_bool(key, v);
  else if (key == "factor_weight") factor_weight = to_real(key, v);
  else if (key == "seed") seed = to_size(key, v);
  else throw ConfigError("unknown training option '" + key + "'");
}

TrainConfig TrainConfig::parse(std::string_view text, const std::string& origin) {
  TrainConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

std::string TrainConfig::to_text() const {
  std::string out;
  auto put = [&](const char* k, const std::string& v) { out += std::string(k) + "=" + v + "\n"; };
  put("emb_dim", std::to_string(emb_dim));
  put("hid_dim", std::to_string(hid_dim));
  put("source_shortlist", std::to_string(source_shortlist));
  put("lemma_shortlist", std::to_string(lemma_shortlist));
  put("batch_size", std::to_string(batch_size));
  put("clip_norm", real_text(clip_norm));
  put("validation_interval", std::to_string(validation_interval));
  put("patience", std::to_string(patience));
  put("max_len", std::to_string(max_len));
  put("max_epochs", std::to_string(max_epochs));
  put("warmup_epochs", std::to_string(warmup_epochs));
  put("stop_bleu", real_text(stop_bleu));
  put("beam_size", std::to_string(beam_size));
  put("per_head_candidates", std::to_string(per_head_candidates));
  put("max_output_len", std::to_string(max_output_len));
  put("feedback", std::string(model::to_string(feedback)));
  put("dependency", dependency ? "true" : "false");
  put("factor_weight", real_text(factor_weight));
  put("seed", std::to_string(seed));
  return out;
}

}  // namespace fnmt::training

#include "fnmt/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>

#include "fnmt/error.hpp"

namespace fnmt::model {

namespace {

constexpr std::string_view kMagic = "FNMT checkpoint v1";

void append_double(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double read_double(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

void append_vocab(std::string& out, const std::string& name, const corpus::Vocabulary& v) {
  const auto tokens = v.shortlist();
  out += "vocab " + name + " " + std::to_string(tokens.size()) + "\n";
  for (const auto& t : tokens) out += t + "\n";
}

class Reader {
 public:
  Reader(std::string_view bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

  bool done() const { return pos_ >= bytes_.size(); }

  std::string_view line() {
    if (done()) fail("unexpected end of file");
    const auto nl = bytes_.find('\n', pos_);
    if (nl == std::string_view::npos) fail("unterminated line");
    auto out = bytes_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    ++line_no_;
    return out;
  }

  std::string_view raw(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail("truncated parameter data");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(origin_ + ": checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::string_view bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::size_t parse_size(const Reader& r, std::string_view text) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    r.fail("expected a nonnegative integer, found '" + std::string(text) + "'");
  }
  return v;
}

double parse_real(const Reader& r, const std::string& text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  r.fail("expected a number, found '" + text + "'");
}

bool parse_bool(const Reader& r, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  r.fail("expected true or false, found '" + text + "'");
}

std::string real_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  validate_params(c.config, c.params);
  std::string out(kMagic);
  out += "\n";
  out += "emb_dim=" + std::to_string(c.config.emb_dim) + "\n";
  out += "hid_dim=" + std::to_string(c.config.hid_dim) + "\n";
  out += "src_vocab=" + std::to_string(c.config.src_vocab) + "\n";
  out += "lemma_vocab=" + std::to_string(c.config.lemma_vocab) + "\n";
  out += "factor_vocab=" + std::to_string(c.config.factor_vocab) + "\n";
  out += "feedback=" + std::string(to_string(c.config.feedback)) + "\n";
  out += "dependency=" + std::string(c.config.dependency ? "true" : "false") + "\n";
  out += "factor_weight=" + real_text(c.config.factor_weight) + "\n";
  out += "word_level=" + std::string(c.word_level ? "true" : "false") + "\n";
  out += "source_vocab_hash=" + hex64(c.source_vocab.fingerprint()) + "\n";
  out += "lemma_vocab_hash=" + hex64(c.lemma_vocab.fingerprint()) + "\n";
  out += "factor_vocab_hash=" + hex64(c.factor_vocab.fingerprint()) + "\n";
  out += "lexicon_hash=" + c.lexicon_hash + "\n";
  for (const auto& [k, v] : c.info) out += "info." + k + "=" + v + "\n";
  append_vocab(out, "source", c.source_vocab);
  append_vocab(out, "lemma", c.lemma_vocab);
  append_vocab(out, "factor", c.factor_vocab);
  for (const auto& [name, t] : c.params.named()) {
    out += "param " + name + " " + std::to_string(t.shape().size());
    for (auto d : t.shape()) out += " " + std::to_string(d);
    out += "\n";
    for (double v : t.values()) append_double(out, v);
  }
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (r.line() != kMagic) r.fail("not an FNMT checkpoint (bad header)");
  Checkpoint c;
  std::map<std::string, std::string> kv;
  std::map<std::string, corpus::Vocabulary> vocabs;
  std::vector<NamedTensor> blocks;
  bool ended = false;
  while (!ended) {
    const std::string line(r.line());
    if (line == "end") {
      ended = true;
    } else if (line.rfind("vocab ", 0) == 0) {
      const auto parts = split_tokens(line);
      if (parts.size() != 3) r.fail("malformed vocab header");
      const std::size_t n = parse_size(r, parts[2]);
      std::vector<std::string> tokens;
      for (std::size_t i = 0; i < n; ++i) tokens.emplace_back(r.line());
      vocabs[parts[1]] = corpus::Vocabulary::from_tokens(tokens);
    } else if (line.rfind("param ", 0) == 0) {
      const auto parts = split_tokens(line);
      if (parts.size() < 3) r.fail("malformed param header");
      const std::size_t rank = parse_size(r, parts[2]);
      if (rank < 1 || rank > 2 || parts.size() != 3 + rank) r.fail("bad rank for " + parts[1]);
      Shape shape;
      std::size_t count = 1;
      for (std::size_t i = 0; i < rank; ++i) {
        shape.push_back(parse_size(r, parts[3 + i]));
        count *= shape.back();
      }
      const auto data = r.raw(count * 8);
      std::vector<double> values(count);
      for (std::size_t i = 0; i < count; ++i) values[i] = read_double(data.data() + 8 * i);
      blocks.push_back({parts[1], Tensor(shape, std::move(values))});
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) r.fail("expected key=value, found '" + line + "'");
      kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  if (!r.done()) r.fail("trailing bytes after end marker");

  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) r.fail("missing config key '" + key + "'");
    return it->second;
  };
  c.config.emb_dim = parse_size(r, need("emb_dim"));
  c.config.hid_dim = parse_size(r, need("hid_dim"));
  c.config.src_vocab = parse_size(r, need("src_vocab"));
  c.config.lemma_vocab = parse_size(r, need("lemma_vocab"));
  c.config.factor_vocab = parse_size(r, need("factor_vocab"));
  c.config.feedback = parse_feedback_mode(need("feedback"));
  c.config.dependency = parse_bool(r, need("dependency"));
  c.config.factor_weight = parse_real(r, need("factor_weight"));
  c.word_level = parse_bool(r, need("word_level"));
  c.lexicon_hash = need("lexicon_hash");
  for (const auto& [k, v] : kv) {
    if (k.rfind("info.", 0) == 0) c.info[k.substr(5)] = v;
  }

  auto take_vocab = [&](const std::string& name, std::size_t expected_size, bool check_size) {
    auto it = vocabs.find(name);
    if (it == vocabs.end()) r.fail("missing " + name + " vocabulary");
    const auto& v = it->second;
    const auto& recorded = need(name + "_vocab_hash");
    if (hex64(v.fingerprint()) != recorded) {
      throw CompatibilityError(origin + ": " + name + " vocabulary hash " +
                               hex64(v.fingerprint()) + " does not match recorded " + recorded);
    }
    if (check_size && v.size() != expected_size) {
      throw CompatibilityError(origin + ": " + name + " vocabulary has " +
                               std::to_string(v.size()) + " entries, configuration says " +
                               std::to_string(expected_size));
    }
    return v;
  };
  c.source_vocab = take_vocab("source", c.config.src_vocab, true);
  c.lemma_vocab = take_vocab("lemma", c.config.lemma_vocab, true);
  c.factor_vocab = take_vocab("factor", c.config.factor_vocab, !c.word_level);
  try {
    c.params = params_from_named(c.config, blocks);
  } catch (const DimensionError& e) {
    throw CompatibilityError(origin + ": " + e.what());
  } catch (const ConsistencyError& e) {
    throw CompatibilityError(origin + ": " + e.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path), path.string());
}

}  // namespace fnmt::model

#include <algorithm>
#include <limits>
#include <map>

#include "fnmt/corpus.hpp"
#include "fnmt/error.hpp"

namespace fnmt::corpus {

Vocabulary::Vocabulary() {
  add(std::string(kUnkToken));
  add(std::string(kBosToken));
  add(std::string(kEosToken));
}

void Vocabulary::add(std::string token) {
  const int id = static_cast<int>(tokens_.size());
  if (!index_.emplace(token, id).second) {
    throw ConsistencyError("duplicate vocabulary token '" + token + "'");
  }
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& corpus, std::size_t shortlist) {
  if (shortlist < 1) throw ConfigError("vocabulary shortlist size must be at least 1");
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus)
    for (const auto& t : s) ++counts[t];
  Vocabulary reserved;
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (!reserved.contains(tok)) ranked.emplace_back(tok, n);
  }
  // counts is ordered, so a stable sort keeps lexicographic order among ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > shortlist) ranked.resize(shortlist);
  Vocabulary v;
  for (auto& [tok, n] : ranked) v.add(tok);
  return v;
}

Vocabulary Vocabulary::build_full(const std::vector<Sentence>& corpus) {
  return build(corpus, std::numeric_limits<std::size_t>::max());
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const auto& t : tokens) v.add(t);
  return v;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

int Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractError("vocabulary index " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocabulary::shortlist() const {
  return {tokens_.begin() + kReserved, tokens_.end()};
}

std::uint64_t Vocabulary::fingerprint() const {
  Fingerprint fp;
  for (const auto& t : tokens_) {
    fp.add(t);
    fp.add_separator();
  }
  return fp.value();
}

std::vector<int> encode_sentence(const Sentence& tokens, const Vocabulary& vocab) {
  if (tokens.empty()) throw ContractError("cannot encode an empty sentence");
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& t : tokens) ids.push_back(vocab.index(t));
  ids.push_back(kEos);
  return ids;
}

Sentence decode_ids(const std::vector<int>& ids, const Vocabulary& vocab) {
  Sentence out;
  for (int id : ids) {
    if (id == kEos) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

}  // namespace fnmt::corpus

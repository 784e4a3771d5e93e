#pragma once

// Checkpoint container:
//
//   FNMT checkpoint v1
//   <key>=<value>            configuration, one per line
//   vocab <name> <count>     followed by <count> token lines
//   param <name> <rank> <d0> [<d1>]
//   <row-major little-endian float64 bytes>
//   end
//
// Loading validates every block shape against the configuration and every
// vocabulary against its recorded hash.

#include <filesystem>
#include <map>
#include <string>

#include "fnmt/corpus.hpp"
#include "fnmt/model.hpp"

namespace fnmt::model {

struct Checkpoint {
  ModelConfig config;
  // Targets are whole words (factor vocabulary holds a single class).
  bool word_level = false;
  corpus::Vocabulary source_vocab;
  corpus::Vocabulary lemma_vocab;
  corpus::Vocabulary factor_vocab;
  // hex64 of the lexicon fingerprint; empty for word-level models.
  std::string lexicon_hash;
  // Free-form provenance (update count, best BLEU, ...). Keys without spaces.
  std::map<std::string, std::string> info;
  ModelParams params;

  Model model() const { return Model{config, params}; }
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws ParseError on malformed input, CompatibilityError on hash or
// shape mismatches.
Checkpoint parse_checkpoint(std::string_view bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fnmt::model

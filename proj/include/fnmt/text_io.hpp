#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fnmt {

using Sentence = std::vector<std::string>;

// Splits on runs of spaces and tabs.
Sentence split_tokens(std::string_view line);
std::string join_tokens(const Sentence& tokens);

// Throws IoError when the file cannot be opened.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::vector<Sentence> read_corpus(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

std::string format_corpus(const std::vector<Sentence>& corpus);

// Writes through a sibling temporary file and renames it into place, so the
// destination is either absent/previous or complete.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Stages several outputs and publishes them only when every write succeeded.
class AtomicOutputs {
 public:
  AtomicOutputs() = default;
  AtomicOutputs(const AtomicOutputs&) = delete;
  AtomicOutputs& operator=(const AtomicOutputs&) = delete;
  ~AtomicOutputs();

  void stage(const std::filesystem::path& path, std::string_view content);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
  bool committed_ = false;
};

// 64-bit FNV-1a.
class Fingerprint {
 public:
  void add(std::string_view bytes);
  void add_separator() { add(std::string_view("\x1f", 1)); }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 14695981039346656037ull;
};

std::string hex64(std::uint64_t v);

}  // namespace fnmt

#include "fnmt/text_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fnmt/error.hpp"

namespace fnmt {

namespace fs = std::filesystem;

Sentence split_tokens(std::string_view line) {
  Sentence out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const Sentence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return lines;
}

std::vector<Sentence> read_corpus(const fs::path& path) {
  std::vector<Sentence> corpus;
  for (const auto& line : read_lines(path)) corpus.push_back(split_tokens(line));
  return corpus;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_corpus(const std::vector<Sentence>& corpus) {
  std::string out;
  for (const auto& s : corpus) {
    out += join_tokens(s);
    out += '\n';
  }
  return out;
}

namespace {

fs::path temp_sibling(const fs::path& path) {
  fs::path tmp = path;
  tmp += ".tmp";
  return tmp;
}

void write_raw(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = temp_sibling(path);
  try {
    write_raw(tmp, content);
    fs::rename(tmp, path);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw IoError(e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

AtomicOutputs::~AtomicOutputs() {
  if (committed_) return;
  for (const auto& [tmp, final_path] : staged_) {
    std::error_code ec;
    fs::remove(tmp, ec);
  }
}

void AtomicOutputs::stage(const fs::path& path, std::string_view content) {
  const fs::path tmp = temp_sibling(path);
  staged_.emplace_back(tmp, path);
  write_raw(tmp, content);
}

void AtomicOutputs::commit() {
  for (const auto& [tmp, final_path] : staged_) {
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) throw IoError("cannot publish " + final_path.string() + ": " + ec.message());
  }
  committed_ = true;
}

void Fingerprint::add(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 1099511628211ull;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace fnmt

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cmilab::cli {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal for a double ("%.17g" trimmed), so output is
/// byte-stable across runs.
std::string num(double v);

/// In-memory CSV table; fields are quoted only when they contain , " or newline.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  template <class... T>
  void row(const T&... fields) {
    std::vector<std::string> r;
    (r.push_back(cell(fields)), ...);
    add(std::move(r));
  }
  void add(std::vector<std::string> fields);
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }

  std::size_t width_;
  std::size_t rows_ = 0;
  std::string body_;
};

/// Files produced by a run, held until commit so a failed run leaves nothing.
class Artifacts {
 public:
  void add(std::string name, std::string contents);
  /// Each file goes through a temporary sibling and a rename.
  void commit(const std::filesystem::path& dir) const;
  nlohmann::json checksums() const;
  bool empty() const { return files_.empty(); }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace cmilab::cli
